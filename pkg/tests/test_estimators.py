import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from nsum.core import ArdSet, DegenerateSampleError, Instance, ZeroDegreeError, compute_errors
from nsum.estimators import (
    Sample,
    draw_sample,
    empirical_rs_pmf,
    estimate_fs,
    estimate_fs_instance,
    estimate_mor,
    estimate_ros,
    extract_ard,
)
from nsum.graphgen import (
    GeneratorConfig,
    build_adversarial_pair,
    build_clique_pendant,
    build_star_instance,
    degree_dist_explicit,
    generate,
)


def full(inst):
    return extract_ard(inst, draw_sample(inst, inst.n))


def test_full_sample_is_everyone():
    inst = build_star_instance(5)
    assert draw_sample(inst, 5, 1).nodes.tolist() == list(range(5))
    single = Instance.from_adjacency([[]])
    assert draw_sample(single, 1, 0).nodes.tolist() == [0]


@pytest.mark.parametrize("m", [0, 6])
def test_sample_size_out_of_range(m):
    with pytest.raises(ValueError):
        draw_sample(build_star_instance(5), m)


def test_sample_deterministic():
    inst = build_star_instance(50)
    assert np.array_equal(draw_sample(inst, 7, 3).nodes, draw_sample(inst, 7, 3).nodes)


def test_sample_rejects_duplicates():
    with pytest.raises(ValueError):
        Sample(build_star_instance(5), [1, 1])


def test_pairs_uniform():
    inst = build_star_instance(5)
    counts = {p: 0 for p in itertools.combinations(range(5), 2)}
    trials = 100_000
    for s in range(trials):
        counts[tuple(draw_sample(inst, 2, s).nodes.tolist())] += 1
    sigma = math.sqrt(trials * 0.1 * 0.9)
    assert all(abs(c - trials / 10) <= 3.5 * sigma for c in counts.values())


def test_extract_star():
    a = full(build_star_instance(10, "hub_hidden"))
    assert a.multiset() == sorted([(9, 0)] + [(1, 1)] * 9)


def test_extract_empty_and_full_hidden():
    inst = generate(GeneratorConfig(30, degree_dist_explicit(30, {3: 1.0}), seed=0))
    assert full(inst).C.sum() == 0
    all_hidden = full(inst.with_hidden(range(30)))
    assert np.array_equal(all_hidden.C, all_hidden.R)
    assert estimate_mor(all_hidden).exact == 1 and estimate_ros(all_hidden).exact == 1
    assert estimate_mor(full(inst)).exact == 0 and estimate_ros(full(inst)).exact == 0


def test_extract_foreign_sample():
    a, b = build_star_instance(5), build_star_instance(6)
    with pytest.raises(ValueError):
        extract_ard(a, draw_sample(b, 2, 0))


def test_mor_ros_definitions():
    ard = ArdSet.from_records([(0, 2, 1), (1, 4, 1)])
    assert estimate_mor(ard).exact == Fraction(3, 8)
    assert estimate_ros(ard).exact == Fraction(1, 3)


def test_zero_degree_policy():
    ard = ArdSet.from_records([(0, 0, 0), (1, 2, 1)])
    with pytest.raises(ZeroDegreeError):
        estimate_mor(ard)
    assert estimate_mor(ard, "drop").exact == Fraction(1, 2)
    assert estimate_ros(ard, "drop").exact == Fraction(1, 2)
    with pytest.raises(DegenerateSampleError):
        estimate_ros(ArdSet.from_records([(0, 0, 0)]), "drop")


def test_star_full_sampling_errors():
    a = full(build_star_instance(10, "hub_hidden"))
    mor, ros = estimate_mor(a), estimate_ros(a)
    assert mor.exact == Fraction(9, 10) and ros.exact == Fraction(1, 2)
    assert compute_errors(mor, Fraction(1, 10)).upper == 9
    assert compute_errors(ros, Fraction(1, 10)).upper == 5


def test_clique_pendant_ros_lower_error():
    inst = build_clique_pendant(8)
    ros = estimate_ros(full(inst))
    assert ros.exact == Fraction(1, 5)
    assert compute_errors(ros, inst.prevalence).lower == 2.5


def test_adversarial_pair_estimates():
    for inst in build_adversarial_pair(4):
        a = full(inst)
        assert estimate_mor(a).exact == Fraction(4, 45)
        assert estimate_ros(a).exact == Fraction(1, 7)


def test_fs_star():
    inst = build_star_instance(10, "hub_hidden")
    est = estimate_fs(full(inst), 10)
    assert est.value == pytest.approx(0.3)
    assert compute_errors(est.value, 0.1).combined == pytest.approx(3.0)


def test_fs_regular_graph_exact():
    # cycle on 7 nodes: 2-regular
    edges = [(i, (i + 1) % 7) for i in range(7)]
    inst = Instance.from_undirected_edges(7, edges, hidden=[0, 3])
    assert estimate_fs(full(inst), 7).value == pytest.approx(2 / 7, rel=1e-15)


def test_fs_adversarial_pair():
    i1, _ = build_adversarial_pair(4)
    assert estimate_fs(full(i1), 9).value == pytest.approx(4 / (9 * math.sqrt(5)))


def test_fs_needs_everyone_and_positive_degree():
    inst = build_star_instance(5)
    with pytest.raises(ValueError):
        estimate_fs(extract_ard(inst, draw_sample(inst, 3, 0)), 5)
    iso = Instance.from_undirected_edges(3, [(0, 1)])
    with pytest.raises(ValueError):
        estimate_fs(full(iso), 3)


def test_fs_instance_uses_out_degrees():
    # directed: 0 -> 1, 0 -> 2, 1 -> 2, 2 -> 0; out-degrees (2, 1, 1)
    inst = Instance.from_directed_edges(3, [0, 0, 1, 2], [1, 2, 2, 0], hidden=[0])
    est = estimate_fs_instance(inst)
    assert est.value == pytest.approx(2 / (3 * math.sqrt(2)))


def test_rs_pmf_full_sampling():
    inst = build_star_instance(10)
    assert empirical_rs_pmf(inst, 10, trials=5).as_dict() == {18: 1.0}


def test_rs_pmf_star_single():
    pmf = empirical_rs_pmf(build_star_instance(10), 1, trials=20_000, seed=4).as_dict()
    assert set(pmf) == {1, 9}
    assert pmf[9] == pytest.approx(0.1, abs=0.01)


def test_estimates_bounded():
    inst = generate(GeneratorConfig(200, degree_dist_explicit(200, {1: 0.5, 8: 0.5}), h=30, seed=11))
    for s in range(50):
        a = extract_ard(inst, draw_sample(inst, 20, s))
        assert 0 <= estimate_mor(a).value <= 1 and 0 <= estimate_ros(a).value <= 1


def test_mor_unbiased():
    n, h = 400, 60
    d = degree_dist_explicit(n, {1: 0.3, 4: 0.4, 20: 0.3})
    vals = []
    for s in range(400):
        inst = generate(GeneratorConfig(n, d, h=h, seed=s))
        vals.append(estimate_mor(extract_ard(inst, draw_sample(inst, 10, s))).value)
    se = np.std(vals, ddof=1) / math.sqrt(len(vals))
    assert abs(np.mean(vals) - h / n) <= 3 * se


def test_fullsampling_worstcase_holds_on_generated():
    from nsum.bounds import fullsampling_worstcase
    from nsum.graphgen import symmetrize

    for s in range(40):
        n = 10 + s
        inst = symmetrize(generate(GeneratorConfig(n, degree_dist_explicit(n, {1: 0.5, 3: 0.5}), h=1 + s % (n - 1), seed=s)))
        a = full(inst)
        deg = inst.in_degree
        out = inst.out_degree
        for kind, est in (("MoR", estimate_mor(a)), ("RoS", estimate_ros(a))):
            up, low = fullsampling_worstcase(kind, out.max(), out.min(), deg.min(), deg.max(), deg.mean())
            err = compute_errors(est, inst.prevalence)
            assert err.upper <= up + 1e-9 and err.lower <= low + 1e-9
