import itertools
import math
from fractions import Fraction

import pytest

from nsum.oracle import (
    StateSpaceTooLarge,
    TinyModel,
    ard_distribution,
    check_dependence_example,
    check_expectation_y,
    check_generator_law,
    check_negative_correlation,
    chernoff_monte_carlo,
    default_corpus,
    enumerate_exact,
    run_corpus,
)

F = Fraction


def test_enumerate_n3_degree1():
    out = enumerate_exact(TinyModel(3, {1: F(1)}, 1))
    assert len(out) == 8
    assert all(o.probability == F(1, 8) for o in out)


def test_enumerate_n3_degree2_forced():
    out = enumerate_exact(TinyModel(3, {2: F(1)}, 0))
    assert len(out) == 1 and out[0].probability == 1


def test_enumerate_mass_is_one():
    for model in default_corpus(range(2, 5)):
        assert sum(o.probability for o in enumerate_exact(model)) == 1


def test_enumerate_cap():
    model = TinyModel(6, {1: F(1, 2), 5: F(1, 2)}, 2)
    with pytest.raises(StateSpaceTooLarge):
        enumerate_exact(model, cap=1000)


def test_model_validation():
    with pytest.raises(ValueError):
        TinyModel(9, {1: F(1)}, 0)
    with pytest.raises(ValueError):
        TinyModel(4, {1: F(1, 2), 2: F(1, 3)}, 0)
    with pytest.raises(ValueError):
        TinyModel(4, {4: F(1)}, 0)
    with pytest.raises(ValueError):
        TinyModel(4, {1: F(1)}, 2, hidden=frozenset({0}))


# -- joint enumeration agrees with the per-node route ------------------------------


def _joint_y_product(model, nodes):
    """E[prod Y_v] over the full joint law, for a fixed node tuple."""
    total = F(0)
    for o in enumerate_exact(model):
        prod = F(1)
        for v in nodes:
            s = o.in_neighbors[v]
            prod *= F(len(s & model.hidden), len(s))
        total += o.probability * prod
    return total


@pytest.mark.parametrize(
    "model",
    [
        TinyModel(3, {1: F(1)}, 1),
        TinyModel(4, {1: F(1, 2), 2: F(1, 2)}, 2),
        TinyModel(4, {1: F(1, 3), 3: F(2, 3)}, 1),
    ],
)
def test_joint_law_matches_factorised(model):
    exp = check_expectation_y(model)
    joint_single = sum(_joint_y_product(model, (v,)) for v in range(model.n)) / model.n
    assert joint_single == exp.e_y
    corr = check_negative_correlation(model, max_subset=2)
    pairs = list(itertools.permutations(range(model.n), 2))
    joint_pair = sum(_joint_y_product(model, p) for p in pairs) / len(pairs)
    assert joint_pair <= model.rho**2
    # the reported worst Y margin for pairs is at least this pair average's margin
    assert corr.families["Y"].worst_margin >= joint_pair - model.rho**2


def test_ard_distribution_mass():
    model = TinyModel(4, {1: F(1, 2), 2: F(1, 2)}, 2)
    dist = ard_distribution(enumerate_exact(model), model.hidden)
    assert sum(dist.values()) == 1


# -- expectation identities --------------------------------------------------------


def test_expectation_n3_h1():
    r = check_expectation_y(TinyModel(3, {1: F(1)}, 1))
    assert r.e_y == F(1, 3)
    assert r.e_x_hidden == {1: F(0)}
    assert r.e_x_visible == {1: F(1, 2)}
    assert r.passed()


def test_expectation_n4_two_point():
    r = check_expectation_y(TinyModel(4, {1: F(1, 2), 2: F(1, 2)}, 2))
    assert r.e_y == F(1, 2)
    assert r.passed()


def test_expectation_extremes():
    none = check_expectation_y(TinyModel(4, {2: F(1)}, 0))
    assert none.e_y == 0 and none.e_x_hidden is None and none.passed()
    everyone = check_expectation_y(TinyModel(4, {2: F(1)}, 4))
    assert everyone.e_y == 1 and everyone.e_x_visible is None and everyone.passed()


def test_expectation_report_flags_deviation():
    r = check_expectation_y(TinyModel(4, {1: F(1)}, 1))
    r.e_x_visible = {1: F(1, 2)}  # true value is 1/3
    assert not r.passed()


# -- negative correlation ------------------------------------------------------------


def test_negative_correlation_n3():
    r = check_negative_correlation(TinyModel(3, {1: F(1)}, 1))
    assert r.passed()
    assert r.families["Y"].checked == 3


def test_negative_correlation_h0_all_zero():
    r = check_negative_correlation(TinyModel(4, {1: F(1, 2), 2: F(1, 2)}, 0))
    assert r.passed()
    assert r.families["Y"].worst_margin == 0


def test_negative_correlation_all_hidden_equality():
    r = check_negative_correlation(TinyModel(4, {2: F(1)}, 4))
    assert r.passed()
    assert r.families["Y"].worst_margin == 0 and r.families["X"].worst_margin == 0


# -- dependence example ------------------------------------------------------------------


@pytest.mark.parametrize("n", [3, 4])
def test_dependence_strict(n):
    r = check_dependence_example(TinyModel(n, {1: F(1)}, 1))
    assert r.applicable and r.strict


def test_dependence_n3_values():
    r = check_dependence_example(TinyModel(3, {1: F(1)}, 1))
    # P[Y>0] = 2/3 * 1/2 = 1/3; a hidden respondent never counts itself
    assert r.unconditional == F(1, 3)
    assert r.conditional == F(1, 4)


def test_dependence_not_applicable():
    r = check_dependence_example(TinyModel(3, {1: F(1)}, 3))
    assert not r.applicable and r.strict is None


# -- corpus ------------------------------------------------------------------------------


def test_default_corpus_shape():
    corpus = default_corpus()
    assert {m.n for m in corpus} == {2, 3, 4, 5, 6}
    for n in range(2, 7):
        assert {m.h for m in corpus if m.n == n} == set(range(n + 1))
    labels = [m.label() for m in corpus]
    assert len(labels) == len(set(labels))


def test_small_corpus_all_pass():
    rows = run_corpus(default_corpus(range(2, 5)))
    assert rows and all(r.passed for r in rows)


# -- Monte-Carlo cross-checks ---------------------------------------------------------------


def test_generator_matches_exact_law():
    res = check_generator_law(TinyModel(4, {1: F(1, 2), 2: F(1, 2)}, 2), realizations=4000, seed=1)
    assert not res["unexpected"]
    assert res["pvalue"] > 1e-3


def test_generator_law_detects_biased_sampler(monkeypatch):
    import nsum.graphgen as gg

    # off-by-one: a draw equal to the owner's id keeps it instead of skipping it,
    # so node owner+1 is never chosen and owner itself sometimes is
    monkeypatch.setattr(gg, "_skip_self", lambda draws, owner: draws + (draws > owner))
    monkeypatch.setattr(gg.Instance, "__init__", _no_validate(gg.Instance.__init__))
    res = check_generator_law(TinyModel(4, {1: F(1, 2), 2: F(1, 2)}, 2), realizations=4000, seed=1)
    assert res["pvalue"] < 1e-6


def _no_validate(init):
    def wrapped(self, *a, **kw):
        kw["validate"] = False
        init(self, *a, **kw)

    return wrapped


def test_chernoff_monte_carlo():
    c = chernoff_monte_carlo(draws=20_000, seed=3)
    assert c.two_sided_ok and c.lower_ok
    assert c.two_sided_bound == pytest.approx(0.18990, rel=1e-4)
    assert math.isclose(c.lower_bound, math.exp(30 * (-0.2 - 0.8 * math.log(0.8))))
