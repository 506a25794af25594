"""Exact checks of the random-network probability identities on tiny models.

Every quantity here is computed with :class:`fractions.Fraction` by listing
the possible in-neighbour choices, never by evaluating a closed form. Two
routes are provided:

* :func:`enumerate_exact` walks the full joint outcome space (all nodes at
  once) and is limited by a state cap;
* the ``check_*`` functions use the fact that nodes choose their
  in-neighbours independently once the hidden set is fixed, so the law of a
  product over a node subset factorises into per-node laws. Each per-node law
  is itself an exhaustive list of ordered in-neighbour sequences.

The surveyed subset is enumerated over all subsets of the requested size,
which is the same as sampling it uniformly.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

__all__ = [
    "StateSpaceTooLarge",
    "TinyModel",
    "check_dependence_example",
    "check_expectation_y",
    "check_generator_law",
    "check_negative_correlation",
    "chernoff_monte_carlo",
    "default_corpus",
    "enumerate_exact",
    "run_corpus",
]

STATE_CAP = 10**7


class StateSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TinyModel:
    n: int
    pmf: Mapping[int, Fraction]
    h: int
    hidden: frozenset[int] | None = None

    def __post_init__(self):
        if not 2 <= self.n <= 8:
            raise ValueError("tiny models need 2 <= n <= 8")
        pmf = {int(k): Fraction(p) for k, p in self.pmf.items() if p}
        if not pmf or len(pmf) > 3:
            raise ValueError("pmf support must have 1 to 3 degrees")
        if any(not 1 <= k <= self.n - 1 for k in pmf):
            raise ValueError("degrees must lie in 1..n-1")
        if sum(pmf.values()) != 1:
            raise ValueError("pmf must sum to exactly 1")
        object.__setattr__(self, "pmf", pmf)
        hidden = frozenset(range(self.h)) if self.hidden is None else frozenset(self.hidden)
        if len(hidden) != self.h or any(not 0 <= v < self.n for v in hidden):
            raise ValueError("hidden set must have h ids in 0..n-1")
        object.__setattr__(self, "hidden", hidden)

    @property
    def rho(self) -> Fraction:
        return Fraction(self.h, self.n)

    def state_count(self) -> int:
        per_node = sum(math.comb(self.n - 1, k) for k in self.pmf)
        return per_node**self.n

    def label(self) -> str:
        pmf = ",".join(f"{k}:{p}" for k, p in sorted(self.pmf.items()))
        return f"n={self.n} h={self.h} pmf={{{pmf}}}"


# -- full joint enumeration ------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    in_neighbors: tuple[frozenset[int], ...]
    probability: Fraction

    def ard(self, hidden: frozenset[int]) -> tuple[tuple[int, int], ...]:
        return tuple((len(s), len(s & hidden)) for s in self.in_neighbors)


def _node_choices(model: TinyModel, v: int) -> list[tuple[frozenset[int], Fraction]]:
    others = [u for u in range(model.n) if u != v]
    out = []
    for k, pk in sorted(model.pmf.items()):
        w = pk / math.comb(model.n - 1, k)
        out.extend((frozenset(c), w) for c in itertools.combinations(others, k))
    return out


def enumerate_exact(model: TinyModel, cap: int = STATE_CAP) -> list[Outcome]:
    """Every joint in-neighbour configuration with its exact probability."""
    count = model.state_count()
    if count > cap:
        raise StateSpaceTooLarge(f"{model.label()} has {count} outcomes, cap is {cap}")
    per_node = [_node_choices(model, v) for v in range(model.n)]
    outcomes = []
    for combo in itertools.product(*per_node):
        prob = Fraction(1)
        for _, w in combo:
            prob *= w
        outcomes.append(Outcome(tuple(s for s, _ in combo), prob))
    return outcomes


def ard_distribution(outcomes: list[Outcome], hidden) -> dict[tuple, Fraction]:
    hidden = frozenset(hidden)
    dist: dict[tuple, Fraction] = defaultdict(Fraction)
    for o in outcomes:
        dist[o.ard(hidden)] += o.probability
    return dict(dist)


# -- per-node laws -----------------------------------------------------------


def _sequences(model: TinyModel, v: int) -> Iterator[tuple[tuple[int, ...], Fraction]]:
    """Ordered in-neighbour lists of ``v``; the order realises the j-th in-neighbour."""
    others = [u for u in range(model.n) if u != v]
    for k, pk in sorted(model.pmf.items()):
        w = pk / math.perm(model.n - 1, k)
        for seq in itertools.permutations(others, k):
            yield seq, w


@dataclass
class _NodeLaw:
    """Exact per-node moments; identical for nodes that share a table."""

    e_y: Fraction
    e_1my: Fraction
    # deg -> list indexed by b of E[prod_{j<=b} X_vj | R_v = deg]
    x_prod: dict[int, tuple[Fraction, ...]]
    x_comp: dict[int, tuple[Fraction, ...]]
    # j -> (P[R_v >= j] * E[X_vj | R_v >= j], P[R_v >= j])
    x_pos: dict[int, tuple[Fraction, Fraction]]
    p_y_pos: Fraction

    def key(self):
        return (self.e_y, self.e_1my, tuple(sorted(self.x_prod.items())), tuple(sorted(self.x_comp.items())))


def _node_law(model: TinyModel, v: int) -> _NodeLaw:
    hidden = model.hidden
    e_y = e_1my = p_y_pos = Fraction(0)
    x_prod = {k: [Fraction(0)] * (k + 1) for k in model.pmf}
    x_comp = {k: [Fraction(0)] * (k + 1) for k in model.pmf}
    x_pos: dict[int, list[Fraction]] = defaultdict(lambda: [Fraction(0), Fraction(0)])
    for seq, w in _sequences(model, v):
        k = len(seq)
        flags = [u in hidden for u in seq]
        c = sum(flags)
        e_y += w * Fraction(c, k)
        e_1my += w * (1 - Fraction(c, k))
        if c:
            p_y_pos += w
        for b in range(k + 1):
            if all(flags[:b]):
                x_prod[k][b] += w / model.pmf[k]
            if not any(flags[:b]):
                x_comp[k][b] += w / model.pmf[k]
        for j, f in enumerate(flags, start=1):
            x_pos[j][1] += w
            if f:
                x_pos[j][0] += w
    return _NodeLaw(
        e_y,
        e_1my,
        {k: tuple(t) for k, t in x_prod.items()},
        {k: tuple(t) for k, t in x_comp.items()},
        {j: tuple(t) for j, t in x_pos.items()},
        p_y_pos,
    )


def _laws(model: TinyModel) -> list[_NodeLaw]:
    return [_node_law(model, v) for v in range(model.n)]


def _classes(laws: list[_NodeLaw]) -> list[tuple[_NodeLaw, int]]:
    """Group nodes with identical laws: (representative, multiplicity)."""
    groups: dict = {}
    for law in laws:
        rep, cnt = groups.get(law.key(), (law, 0))
        groups[law.key()] = (rep, cnt + 1)
    return list(groups.values())


def _ordered_tuples(classes, s: int):
    """Ordered s-tuples of distinct nodes, as class patterns with their counts."""
    for pattern in itertools.product(range(len(classes)), repeat=s):
        used = Counter(pattern)
        ways = 1
        for c, need in used.items():
            ways *= math.perm(classes[c][1], need)
        if ways:
            yield pattern, ways


# -- reports -------------------------------------------------------------------


@dataclass
class ExpectationReport:
    model: TinyModel
    e_y: Fraction
    e_x: dict[int, Fraction]
    e_x_hidden: dict[int, Fraction] | None
    e_x_visible: dict[int, Fraction] | None

    @property
    def expected_hidden(self) -> Fraction | None:
        return Fraction(self.model.h - 1, self.model.n - 1) if self.model.h else None

    @property
    def expected_visible(self) -> Fraction | None:
        m = self.model
        return Fraction(m.h, m.n - 1) if m.h < m.n else None

    def deviations(self) -> dict[str, float]:
        rho = self.model.rho
        dev = {"E[Y]": abs(float(self.e_y - rho))}
        dev["E[X]"] = max(abs(float(x - rho)) for x in self.e_x.values())
        if self.e_x_hidden is not None:
            dev["E[X|v in H]"] = max(
                abs(float(x - self.expected_hidden)) for x in self.e_x_hidden.values()
            )
        if self.e_x_visible is not None:
            dev["E[X|v not in H]"] = max(
                abs(float(x - self.expected_visible)) for x in self.e_x_visible.values()
            )
        return dev

    def passed(self, tol: float = 1e-12) -> bool:
        return all(d <= tol for d in self.deviations().values())


def _average_positions(laws: list[_NodeLaw]) -> dict[int, Fraction]:
    num: dict[int, Fraction] = defaultdict(Fraction)
    den: dict[int, Fraction] = defaultdict(Fraction)
    for law in laws:
        for j, (a, b) in law.x_pos.items():
            num[j] += a
            den[j] += b
    return {j: num[j] / den[j] for j in sorted(num)}


def check_expectation_y(model: TinyModel) -> ExpectationReport:
    """Exact ``E[Y_v]``, ``E[X_vj]`` and their conditional versions for a uniform ``v``."""
    laws = _laws(model)
    e_y = sum((law.e_y for law in laws), Fraction(0)) / model.n
    hid = [laws[v] for v in sorted(model.hidden)]
    vis = [laws[v] for v in range(model.n) if v not in model.hidden]
    return ExpectationReport(
        model,
        e_y,
        _average_positions(laws),
        _average_positions(hid) if hid else None,
        _average_positions(vis) if vis else None,
    )


@dataclass
class FamilyResult:
    checked: int = 0
    violated: int = 0
    worst_margin: Fraction = Fraction(-(10**9))

    def record(self, lhs: Fraction, rhs: Fraction) -> None:
        self.checked += 1
        margin = lhs - rhs
        self.worst_margin = max(self.worst_margin, margin)
        if margin > 0:
            self.violated += 1


@dataclass
class CorrelationReport:
    model: TinyModel
    families: dict[str, FamilyResult] = field(default_factory=dict)

    def passed(self, tol: float = 1e-12) -> bool:
        return all(f.checked == 0 or float(f.worst_margin) <= tol for f in self.families.values())


def check_negative_correlation(model: TinyModel, max_subset: int = 3) -> CorrelationReport:
    """Product inequalities for ``Y_v``, ``1 - Y_v``, ``X_vj`` and ``1 - X_vj``.

    For the ``X`` families the in-degrees of the chosen nodes are held fixed
    (every degree vector in the support is tried) and each node contributes
    the product over its first ``b`` in-neighbour positions, for every
    ``0 <= b <= R_v``.
    """
    laws = _laws(model)
    classes = _classes(laws)
    rho = model.rho
    report = CorrelationReport(model, {k: FamilyResult() for k in ("Y", "1-Y", "X", "1-X")})
    degrees = sorted(model.pmf)
    for s in range(1, min(max_subset, model.n) + 1):
        total = math.perm(model.n, s)
        tuples = list(_ordered_tuples(classes, s))
        for name, attr, target in (("Y", "e_y", rho), ("1-Y", "e_1my", 1 - rho)):
            lhs = Fraction(0)
            for pattern, ways in tuples:
                prod = Fraction(ways)
                for c in pattern:
                    prod *= getattr(classes[c][0], attr)
                lhs += prod
            report.families[name].record(lhs / total, target**s)
        for d in itertools.product(degrees, repeat=s):
            for b in itertools.product(*(range(k + 1) for k in d)):
                if sum(b) == 0:
                    continue
                for name, attr, target in (("X", "x_prod", rho), ("1-X", "x_comp", 1 - rho)):
                    lhs = Fraction(0)
                    for pattern, ways in tuples:
                        prod = Fraction(ways)
                        for c, k, bi in zip(pattern, d, b):
                            prod *= getattr(classes[c][0], attr)[k][bi]
                        lhs += prod
                    report.families[name].record(lhs / total, target ** sum(b))
    return report


@dataclass
class DependenceReport:
    model: TinyModel
    applicable: bool
    conditional: Fraction | None = None
    unconditional: Fraction | None = None

    @property
    def strict(self) -> bool | None:
        if not self.applicable:
            return None
        return self.conditional < self.unconditional


def check_dependence_example(model: TinyModel) -> DependenceReport:
    """Compare ``P[Y_2 > 0 | Y_1 > 0]`` with ``P[Y_2 > 0]`` for a single hidden node."""
    if model.h != 1:
        return DependenceReport(model, applicable=False)
    laws = _laws(model)
    classes = _classes(laws)
    single = sum((law.p_y_pos for law in laws), Fraction(0)) / model.n
    joint = Fraction(0)
    for pattern, ways in _ordered_tuples(classes, 2):
        joint += ways * classes[pattern[0]][0].p_y_pos * classes[pattern[1]][0].p_y_pos
    joint /= math.perm(model.n, 2)
    return DependenceReport(model, True, joint / single, single)


# -- corpus ----------------------------------------------------------------------


def default_corpus(n_values=range(2, 7)) -> list[TinyModel]:
    """Every ``h`` for point-mass and two-point degree laws on ``n`` in ``n_values``."""
    models = []
    for n in n_values:
        pmfs = [{k: Fraction(1)} for k in range(1, n)]
        if n >= 3:
            pmfs.append({1: Fraction(1, 2), 2: Fraction(1, 2)})
        if n >= 4:
            pmfs.append({1: Fraction(1, 3), n - 1: Fraction(2, 3)})
        for pmf in pmfs:
            for h in range(n + 1):
                models.append(TinyModel(n, pmf, h))
    return models


@dataclass
class CorpusRow:
    model: TinyModel
    check: str
    passed: bool
    detail: str


def run_corpus(models=None, max_subset: int = 3, tol: float = 1e-12) -> list[CorpusRow]:
    rows = []
    for model in models if models is not None else default_corpus():
        exp = check_expectation_y(model)
        dev = max(exp.deviations().values())
        rows.append(CorpusRow(model, "expectations", exp.passed(tol), f"max deviation {dev:.3g}"))
        corr = check_negative_correlation(model, max_subset)
        worst = max(float(f.worst_margin) for f in corr.families.values() if f.checked)
        checked = sum(f.checked for f in corr.families.values())
        rows.append(
            CorpusRow(model, "negative correlation", corr.passed(tol), f"{checked} products, worst margin {worst:.3g}")
        )
        dep = check_dependence_example(model)
        if dep.applicable:
            rows.append(
                CorpusRow(
                    model,
                    "dependence example",
                    bool(dep.strict),
                    f"{float(dep.conditional):.4f} < {float(dep.unconditional):.4f}",
                )
            )
    return rows


# -- Monte-Carlo cross-checks ------------------------------------------------------


def check_generator_law(model: TinyModel, realizations: int = 20_000, seed: int = 0) -> dict:
    """Compare ``graphgen.generate`` against the exact per-node ``(R, C)`` law.

    Returns the chi-square statistic and p-value of the pooled ``(R_v, C_v)``
    counts of every node against their exact probabilities.
    """
    from scipy import stats

    from .core import DegreeDistribution
    from .graphgen import GeneratorConfig, generate

    pmf = np.zeros(model.n)
    for k, p in model.pmf.items():
        pmf[k] = float(p)
    dist = DegreeDistribution(model.n, pmf)
    hidden = sorted(model.hidden)
    observed: Counter = Counter()
    ss = np.random.SeedSequence(seed)
    for child in ss.spawn(realizations):
        inst = generate(
            GeneratorConfig(model.n, dist, hidden_ids=hidden, seed=int(child.generate_state(1, np.uint64)[0]))
        )
        for v, (r, c) in enumerate(zip(inst.in_degree.tolist(), inst.hidden_in_count.tolist())):
            observed[(v, r, c)] += 1
    expected: dict = defaultdict(Fraction)
    for v in range(model.n):
        for s, w in _node_choices(model, v):
            expected[(v, len(s), len(s & model.hidden))] += w
    keys = sorted(expected)
    obs = np.array([observed.get(k, 0) for k in keys], dtype=float)
    exp = np.array([float(expected[k]) * realizations for k in keys])
    unexpected = set(observed) - set(expected)
    if unexpected:
        return {"chi2": math.inf, "pvalue": 0.0, "unexpected": sorted(unexpected)}
    # one degree of freedom lost per node (each node's probabilities sum to 1)
    dof = len(keys) - model.n
    if dof <= 0:
        return {"chi2": 0.0, "pvalue": 1.0, "unexpected": []}
    chi2 = float(((obs - exp) ** 2 / exp).sum())
    return {"chi2": chi2, "pvalue": float(stats.chi2.sf(chi2, dof)), "unexpected": []}


@dataclass
class ChernoffCheck:
    draws: int
    two_sided_empirical: float
    two_sided_bound: float
    lower_empirical: float
    lower_bound: float

    @staticmethod
    def _se(p: float, n: int) -> float:
        return math.sqrt(p * (1 - p) / n)

    @property
    def two_sided_ok(self) -> bool:
        return self.two_sided_empirical <= self.two_sided_bound + 3 * self._se(self.two_sided_empirical, self.draws)

    @property
    def lower_ok(self) -> bool:
        return self.lower_empirical <= self.lower_bound + 3 * self._se(self.lower_empirical, self.draws)


def chernoff_monte_carlo(
    trials: int = 100,
    p: float = 0.3,
    beta: float = 1.5,
    delta: float = 0.2,
    draws: int = 100_000,
    seed: int = 0,
) -> ChernoffCheck:
    """Empirical Binomial(trials, p) tails against the two Chernoff bounds."""
    from .bounds import chernoff_lower, chernoff_two_sided

    mu = trials * p
    z = np.random.default_rng(seed).binomial(trials, p, size=draws)
    outside = np.mean((z < mu / beta) | (z > beta * mu))
    lower = np.mean(z <= (1 - delta) * mu)
    return ChernoffCheck(
        draws,
        float(outside),
        chernoff_two_sided(beta, mu).raw,
        float(lower),
        chernoff_lower(delta, mu).raw,
    )
