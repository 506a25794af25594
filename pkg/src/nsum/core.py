"""Domain types shared across the package.

Node ids are dense integers ``0..n-1``. An :class:`Instance` stores the
in-neighbour lists in CSR form (``indptr``/``indices``) so that the large
random networks used in the simulations stay cheap to build and to query.
Prevalence is kept as an exact :class:`fractions.Fraction` ``h/n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

__all__ = [
    "ArdRecord",
    "ArdSet",
    "DegenerateSampleError",
    "DegreeDistribution",
    "DiscretePmf",
    "ErrorReport",
    "Instance",
    "PrevalenceEstimate",
    "ZeroDegreeError",
    "compute_errors",
]

METHODS = ("MoR", "RoS", "FS")


class ZeroDegreeError(ValueError):
    """A sampled respondent reported no in-neighbours."""


class DegenerateSampleError(ValueError):
    """The sampled in-degrees sum to zero."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Instance:
    """A directed network together with a hidden node set.

    Parameters
    ----------
    n : int
        Number of nodes.
    indptr, indices : array_like
        CSR layout of the in-neighbour lists: the in-neighbours of ``v`` are
        ``indices[indptr[v]:indptr[v + 1]]``.
    hidden : array_like
        Either a boolean mask of length ``n`` or a collection of node ids.
    validate : bool
        Check for self-loops, duplicate in-neighbours and out-of-range ids.
        Generators that guarantee these by construction may skip it.
    """

    def __init__(self, n, indptr, indices, hidden=(), *, validate: bool = True):
        n = int(n)
        if n < 1:
            raise ValueError(f"n must be positive, got {n}")
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        if indptr.shape != (n + 1,) or indptr[0] != 0 or indptr[-1] != indices.size:
            raise ValueError("indptr must have length n + 1, start at 0 and end at len(indices)")
        if np.any(np.diff(indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        self.n = n
        self.indptr = _frozen(indptr)
        self.indices = _frozen(indices)
        self.hidden_mask = _frozen(_hidden_mask(hidden, n))
        if validate:
            self._validate()

    @classmethod
    def from_adjacency(cls, adjacency: Sequence[Iterable[int]], hidden=(), **kw) -> "Instance":
        """Build from a per-node list of in-neighbour ids."""
        rows = [np.fromiter(a, dtype=np.int64) for a in adjacency]
        indptr = np.zeros(len(rows) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([r.size for r in rows])
        indices = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        return cls(len(rows), indptr, indices, hidden, **kw)

    @classmethod
    def from_undirected_edges(cls, n: int, edges, hidden=(), **kw) -> "Instance":
        """Build a bidirectional instance: every edge ``{u, v}`` yields ``u->v`` and ``v->u``."""
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        return cls.from_directed_edges(n, src, dst, hidden, **kw)

    @classmethod
    def from_directed_edges(cls, n: int, src, dst, hidden=(), **kw) -> "Instance":
        """Edge ``(u, v)`` means ``v`` knows ``u``: ``u`` is an in-neighbour of ``v``."""
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
            raise ValueError("edge endpoint outside 0..n-1")
        order = np.lexsort((src, dst))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(np.bincount(dst, minlength=n))
        return cls(n, indptr, src[order], hidden, **kw)

    def _validate(self) -> None:
        if self.indices.size == 0:
            return
        if self.indices.min() < 0 or self.indices.max() >= self.n:
            raise ValueError("in-neighbour id outside 0..n-1")
        owner = self.owners
        loops = np.flatnonzero(owner == self.indices)
        if loops.size:
            raise ValueError(f"self-loop at node {int(owner[loops[0]])}")
        keys = np.sort(owner * self.n + self.indices)
        dup = np.flatnonzero(keys[1:] == keys[:-1])
        if dup.size:
            k = int(keys[dup[0]])
            raise ValueError(f"duplicate in-neighbour {k % self.n} of node {k // self.n}")

    def with_hidden(self, hidden) -> "Instance":
        """Same network, different hidden set."""
        inst = Instance(self.n, self.indptr, self.indices, hidden, validate=False)
        if "bidirectional" in self.__dict__:
            inst.__dict__["bidirectional"] = self.bidirectional
        return inst

    # -- derived quantities ------------------------------------------------

    @cached_property
    def owners(self) -> np.ndarray:
        """Node id owning each entry of ``indices``."""
        return _frozen(np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr)))

    @cached_property
    def in_degree(self) -> np.ndarray:
        return _frozen(np.diff(self.indptr))

    @cached_property
    def out_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self.indices, minlength=self.n).astype(np.int64))

    @cached_property
    def hidden_in_count(self) -> np.ndarray:
        """``C_v`` for every node: number of hidden in-neighbours."""
        cs = np.zeros(self.indices.size + 1, dtype=np.int64)
        np.cumsum(self.hidden_mask[self.indices], out=cs[1:])
        return _frozen(cs[self.indptr[1:]] - cs[self.indptr[:-1]])

    @cached_property
    def bidirectional(self) -> bool:
        """True iff ``(u, v)`` is an edge exactly when ``(v, u)`` is."""
        fwd = np.sort(self.owners * self.n + self.indices)
        rev = np.sort(self.indices * self.n + self.owners)
        return bool(np.array_equal(fwd, rev))

    @property
    def hidden(self) -> np.ndarray:
        return np.flatnonzero(self.hidden_mask)

    @property
    def h(self) -> int:
        return int(self.hidden_mask.sum())

    @property
    def prevalence(self) -> Fraction:
        return Fraction(self.h, self.n)

    @property
    def rho(self) -> float:
        return self.h / self.n

    @property
    def num_edges(self) -> int:
        return int(self.indices.size)

    def in_neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def adjacency(self) -> list[list[int]]:
        return [self.in_neighbors(v).tolist() for v in range(self.n)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.hidden_mask, other.hidden_mask)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Instance(n={self.n}, edges={self.num_edges}, h={self.h})"


def _hidden_mask(hidden, n: int) -> np.ndarray:
    hidden = np.asarray(list(hidden) if not isinstance(hidden, np.ndarray) else hidden)
    if hidden.dtype == bool:
        if hidden.shape != (n,):
            raise ValueError("boolean hidden mask must have length n")
        return hidden.copy()
    ids = hidden.astype(np.int64).ravel()
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        raise ValueError("hidden ids must lie in 0..n-1")
    mask = np.zeros(n, dtype=bool)
    mask[ids] = True
    return mask


@dataclass(frozen=True, eq=False)
class DegreeDistribution:
    """In-degree law over ``{1, ..., n-1}``.

    ``pmf[k]`` is the probability of in-degree ``k``; ``pmf[0]`` is always 0.
    """

    n: int
    pmf: np.ndarray
    kind: str = "explicit"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=float)
        if pmf.shape != (self.n,):
            raise ValueError("pmf array must have length n (degrees 0..n-1)")
        if np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
            raise ValueError("probabilities must be finite and nonnegative")
        if pmf[0] != 0:
            raise ValueError("degree 0 is not allowed (every node needs an in-neighbour)")
        total = pmf.sum()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"pmf sums to {total}, not 1")
        object.__setattr__(self, "pmf", _frozen(pmf / total))

    @cached_property
    def cdf(self) -> np.ndarray:
        return _frozen(np.cumsum(self.pmf))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.pmf)

    def mean(self) -> float:
        return float(np.dot(np.arange(self.n), self.pmf))

    def moment(self, order: int) -> float:
        return float(np.dot(np.arange(self.n, dtype=float) ** order, self.pmf))

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(self.pmf[k]) for k in self.support}

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Inverse-CDF draws."""
        cdf = self.cdf
        u = rng.random(size) * cdf[-1]
        k = np.searchsorted(cdf, u, side="right")
        return np.minimum(k, self.n - 1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class DiscretePmf:
    """Probability mass function over nonnegative integers (used for ``R_S``)."""

    values: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        probs = np.asarray(self.probs, dtype=float)
        if values.shape != probs.shape or values.ndim != 1:
            raise ValueError("values and probs must be 1-D arrays of equal length")
        if np.any(values < 0):
            raise ValueError("pmf support must be nonnegative")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, float]) -> "DiscretePmf":
        keys = sorted(mapping)
        return cls(np.array(keys, dtype=np.int64), np.array([mapping[k] for k in keys], dtype=float))

    @classmethod
    def from_samples(cls, samples) -> "DiscretePmf":
        values, counts = np.unique(np.asarray(samples, dtype=np.int64), return_counts=True)
        return cls(values, counts / counts.sum())

    @classmethod
    def point_mass(cls, value: int) -> "DiscretePmf":
        return cls(np.array([value]), np.array([1.0]))

    @property
    def total(self) -> float:
        return float(self.probs.sum())

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs) / self.probs.sum())

    def as_dict(self) -> dict[int, float]:
        return {int(v): float(p) for v, p in zip(self.values, self.probs)}


class ArdRecord(NamedTuple):
    node: int
    R: int
    C: int


@dataclass(frozen=True, eq=False)
class ArdSet:
    """Aggregated relational data of a sample: one ``(R_v, C_v)`` pair per respondent."""

    nodes: np.ndarray
    R: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=np.int64) for a in (self.nodes, self.R, self.C)]
        if not (arrays[0].shape == arrays[1].shape == arrays[2].shape) or arrays[0].ndim != 1:
            raise ValueError("nodes, R and C must be 1-D arrays of equal length")
        nodes, R, C = arrays
        if np.any(C < 0) or np.any(C > R):
            raise ValueError("every record needs 0 <= C <= R")
        for name, a in zip(("nodes", "R", "C"), arrays):
            object.__setattr__(self, name, _frozen(a))

    @classmethod
    def from_records(cls, records: Iterable[tuple[int, int, int]]) -> "ArdSet":
        rows = list(records)
        if not rows:
            return cls(np.zeros(0), np.zeros(0), np.zeros(0))
        nodes, R, C = zip(*rows)
        return cls(np.array(nodes), np.array(R), np.array(C))

    @property
    def m(self) -> int:
        return int(self.nodes.size)

    def __len__(self) -> int:
        return self.m

    def __iter__(self) -> Iterator[ArdRecord]:
        for v, r, c in zip(self.nodes.tolist(), self.R.tolist(), self.C.tolist()):
            yield ArdRecord(v, r, c)

    def multiset(self) -> list[tuple[int, int]]:
        """Sorted ``(R, C)`` pairs, ignoring node identity."""
        return sorted(zip(self.R.tolist(), self.C.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("node,R,C\n")
            for rec in self:
                fh.write(f"{rec.node},{rec.R},{rec.C}\n")

    @classmethod
    def from_csv(cls, path) -> "ArdSet":
        rows = []
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().replace(" ", "")
            if header != "node,R,C":
                raise ValueError(f"{path}: expected header 'node,R,C', got {header!r}")
            for lineno, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                try:
                    v, r, c = (int(x) for x in line.split(","))
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: malformed ARD row {line!r}") from None
                rows.append((v, r, c))
        return cls.from_records(rows)


@dataclass(frozen=True)
class PrevalenceEstimate:
    """Estimated prevalence.

    ``exact`` holds the rational value when the estimator is rational in the
    ARD (MoR and RoS); FS involves a square root and leaves it ``None``.
    """

    value: float
    method: str
    exact: Fraction | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ValueError(f"estimate must be finite and nonnegative, got {self.value}")

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class ErrorReport:
    upper: float
    lower: float
    combined: float


def _ratio(a, b) -> float:
    if b == 0:
        return math.inf
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return float(Fraction(a) / Fraction(b))
    return float(a) / float(b)


def compute_errors(estimate, rho) -> ErrorReport:
    """Multiplicative upper, lower and combined error of ``estimate`` against ``rho``.

    Division by zero saturates to ``inf``; ``0/0`` counts as a perfect match.
    Rational inputs (``Fraction``/``int``) give exact ratios.
    """
    if isinstance(estimate, PrevalenceEstimate):
        estimate = estimate.exact if estimate.exact is not None else estimate.value
    if estimate < 0:
        raise ValueError(f"estimate must be nonnegative, got {estimate}")
    if rho < 0 or rho > 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if estimate == 0 and rho == 0:
        return ErrorReport(1.0, 1.0, 1.0)
    upper = max(1.0, _ratio(estimate, rho))
    lower = max(1.0, _ratio(rho, estimate))
    return ErrorReport(upper, lower, max(upper, lower))


def combined_error_array(estimates, rho: float) -> np.ndarray:
    """Vectorised combined error for simulation tables."""
    est = np.asarray(estimates, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.maximum(est / rho, rho / est)
    if rho == 0:
        err = np.where(est == 0, 1.0, np.inf)
    return np.maximum(err, 1.0)
