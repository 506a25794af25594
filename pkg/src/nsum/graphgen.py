"""Instance construction.

Random networks follow a two-step recipe: every node independently draws an
in-degree from a :class:`~nsum.core.DegreeDistribution` and then picks that
many distinct in-neighbours uniformly from the other ``n - 1`` nodes. The
module also builds the small hand-made networks on which the estimators are
provably bad (the clique/pendant/hub pair, the star and the clique with
pendants).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .core import DegreeDistribution, Instance

__all__ = [
    "GeneratorConfig",
    "build_adversarial_pair",
    "build_clique_pendant",
    "build_star_instance",
    "degree_dist_er_truncated",
    "degree_dist_explicit",
    "degree_dist_scale_free",
    "generate",
    "read_instance",
    "symmetrize",
    "write_instance",
]


def degree_dist_explicit(n: int, pmf: Mapping[int, float]) -> DegreeDistribution:
    """Degree law from a ``{degree: probability}`` mapping with support in ``1..n-1``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not pmf:
        raise ValueError("empty pmf")
    arr = np.zeros(n)
    for k, p in pmf.items():
        k = int(k)
        if not 1 <= k <= n - 1:
            raise ValueError(f"degree {k} outside 1..{n - 1}")
        if p < 0:
            raise ValueError(f"negative probability for degree {k}")
        arr[k] += float(p)
    return DegreeDistribution(n, arr, "explicit", {})


def degree_dist_er_truncated(n: int, p: float) -> DegreeDistribution:
    """Binomial(n-1, p) in-degree with the zero-degree mass spread proportionally."""
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if n < 2:
        raise ValueError("n must be at least 2")
    k = np.arange(n)
    pmf = stats.binom.pmf(k, n - 1, p)
    pmf[0] = 0.0
    # 1 - (1-p)^(n-1), computed without cancellation for tiny p
    pmf /= -math.expm1((n - 1) * math.log1p(-p))
    return DegreeDistribution(n, pmf / pmf.sum(), "er_truncated", {"p": p})


def degree_dist_scale_free(n: int, gamma: float) -> DegreeDistribution:
    """``P(k) = nu * k**-gamma`` on ``1..n-1``."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if n < 2:
        raise ValueError("n must be at least 2")
    pmf = np.zeros(n)
    pmf[1:] = np.arange(1, n, dtype=float) ** -gamma
    pmf /= pmf.sum()
    return DegreeDistribution(n, pmf, "scale_free", {"gamma": gamma})


@dataclass(frozen=True)
class GeneratorConfig:
    """Everything :func:`generate` needs.

    The hidden set is ``hidden_ids`` when given, otherwise ``h`` nodes placed
    by ``placement``: ``"first"`` (ids ``0..h-1``) or ``"uniform"``.
    """

    n: int
    degrees: DegreeDistribution
    h: int = 0
    hidden_ids: Sequence[int] | None = None
    placement: str = "first"
    seed: int = 0

    def __post_init__(self):
        if self.degrees.n != self.n:
            raise ValueError("degree distribution was built for a different n")
        if self.hidden_ids is None and not 0 <= self.h <= self.n:
            raise ValueError(f"h must lie in 0..n, got {self.h}")
        if self.placement not in ("first", "uniform"):
            raise ValueError(f"unknown placement {self.placement!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


# rows with more in-neighbours than this use an explicit without-replacement draw
_DENSE_FRACTION = 0.05


def _skip_self(draws: np.ndarray, owner: np.ndarray) -> np.ndarray:
    """Map uniform draws on ``0..n-2`` to ``V \\ {owner}``."""
    return draws + (draws >= owner)


def _sparse_rows(rng, owner: np.ndarray, n: int) -> np.ndarray:
    """Distinct uniform in-neighbours for rows with few in-neighbours.

    Draw with replacement, then redraw every copy of a repeated entry until
    each row is a set. The procedure is symmetric under relabelling, so each
    row ends up uniform over subsets of its size.
    """
    cols = _skip_self(rng.integers(0, n - 1, size=owner.size), owner)
    todo = np.arange(owner.size)
    while todo.size:
        keys = owner[todo] * n + cols[todo]
        sk = np.sort(keys)
        repeated = sk[1:][sk[1:] == sk[:-1]]
        if repeated.size == 0:
            break
        redo = todo[np.isin(keys, repeated)]
        cols[redo] = _skip_self(rng.integers(0, n - 1, size=redo.size), owner[redo])
        # only rows that had a collision need rechecking
        todo = todo[np.isin(owner[todo], np.unique(owner[redo]))]
    return cols


def generate(config: GeneratorConfig) -> Instance:
    """Draw a random instance; a pure function of ``config`` (seed included)."""
    n = config.n
    rng = np.random.default_rng(int(config.seed))
    deg = config.degrees.sample(rng, n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])
    owner = np.repeat(np.arange(n, dtype=np.int64), deg)
    cols = np.empty(owner.size, dtype=np.int64)

    dense = deg > max(16, _DENSE_FRACTION * (n - 1))
    sparse_pos = ~dense[owner]
    cols[sparse_pos] = _sparse_rows(rng, owner[sparse_pos], n)
    for v in np.flatnonzero(dense):
        picked = rng.choice(n - 1, size=deg[v], replace=False)
        cols[indptr[v] : indptr[v + 1]] = _skip_self(picked, v)

    # canonical order inside each row; owner is already sorted
    keys = owner * n + cols
    keys.sort()
    cols = keys - owner * n

    if config.hidden_ids is not None:
        hidden = np.asarray(config.hidden_ids, dtype=np.int64)
    elif config.placement == "uniform":
        hidden = rng.choice(n, size=config.h, replace=False)
    else:
        hidden = np.arange(config.h)
    return Instance(n, indptr, cols, hidden, validate=False)


# -- adversarial constructions ---------------------------------------------


def build_adversarial_pair(k: int) -> tuple[Instance, Instance]:
    """Two instances on one network whose full ARD coincide.

    Nodes ``0..k-1`` form a clique, node ``k + i`` is a pendant of clique node
    ``i`` and node ``2k`` is a hub adjacent to every clique node. The first
    instance hides the hub (``rho = 1/(2k+1)``), the second hides all pendants
    (``rho = k/(2k+1)``).
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    hub = 2 * k
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(i, k + i) for i in range(k)]
    edges += [(i, hub) for i in range(k)]
    n = 2 * k + 1
    net = Instance.from_undirected_edges(n, edges)
    return net.with_hidden([hub]), net.with_hidden(range(k, 2 * k))


def build_star_instance(n: int, variant: str = "hub_hidden") -> Instance:
    """Star with centre 0 and leaves ``1..n-1``.

    ``variant`` is ``"hub_hidden"`` (only the centre is hidden) or
    ``"leaves_hidden"`` (everyone but the centre).
    """
    if n < 2:
        raise ValueError(f"a star needs n >= 2, got {n}")
    edges = [(0, v) for v in range(1, n)]
    if variant == "hub_hidden":
        hidden = [0]
    elif variant == "leaves_hidden":
        hidden = range(1, n)
    else:
        raise ValueError(f"unknown star variant {variant!r}")
    return Instance.from_undirected_edges(n, edges, hidden)


def build_clique_pendant(n: int) -> Instance:
    """Clique on ``n/2`` nodes, one pendant per clique node, pendants hidden.

    Unlike :func:`build_adversarial_pair` there is no hub.
    """
    if n < 4 or n % 2:
        raise ValueError(f"n must be even and at least 4, got {n}")
    k = n // 2
    edges = [(i, j) for i in range(k) for j in range(i + 1, k)]
    edges += [(i, k + i) for i in range(k)]
    return Instance.from_undirected_edges(n, edges, range(k, n))


def symmetrize(instance: Instance) -> Instance:
    """Bidirectional closure of a directed instance (same hidden set)."""
    src = np.concatenate([instance.indices, instance.owners])
    dst = np.concatenate([instance.owners, instance.indices])
    keys = np.unique(src * instance.n + dst)
    return Instance.from_directed_edges(
        instance.n, keys // instance.n, keys % instance.n, instance.hidden_mask
    )


# -- serialisation -----------------------------------------------------------


def write_instance(instance: Instance, edges_path, meta_path=None) -> None:
    """Write ``u v`` lines (``u`` is an in-neighbour of ``v``) plus a JSON sidecar."""
    edges_path = Path(edges_path)
    meta_path = Path(meta_path) if meta_path else edges_path.with_suffix(".json")
    pairs = np.column_stack([instance.indices, instance.owners])
    np.savetxt(edges_path, pairs, fmt="%d", delimiter=" ")
    meta = {
        "n": instance.n,
        "hidden": instance.hidden.tolist(),
        "bidirectional": instance.bidirectional,
    }
    meta_path.write_text(json.dumps(meta), encoding="utf-8")


def read_instance(edges_path, meta_path=None) -> Instance:
    edges_path = Path(edges_path)
    meta_path = Path(meta_path) if meta_path else edges_path.with_suffix(".json")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    src, dst = [], []
    with open(edges_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"{edges_path}:{lineno}: expected 'u v', got {line.strip()!r}")
            src.append(int(parts[0]))
            dst.append(int(parts[1]))
    inst = Instance.from_directed_edges(meta["n"], src, dst, meta["hidden"])
    if inst.bidirectional != bool(meta.get("bidirectional", inst.bidirectional)):
        raise ValueError(f"{meta_path}: bidirectional flag disagrees with the edge list")
    return inst
