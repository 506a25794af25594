"""Uniform sampling, ARD extraction and the MoR / RoS / FS prevalence estimators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import (
    ArdSet,
    DegenerateSampleError,
    DiscretePmf,
    Instance,
    PrevalenceEstimate,
    ZeroDegreeError,
)

__all__ = [
    "Sample",
    "draw_sample",
    "empirical_rs_pmf",
    "estimate_fs",
    "estimate_fs_instance",
    "estimate_mor",
    "estimate_ros",
    "extract_ard",
]

ZERO_DEGREE_POLICIES = ("reject", "drop")


@dataclass(frozen=True, eq=False)
class Sample:
    instance: Instance
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int64)
        if nodes.ndim != 1 or nodes.size == 0:
            raise ValueError("a sample needs at least one node")
        if nodes.min() < 0 or nodes.max() >= self.instance.n:
            raise ValueError("sample ids must lie in 0..n-1")
        if np.unique(nodes).size != nodes.size:
            raise ValueError("sample ids must be distinct")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def m(self) -> int:
        return int(self.nodes.size)


def draw_sample(instance: Instance, m: int, seed=None) -> Sample:
    """``m`` distinct nodes, uniform over all size-``m`` subsets."""
    if not 1 <= m <= instance.n:
        raise ValueError(f"sample size must lie in 1..{instance.n}, got {m}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if m == instance.n:
        return Sample(instance, np.arange(instance.n))
    return Sample(instance, np.sort(rng.choice(instance.n, size=m, replace=False)))


def extract_ard(instance: Instance, sample: Sample) -> ArdSet:
    """``(R_v, C_v)`` for every sampled node."""
    if sample.instance is not instance and sample.instance != instance:
        raise ValueError("sample was drawn from a different instance")
    v = sample.nodes
    return ArdSet(v, instance.in_degree[v], instance.hidden_in_count[v])


def _apply_policy(ard: ArdSet, zero_degree: str) -> tuple[np.ndarray, np.ndarray]:
    if zero_degree not in ZERO_DEGREE_POLICIES:
        raise ValueError(f"zero_degree must be one of {ZERO_DEGREE_POLICIES}")
    R, C = ard.R, ard.C
    zero = R == 0
    if zero.any():
        if zero_degree == "reject":
            raise ZeroDegreeError(
                f"respondent {int(ard.nodes[np.argmax(zero)])} has no in-neighbours"
            )
        R, C = R[~zero], C[~zero]
    return R, C


def estimate_mor(ard: ArdSet, zero_degree: str = "reject") -> PrevalenceEstimate:
    """Mean of the per-respondent ratios ``C_v / R_v``."""
    R, C = _apply_policy(ard, zero_degree)
    if R.size == 0:
        raise DegenerateSampleError("no respondent with a positive in-degree")
    # group by degree so the exact rational sum stays cheap
    degrees, inverse = np.unique(R, return_inverse=True)
    c_by_degree = np.bincount(inverse, weights=C, minlength=degrees.size).astype(np.int64)
    exact = sum((Fraction(int(c), int(r)) for r, c in zip(degrees, c_by_degree)), Fraction(0))
    exact /= R.size
    return PrevalenceEstimate(float(exact), "MoR", exact)


def estimate_ros(ard: ArdSet, zero_degree: str = "reject") -> PrevalenceEstimate:
    """Total hidden in-neighbours over total in-degree."""
    R, C = _apply_policy(ard, zero_degree)
    total_r = int(R.sum())
    if total_r == 0:
        raise DegenerateSampleError("sampled in-degrees sum to zero")
    exact = Fraction(int(C.sum()), total_r)
    return PrevalenceEstimate(float(exact), "RoS", exact)


def estimate_fs(ard_full: ArdSet, n: int, delta_min=None, delta_max=None) -> PrevalenceEstimate:
    """Full-sampling estimate ``C / (n * sqrt(max_out * min_out))``.

    Without explicit out-degree extremes, the in-degree extremes of the ARD
    are used; that substitution is only valid for bidirectional networks.
    """
    if ard_full.m != n or np.unique(ard_full.nodes).size != n:
        raise ValueError("FS needs the ARD of all n nodes")
    if delta_min is None:
        delta_min = int(ard_full.R.min())
    if delta_max is None:
        delta_max = int(ard_full.R.max())
    if delta_min <= 0:
        raise ValueError("minimum out-degree is zero (isolated node)")
    if delta_max < delta_min:
        raise ValueError("delta_max must be at least delta_min")
    total_c = int(ard_full.C.sum())
    return PrevalenceEstimate(total_c / (n * math.sqrt(delta_max * delta_min)), "FS")


def estimate_fs_instance(instance: Instance) -> PrevalenceEstimate:
    """FS on the full ARD of ``instance`` using its true out-degree extremes."""
    full = extract_ard(instance, Sample(instance, np.arange(instance.n)))
    out = instance.out_degree
    return estimate_fs(full, instance.n, int(out.min()), int(out.max()))


def empirical_rs_pmf(instance: Instance, m: int, trials: int = 10_000, seed=None) -> DiscretePmf:
    """Histogram of ``R_S`` (total sampled in-degree) over independent samples."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    deg = instance.in_degree
    if m == instance.n:
        return DiscretePmf.point_mass(int(deg.sum()))
    totals = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        totals[t] = deg[draw_sample(instance, m, rng).nodes].sum()
    return DiscretePmf.from_samples(totals)
