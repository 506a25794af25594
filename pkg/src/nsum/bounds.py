"""Closed-form tail bounds and sample-size formulas.

Everything is evaluated in log-space. Bounds are returned both raw (they can
exceed 1 for small samples) and clamped to ``[0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .core import DegreeDistribution, DiscretePmf

__all__ = [
    "BoundResult",
    "adversarial_lower_bound",
    "chernoff_lower",
    "chernoff_two_sided",
    "er_ros_bound",
    "f_bound",
    "f_exponents",
    "fullsampling_worstcase",
    "mor_bound",
    "mor_er_bound",
    "ros_bound_pmf",
    "ros_bound_simple",
    "rs_pmf_convolution",
    "sample_size",
    "sample_size_real",
    "sf_mean_degree",
    "sf_ros_bound",
]

_FFT_FLOOR = 1e-15
DELTA_GRID = np.round(np.arange(1, 1000) * 1e-3, 3)


@dataclass(frozen=True)
class BoundResult:
    raw: float
    inputs: dict = field(default_factory=dict)

    @property
    def clamped(self) -> float:
        return min(1.0, self.raw)

    def as_dict(self) -> dict:
        return {"raw": self.raw, "clamped": self.clamped, "inputs": self.inputs}


def _check_beta(beta) -> None:
    if np.any(np.asarray(beta) <= 1):
        raise ValueError(f"beta must exceed 1, got {beta}")


def f_exponents(beta):
    """Per-unit log coefficients of the two terms of F; both negative for beta > 1."""
    _check_beta(beta)
    beta = np.asarray(beta, dtype=float)
    lb = np.log(beta)
    return (beta - 1) - beta * lb, (1 / beta - 1) + lb / beta


def f_bound(beta, y):
    """``F(beta, y) = (e^(b-1)/b^b)^y + (e^(1/b-1)/b^(-1/b))^y``.

    Broadcasts over numpy arrays; scalars in give a float back.
    """
    up, low = f_exponents(beta)
    y = np.asarray(y, dtype=float)
    if np.any(y < 0):
        raise ValueError("y must be nonnegative")
    out = np.exp(y * up) + np.exp(y * low)
    return float(out) if out.ndim == 0 else out


def chernoff_two_sided(beta: float, mu: float) -> BoundResult:
    """P[Z outside [mu/beta, beta*mu]] for negatively cylinder-dependent [0,1] summands."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    return BoundResult(f_bound(beta, mu), {"beta": beta, "mu": mu})


def _lower_log(delta, mu):
    delta = np.asarray(delta, dtype=float)
    return mu * (-delta - (1 - delta) * np.log1p(-delta))


def chernoff_lower(delta: float, mu: float) -> BoundResult:
    """P[Z <= (1-delta) mu] <= (e^-delta / (1-delta)^(1-delta))^mu."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    return BoundResult(float(np.exp(_lower_log(delta, mu))), {"delta": delta, "mu": mu})


def _check_rho(rho: float) -> None:
    if not 0 < rho <= 1:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")


def mor_bound(beta: float, m: int, rho: float) -> BoundResult:
    """Tail bound on the MoR error: P[E > beta] <= F(beta, m rho)."""
    _check_beta(beta)
    _check_rho(rho)
    if m < 1:
        raise ValueError("m must be at least 1")
    return BoundResult(f_bound(beta, m * rho), {"beta": beta, "m": m, "rho": rho, "y": m * rho})


def ros_bound_simple(beta: float, m: int, rho: float) -> BoundResult:
    """RoS tail bound using only ``R_S >= m``; same expression as :func:`mor_bound`."""
    return mor_bound(beta, m, rho)


def mor_er_bound(beta: float, m: int, rho: float) -> BoundResult:
    """MoR bound on truncated Erdős–Rényi networks (no zero in-degrees)."""
    return mor_bound(beta, m, rho)


def ros_bound_pmf(beta: float, rho: float, rs_pmf) -> BoundResult:
    """``sum_R F(beta, R rho) P[R_S = R]`` for a given law of ``R_S``."""
    _check_beta(beta)
    _check_rho(rho)
    if not isinstance(rs_pmf, DiscretePmf):
        rs_pmf = DiscretePmf.from_mapping(rs_pmf)
    if abs(rs_pmf.total - 1) > 1e-9:
        raise ValueError(f"R_S pmf sums to {rs_pmf.total}, not 1")
    raw = float(np.dot(f_bound(beta, rs_pmf.values * rho), rs_pmf.probs))
    return BoundResult(raw, {"beta": beta, "rho": rho, "mean_rs": rs_pmf.mean()})


def rs_pmf_convolution(degrees: DegreeDistribution, m: int, max_states: int = 10**7) -> DiscretePmf:
    """Exact law of the sum of ``m`` i.i.d. in-degrees (repeated squaring of the pmf)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if m * (degrees.n - 1) + 1 > max_states:
        raise ValueError(f"m * (n - 1) = {m * (degrees.n - 1)} exceeds the state cap {max_states}")

    def conv(a, b):
        if min(a.size, b.size) <= 64:
            return np.convolve(a, b)
        out = signal.fftconvolve(a, b)
        # entries below the FFT round-off floor are noise, not probability
        out[out < _FFT_FLOOR] = 0.0
        return out

    base = np.asarray(degrees.pmf, dtype=float)
    result = np.array([1.0])
    power = base
    k = m
    while k:
        if k & 1:
            result = conv(result, power)
        k >>= 1
        if k:
            power = conv(power, power)
    result /= result.sum()
    keep = np.flatnonzero(result > 0)
    return DiscretePmf(keep, result[keep])


def sample_size_real(n: int, rho: float, beta: float, alpha: float) -> float:
    """Unrounded sufficient sample size for P[E > beta] <= n^-alpha."""
    _check_beta(beta)
    _check_rho(rho)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")
    # the 1/beta-side exponent is the smaller of the two, so it governs
    denom = rho * (1 - (math.log(beta) + 1) / beta)
    return (math.log(2) + alpha * math.log(n)) / denom


def sample_size(n: int, rho: float, beta: float, alpha: float) -> int:
    return math.ceil(sample_size_real(n, rho, beta, alpha))


def _two_term(beta, rho, mu, delta) -> tuple[float, float]:
    """Minimise/evaluate chernoff_lower(delta, mu) + F(beta, (1-delta) mu rho)."""
    if isinstance(delta, str):
        if delta != "minimize":
            raise ValueError(f"unknown delta policy {delta!r}")
        grid = DELTA_GRID
    else:
        if not 0 < delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        grid = np.array([float(delta)])
    vals = np.exp(_lower_log(grid, mu)) + f_bound(beta, (1 - grid) * mu * rho)
    i = int(np.argmin(vals))
    return float(vals[i]), float(grid[i])


def er_ros_bound(beta: float, rho: float, m: int, n: int, p: float, delta="minimize") -> BoundResult:
    """RoS bound on truncated Erdős–Rényi networks with ``mu = m p (n-1)``."""
    _check_beta(beta)
    _check_rho(rho)
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    mu = m * p * (n - 1)
    raw, d = _two_term(beta, rho, mu, delta)
    return BoundResult(raw, {"beta": beta, "rho": rho, "m": m, "mu": mu, "delta": d})


def sf_mean_degree(n: int, gamma: float, mode: str = "paper_approx") -> float:
    """Mean in-degree of the scale-free law.

    ``paper_approx`` is the continuous power-law approximation on
    ``[1, n-1]``; ``exact_pmf_mean`` sums the discrete pmf.
    """
    if gamma <= 2:
        raise ValueError(f"gamma must exceed 2, got {gamma}")
    if mode == "paper_approx":
        N = n - 1
        return (1 - gamma) / (2 - gamma) * (1 - N ** (2 - gamma)) / (1 - N ** (1 - gamma))
    if mode == "exact_pmf_mean":
        k = np.arange(1, n, dtype=float)
        w = k**-gamma
        return float(np.dot(k, w) / w.sum())
    raise ValueError(f"unknown mu mode {mode!r}")


def sf_ros_bound(
    beta: float,
    rho: float,
    m: int,
    n: int,
    gamma: float,
    delta="minimize",
    mu_mode: str = "paper_approx",
) -> BoundResult:
    """RoS bound on scale-free networks (``gamma > 2``)."""
    _check_beta(beta)
    _check_rho(rho)
    mu = m * sf_mean_degree(n, gamma, mu_mode)
    raw, d = _two_term(beta, rho, mu, delta)
    return BoundResult(
        raw, {"beta": beta, "rho": rho, "m": m, "mu": mu, "delta": d, "mu_mode": mu_mode}
    )


def adversarial_lower_bound(n: int) -> float:
    """Error every deterministic full-ARD method suffers on some instance of size ``n``."""
    if n < 3 or n % 2 == 0:
        raise ValueError(f"n must be odd and at least 3, got {n}")
    return math.sqrt((n - 1) / 2)


def fullsampling_worstcase(
    kind: str,
    delta_max: float,
    delta_min: float,
    r_min: float,
    r_max: float,
    r_mean: float,
) -> tuple[float, float]:
    """Upper bounds on ``(E+, E-)`` of MoR or RoS under full sampling.

    ``delta_*`` are out-degree extremes, ``r_*`` in-degree summaries.
    """
    if min(delta_max, delta_min, r_min, r_max, r_mean) <= 0:
        raise ValueError("degree summaries must be positive")
    if kind == "MoR":
        return delta_max / r_min, r_max / delta_min
    if kind == "RoS":
        return delta_max / r_mean, r_mean / delta_min
    raise ValueError(f"kind must be 'MoR' or 'RoS', got {kind!r}")
