"""Monte-Carlo harness: error distributions, empirical tails and bound curves.

A run generates ``instances`` random networks, draws ``samples`` uniform
sample sets of every size in the grid on each network and records the MoR
and RoS estimates with their combined errors. The same network is reused
across the sample-size grid. Every random stream is derived from the master
seed and the trial coordinates, so serial and parallel runs agree exactly.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .bounds import er_ros_bound, mor_bound, ros_bound_pmf, sf_ros_bound
from .core import DegreeDistribution, DiscretePmf, Instance, combined_error_array
from .graphgen import (
    GeneratorConfig,
    degree_dist_er_truncated,
    degree_dist_explicit,
    degree_dist_scale_free,
    generate,
    read_instance,
)

__all__ = [
    "ExperimentConfig",
    "MinSizeResult",
    "TrialResults",
    "bound_curves",
    "boxplot_stats",
    "five_number",
    "min_sample_for_target",
    "run_experiment",
    "tail_from_errors",
    "tail_probability",
    "write_outputs",
]

TOPOLOGIES = ("er", "sf", "explicit", "instance")
ESTIMATORS = ("MoR", "RoS")
BOUND_FAMILIES = ("mor", "ros_pmf", "er_ros", "sf_ros")
# which estimator each bound family speaks about
FAMILY_ESTIMATOR = {"mor": "MoR", "ros_pmf": "RoS", "er_ros": "RoS", "sf_ros": "RoS"}

# spawn-key tags that keep the random streams apart
_GRAPH, _SAMPLE, _RS = 0, 1, 2


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of a run.

    ``topology`` is ``"er"`` (truncated Erdős–Rényi with mean degree
    ``mean_degree``), ``"sf"`` (power law with exponent ``gamma``),
    ``"explicit"`` (``pmf``) or ``"instance"`` (a fixed network read from
    ``instance_path``, or an ingested dataset given by ``edges_path``,
    ``genres_path`` and ``genre``).
    """

    topology: str = "er"
    n: int = 100_000
    mean_degree: float = 30.0
    gamma: float = 2.5
    pmf: Mapping[int, float] | None = None
    rho: float = 0.05
    instance_path: str | None = None
    edges_path: str | None = None
    genres_path: str | None = None
    genre: str | None = None
    sample_sizes: tuple[int, ...] = (100, 1000, 10_000)
    betas: tuple[float, ...] = (1.05,)
    instances: int = 100
    samples: int = 200
    seed: int = 0
    estimators: tuple[str, ...] = ESTIMATORS
    bounds: tuple[str, ...] = ("mor", "ros_pmf")
    rs_realizations: int = 10_000
    workers: int = 1

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        for name in ("sample_sizes", "betas", "estimators", "bounds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.sample_sizes or not self.betas:
            raise ValueError("sample-size and beta grids must be nonempty")
        if min(self.instances, self.samples, self.workers) < 1:
            raise ValueError("instances, samples and workers must be at least 1")
        if self.rs_realizations < 0:
            raise ValueError("rs_realizations must be nonnegative")
        if any(b <= 1 for b in self.betas):
            raise ValueError("every beta must exceed 1")
        if bad := set(self.estimators) - set(ESTIMATORS):
            raise ValueError(f"unknown estimators {sorted(bad)}")
        if bad := set(self.bounds) - set(BOUND_FAMILIES):
            raise ValueError(f"unknown bound families {sorted(bad)}")
        if self.topology != "instance":
            if self.n < 2:
                raise ValueError("n must be at least 2")
            if not 0 <= self.rho <= 1:
                raise ValueError("rho must lie in [0, 1]")
            if any(not 1 <= m <= self.n for m in self.sample_sizes):
                raise ValueError(f"sample sizes must lie in 1..{self.n}")
        if self.topology == "explicit" and not self.pmf:
            raise ValueError("explicit topology needs a pmf")
        if self.topology == "er" and not 0 < self.mean_degree < self.n - 1:
            raise ValueError("mean_degree must lie in (0, n-1)")
        if self.topology == "instance" and not (self.instance_path or self.edges_path):
            raise ValueError("instance topology needs instance_path or edges_path")
        if "er_ros" in self.bounds and self.topology != "er":
            raise ValueError("the er_ros bound needs the er topology")
        if "sf_ros" in self.bounds and self.topology != "sf":
            raise ValueError("the sf_ros bound needs the sf topology")

    @property
    def p(self) -> float:
        return self.mean_degree / (self.n - 1)

    @property
    def h(self) -> int:
        return int(round(self.rho * self.n))

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["pmf"] is not None:
            d["pmf"] = {str(k): float(v) for k, v in sorted(d["pmf"].items())}
        d.pop("workers")  # execution detail, not part of the experiment
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def degree_distribution(self) -> DegreeDistribution:
        if self.topology == "er":
            return degree_dist_er_truncated(self.n, self.p)
        if self.topology == "sf":
            return degree_dist_scale_free(self.n, self.gamma)
        if self.topology == "explicit":
            return degree_dist_explicit(self.n, self.pmf)
        raise ValueError("a fixed instance has no degree distribution")

    @classmethod
    def from_file(cls, path, overrides: Mapping | None = None, defaults: Mapping | None = None) -> "ExperimentConfig":
        """Read the ``[experiment]`` section of an INI file.

        Precedence is ``overrides`` over the file over ``defaults``.
        """
        parser = configparser.ConfigParser()
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
        if not parser.has_section("experiment"):
            raise ValueError(f"{path}: missing [experiment] section")
        raw = dict(defaults or {})
        raw.update(parser.items("experiment"))
        raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "ExperimentConfig":
        fields = {f.name: f for f in dataclasses.fields(cls)}
        kwargs = {}
        for key, value in raw.items():
            if key not in fields:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, value)
        return cls(**kwargs)


_INT_KEYS = {"n", "instances", "samples", "seed", "rs_realizations", "workers"}
_FLOAT_KEYS = {"mean_degree", "gamma", "rho"}


def _split(value) -> list[str]:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return list(value)


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    if key in _INT_KEYS:
        return int(float(value))
    if key in _FLOAT_KEYS:
        return float(value)
    if key == "sample_sizes":
        return tuple(int(float(v)) for v in _split(value))
    if key == "betas":
        return tuple(float(v) for v in _split(value))
    if key in ("estimators", "bounds"):
        return tuple(_split(value))
    if key == "pmf":
        # "1:0.5, 2:0.5"
        out = {}
        for item in _split(value):
            k, _, p = item.partition(":")
            out[int(k)] = float(p)
        return out
    return value or None


# -- running -----------------------------------------------------------------


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _fixed_instance(config: ExperimentConfig) -> Instance:
    if config.instance_path:
        return read_instance(config.instance_path)
    from .ingest import build_instance, load_edges, load_genres

    graph = load_edges(config.edges_path)
    hidden = ()
    if config.genre is not None:
        if not config.genres_path:
            raise ValueError("a genre needs genres_path")
        index = load_genres(config.genres_path, graph.n)
        if config.genre not in index:
            raise ValueError(f"genre {config.genre!r} not found")
        hidden = sorted(index[config.genre])
    return build_instance(graph, hidden)


def _make_instance(config: ExperimentConfig, i: int, degrees, fixed) -> Instance:
    if fixed is not None:
        return fixed
    seed = int(np.random.SeedSequence(config.seed, spawn_key=(_GRAPH, i)).generate_state(1, np.uint64)[0])
    return generate(GeneratorConfig(config.n, degrees, h=config.h, seed=seed))


def _run_instance(config: ExperimentConfig, i: int, degrees, fixed):
    """All trials on instance ``i``: estimate arrays of shape (grid, samples)."""
    try:
        inst = _make_instance(config, i, degrees, fixed)
    except ValueError as exc:
        raise ValueError(f"instance {i}: {exc}") from exc
    deg = inst.in_degree
    hid = inst.hidden_in_count
    grid = len(config.sample_sizes)
    mor = np.empty((grid, config.samples))
    ros = np.empty((grid, config.samples))
    rs = np.empty((grid, config.samples), dtype=np.int64)
    shares = np.array_split(np.arange(config.rs_realizations), config.instances)[i].size
    extra_rs = []
    for g, m in enumerate(config.sample_sizes):
        if m > inst.n:
            raise ValueError(f"sample size {m} exceeds n = {inst.n}")
        for j in range(config.samples):
            nodes = _rng(config.seed, _SAMPLE, i, g, j).choice(inst.n, size=m, replace=False)
            R = deg[nodes]
            C = hid[nodes]
            keep = R > 0  # isolated respondents are dropped
            if not keep.any():
                raise ValueError(f"instance {i}, |S|={m}: every respondent has in-degree 0")
            R, C = R[keep], C[keep]
            mor[g, j] = np.mean(C / R)
            rs[g, j] = R.sum()
            ros[g, j] = C.sum() / rs[g, j]
        rng = _rng(config.seed, _RS, i, g)
        extra_rs.append(
            np.array([deg[rng.choice(inst.n, size=m, replace=False)].sum() for _ in range(shares)], dtype=np.int64)
        )
    return inst.h, inst.n, mor, ros, rs, extra_rs


@dataclass
class TrialResults:
    """Estimates and errors indexed as ``[grid point, instance, sample]``."""

    config: ExperimentConfig
    rho: float
    estimates: dict[str, np.ndarray]
    errors: dict[str, np.ndarray]
    rs_trials: np.ndarray
    rs_realizations: list[np.ndarray] = field(default_factory=list)
    lineage: dict = field(default_factory=dict)

    @property
    def sample_sizes(self) -> tuple[int, ...]:
        return self.config.sample_sizes

    def __len__(self) -> int:
        return int(np.prod(self.rs_trials.shape))

    def rows(self):
        """One row per trial: (instance, sample, S, estimate and error per estimator)."""
        grid, ni, ns = self.rs_trials.shape
        for g in range(grid):
            for i in range(ni):
                for j in range(ns):
                    row = {"instance": i, "sample": j, "S": self.sample_sizes[g]}
                    for e in self.config.estimators:
                        row[f"estimate_{e}"] = float(self.estimates[e][g, i, j])
                        row[f"error_{e}"] = float(self.errors[e][g, i, j])
                    yield row

    def rs_pmf(self, g: int) -> DiscretePmf:
        """Empirical law of the total sampled in-degree at grid point ``g``."""
        pool = self.rs_realizations[g] if self.rs_realizations and self.rs_realizations[g].size else self.rs_trials[g].ravel()
        return DiscretePmf.from_samples(pool)


def run_experiment(config: ExperimentConfig) -> TrialResults:
    fixed = _fixed_instance(config) if config.topology == "instance" else None
    degrees = None if fixed is not None else config.degree_distribution()
    if config.workers > 1 and config.instances > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_instance, config, i, degrees, fixed) for i in range(config.instances)]
            parts = [f.result() for f in futures]
    else:
        parts = [_run_instance(config, i, degrees, fixed) for i in range(config.instances)]

    hs = {(h, n) for h, n, *_ in parts}
    if len(hs) != 1:
        raise ValueError("instances disagree on h or n")
    h, n = hs.pop()
    rho = h / n
    mor = np.stack([p[2] for p in parts], axis=1)
    ros = np.stack([p[3] for p in parts], axis=1)
    rs = np.stack([p[4] for p in parts], axis=1)
    extra = [np.concatenate([p[5][g] for p in parts]) for g in range(len(config.sample_sizes))]
    estimates = {"MoR": mor, "RoS": ros}
    estimates = {e: estimates[e] for e in config.estimators}
    errors = {e: combined_error_array(v, rho) for e, v in estimates.items()}
    lineage = {
        "master_seed": config.seed,
        "graph_stream": [_GRAPH, "instance"],
        "sample_stream": [_SAMPLE, "instance", "grid", "sample"],
        "rs_stream": [_RS, "instance", "grid"],
        "config_hash": config.config_hash(),
    }
    return TrialResults(config, rho, estimates, errors, rs, extra, lineage)


# -- summaries ------------------------------------------------------------------


@dataclass(frozen=True)
class TailRow:
    S: int
    beta: float
    estimator: str
    p_emp: float
    se: float
    count: int
    empty: bool = False


def tail_from_errors(errors, beta: float) -> tuple[float, float]:
    """Fraction of ``errors`` above ``beta`` and its binomial standard error."""
    e = np.asarray(errors, dtype=float).ravel()
    if e.size == 0:
        warnings.warn("empty grid point; tail probability is undefined", RuntimeWarning, stacklevel=2)
        return math.nan, math.nan
    p = float(np.mean(e > beta))
    return p, math.sqrt(p * (1 - p) / e.size)


def tail_probability(results: TrialResults, beta: float, estimator: str = "MoR") -> list[TailRow]:
    if estimator not in results.errors:
        raise ValueError(f"estimator {estimator!r} was not run")
    rows = []
    for g, m in enumerate(results.sample_sizes):
        e = results.errors[estimator][g]
        p, se = tail_from_errors(e, beta)
        rows.append(TailRow(m, beta, estimator, p, se, e.size, e.size == 0))
    return rows


def _bound_result(family: str, results: TrialResults, g: int, beta: float):
    cfg = results.config
    m = cfg.sample_sizes[g]
    rho = results.rho
    if family == "mor":
        return mor_bound(beta, m, rho)
    if family == "ros_pmf":
        return ros_bound_pmf(beta, rho, results.rs_pmf(g))
    if family == "er_ros":
        return er_ros_bound(beta, rho, m, cfg.n, cfg.p)
    if family == "sf_ros":
        return sf_ros_bound(beta, rho, m, cfg.n, cfg.gamma)
    raise ValueError(f"unknown bound family {family!r}")


def _bound_value(family: str, results: TrialResults, g: int, beta: float) -> float:
    if results.rho == 0:
        return math.nan  # every bound is vacuous without hidden nodes
    return _bound_result(family, results, g, beta).clamped


@dataclass(frozen=True)
class BoundRow:
    S: int
    beta: float
    estimator: str
    p_emp: float
    se: float
    bound_family: str
    bound_clamped: float

    @property
    def dominated(self) -> bool:
        """Empirical tail within three standard errors of the bound."""
        return self.p_emp <= self.bound_clamped + 3 * self.se


def bound_curves(results: TrialResults, betas: Sequence[float] | None = None, families=None) -> list[BoundRow]:
    """Empirical tail next to each requested bound at every grid point."""
    betas = results.config.betas if betas is None else betas
    families = results.config.bounds if families is None else families
    rows = []
    for beta in betas:
        for fam in families:
            est = FAMILY_ESTIMATOR[fam]
            if est not in results.errors:
                continue
            for g, tail in enumerate(tail_probability(results, beta, est)):
                rows.append(
                    BoundRow(tail.S, beta, est, tail.p_emp, tail.se, fam, _bound_value(fam, results, g, beta))
                )
    return rows


def five_number(values) -> tuple[float, float, float, float, float]:
    """Min, quartiles (linear interpolation) and max."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("no values")
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear")
    return tuple(float(x) for x in q)


def boxplot_stats(results: TrialResults) -> list[dict]:
    rows = []
    for est, err in results.errors.items():
        for g, m in enumerate(results.sample_sizes):
            lo, q1, med, q3, hi = five_number(err[g])
            rows.append(
                {"S": m, "estimator": est, "min": lo, "q1": q1, "median": med, "q3": q3, "max": hi, "mean": float(err[g].mean())}
            )
    return rows


# -- minimal sample size -----------------------------------------------------------


@dataclass(frozen=True)
class MinSizeResult:
    source: str
    beta: float
    target: float
    m: int | None
    largest_tried: int
    noisy: bool = False

    @property
    def found(self) -> bool:
        return self.m is not None


def _bound_at(source: str, config: ExperimentConfig, rho: float, beta: float, m: int) -> float:
    if source == "mor":
        return mor_bound(beta, m, rho).raw
    if source == "er_ros":
        return er_ros_bound(beta, rho, m, config.n, config.p).raw
    if source == "sf_ros":
        return sf_ros_bound(beta, rho, m, config.n, config.gamma).raw
    raise ValueError(f"source {source!r} has no closed form in m; use 'empirical' or one of mor, er_ros, sf_ros")


def min_sample_for_target(
    config: ExperimentConfig,
    beta: float,
    target_prob: float,
    source: str = "mor",
    results: TrialResults | None = None,
    estimator: str = "MoR",
    grid: Sequence[int] | None = None,
) -> MinSizeResult:
    """Smallest sample size whose tail (empirical or bound) is at most ``target_prob``.

    Bound sources scan ``grid`` (default: the config grid) and then bisect on
    the integers below the first crossing, which is exact because the bounds
    decrease in ``m``. The empirical source can only report grid points; it is
    flagged ``noisy`` when the tail rises again after the first crossing.
    """
    if not 0 < target_prob < 1:
        raise ValueError("target_prob must lie in (0, 1)")
    if source == "empirical":
        if results is None:
            raise ValueError("the empirical source needs trial results")
        tails = [t.p_emp for t in tail_probability(results, beta, estimator)]
        sizes = results.sample_sizes
        hits = [k for k, p in enumerate(tails) if p <= target_prob]
        if not hits:
            return MinSizeResult(f"empirical:{estimator}", beta, target_prob, None, max(sizes))
        first = hits[0]
        noisy = any(p > target_prob for p in tails[first + 1 :])
        return MinSizeResult(f"empirical:{estimator}", beta, target_prob, sizes[first], sizes[first], noisy)

    rho = config.h / config.n
    if rho == 0:
        raise ValueError("bounds are undefined for rho = 0")
    sizes = sorted(grid if grid is not None else config.sample_sizes)
    prev = 0
    for m in sizes:
        if _bound_at(source, config, rho, beta, m) <= target_prob:
            lo, hi = prev, m  # bound(lo) > target >= bound(hi)
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if _bound_at(source, config, rho, beta, mid) <= target_prob:
                    hi = mid
                else:
                    lo = mid
            return MinSizeResult(source, beta, target_prob, hi, m)
        prev = m
    return MinSizeResult(source, beta, target_prob, None, sizes[-1])


# -- serialisation ---------------------------------------------------------------


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])


def write_outputs(results: TrialResults, outdir, target_prob: float = 0.05) -> dict[str, Path]:
    """Write ``trials.csv``, ``tails.csv``, ``boxplot.csv``, ``minsize.csv`` and ``bounds.csv``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = results.config
    h = cfg.config_hash()
    paths = {name: outdir / f"{name}.csv" for name in ("trials", "tails", "boxplot", "minsize", "bounds")}

    def trial_rows():
        for row in results.rows():
            for e in cfg.estimators:
                yield h, row["instance"], row["sample"], row["S"], e, row[f"estimate_{e}"], row[f"error_{e}"]

    _write_csv(paths["trials"], ["config_hash", "instance", "sample", "S", "estimator", "estimate", "error"], trial_rows())

    tails = []
    for beta in cfg.betas:
        for e in cfg.estimators:
            for t in tail_probability(results, beta, e):
                tails.append((t.S, beta, e, t.p_emp, t.se, "none", math.nan))
    tails += [(b.S, b.beta, b.estimator, b.p_emp, b.se, b.bound_family, b.bound_clamped) for b in bound_curves(results)]
    _write_csv(paths["tails"], ["S", "beta", "estimator", "p_emp", "se", "bound_family", "bound_clamped"], tails)

    box = boxplot_stats(results)
    keys = ["S", "estimator", "min", "q1", "median", "q3", "max", "mean"]
    _write_csv(paths["boxplot"], keys, ([r[k] for k in keys] for r in box))

    mins = []
    for beta in cfg.betas:
        for e in cfg.estimators:
            mins.append(min_sample_for_target(cfg, beta, target_prob, "empirical", results, e))
        if cfg.topology != "instance":
            for fam in cfg.bounds:
                if fam != "ros_pmf":
                    mins.append(min_sample_for_target(cfg, beta, target_prob, fam))
    _write_csv(
        paths["minsize"],
        ["source", "beta", "target", "m", "found", "largest_tried", "noisy"],
        ((r.source, r.beta, r.target, r.m if r.found else "", r.found, r.largest_tried, r.noisy) for r in mins),
    )

    curves = []
    if results.rho > 0:
        for beta in cfg.betas:
            for fam in cfg.bounds:
                for g, m in enumerate(cfg.sample_sizes):
                    b = _bound_result(fam, results, g, beta)
                    curves.append((m, beta, results.rho, b.raw, b.clamped, fam))
    _write_csv(paths["bounds"], ["m", "beta", "rho", "bound_raw", "bound_clamped", "family"], curves)
    return paths
