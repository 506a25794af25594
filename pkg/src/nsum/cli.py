"""Command-line entry point: ``nsum <subcommand> ...``.

Scalar answers are printed as JSON, tables as CSV. Exit status is 0 on
success, 1 on a usage error and 2 when the inputs are rejected.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bounds, estimators, graphgen, ingest, oracle, simulate
from .core import ArdSet, DiscretePmf, compute_errors

log = logging.getLogger("nsum")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _default_seed() -> int:
    raw = os.environ.get("NSUM_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"NSUM_SEED must be an integer, got {raw!r}") from None


def _default_threads() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # not available on every platform
        return os.cpu_count() or 1


def _pmf_arg(text: str) -> dict[int, float]:
    """``"1:0.5,2:0.5"`` -> ``{1: 0.5, 2: 0.5}``; fractions like ``1/3`` are accepted."""
    out = {}
    for item in text.split(","):
        k, sep, p = item.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected degree:probability, got {item!r}")
        try:
            out[int(k)] = float(Fraction(p.strip()))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad pmf entry {item!r}") from None
    return out


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(float(x)) for x in text.split(",") if x.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _delta_arg(text: str):
    return text if text == "minimize" else float(text)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _emit(args, payload) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    if getattr(args, "out", None):
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        log.info("wrote %s", args.out)
    else:
        print(text)


# -- subcommands -----------------------------------------------------------


def _degrees(args):
    if args.topology == "er":
        p = args.p if args.p is not None else args.mean_degree / (args.n - 1)
        return graphgen.degree_dist_er_truncated(args.n, p)
    if args.topology == "sf":
        return graphgen.degree_dist_scale_free(args.n, args.gamma)
    if args.pmf is None:
        raise ValueError("--pmf is required for the explicit topology")
    return graphgen.degree_dist_explicit(args.n, args.pmf)


def cmd_gen(args) -> int:
    h = args.h if args.h is not None else int(round(args.rho * args.n))
    cfg = graphgen.GeneratorConfig(args.n, _degrees(args), h=h, placement=args.placement, seed=args.seed)
    inst = graphgen.generate(cfg)
    if args.symmetrize:
        inst = graphgen.symmetrize(inst)
    summary = {
        "n": inst.n,
        "h": inst.h,
        "rho": inst.rho,
        "edges": inst.num_edges,
        "mean_in_degree": float(inst.in_degree.mean()),
        "bidirectional": inst.bidirectional,
        "seed": args.seed,
    }
    if args.out:
        graphgen.write_instance(inst, args.out)
        summary["edges_path"] = str(args.out)
        summary["meta_path"] = str(Path(args.out).with_suffix(".json"))
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return 0


def cmd_estimate(args) -> int:
    payload = {}
    if args.instance:
        inst = graphgen.read_instance(args.instance)
        m = args.m if args.m is not None else inst.n
        sample = estimators.draw_sample(inst, m, args.seed)
        ard = estimators.extract_ard(inst, sample)
        payload.update({"n": inst.n, "rho": inst.rho, "m": m, "seed": args.seed})
        rho = inst.prevalence
    else:
        ard = ArdSet.from_csv(args.ard)
        payload["m"] = ard.m
        rho = Fraction(args.rho).limit_denominator(10**9) if args.rho is not None else None
    for name in args.estimators:
        if name == "MoR":
            est = estimators.estimate_mor(ard, args.zero_degree)
        elif name == "RoS":
            est = estimators.estimate_ros(ard, args.zero_degree)
        elif name == "FS":
            if not args.instance:
                raise ValueError("FS needs --instance (true out-degrees)")
            if ard.m != inst.n:
                raise ValueError("FS needs the full sample (omit --m)")
            est = estimators.estimate_fs_instance(inst)
        else:
            raise ValueError(f"unknown estimator {name!r}")
        entry = {"estimate": est.value}
        if est.exact is not None:
            entry["exact"] = est.exact
        if rho is not None:
            err = compute_errors(est, rho)
            entry.update({"upper": err.upper, "lower": err.lower, "error": err.combined})
        payload[name] = entry
    _emit(args, payload)
    return 0


def cmd_bound(args) -> int:
    kind = args.bound
    if kind == "mor":
        res = bounds.mor_bound(args.beta, args.m, args.rho)
    elif kind == "ros":
        res = bounds.ros_bound_simple(args.beta, args.m, args.rho)
    elif kind == "ros-pmf":
        if args.rs_pmf is not None:
            pmf = DiscretePmf.from_mapping(args.rs_pmf)
        else:
            if args.n is None or args.m is None:
                raise ValueError("give --rs-pmf, or --n and --m with a degree topology")
            pmf = bounds.rs_pmf_convolution(_degrees(args), args.m)
        res = bounds.ros_bound_pmf(args.beta, args.rho, pmf)
    elif kind == "er-ros":
        p = args.p if args.p is not None else args.mean_degree / (args.n - 1)
        res = bounds.er_ros_bound(args.beta, args.rho, args.m, args.n, p, args.delta)
    elif kind == "sf-ros":
        res = bounds.sf_ros_bound(args.beta, args.rho, args.m, args.n, args.gamma, args.delta, args.mu_mode)
    elif kind == "chernoff":
        two = bounds.chernoff_two_sided(args.beta, args.mu)
        low = bounds.chernoff_lower(args.delta, args.mu)
        _emit(args, {"two_sided": two.as_dict(), "lower": low.as_dict()})
        return 0
    elif kind == "sample-size":
        _emit(
            args,
            {
                "m": bounds.sample_size(args.n, args.rho, args.beta, args.alpha),
                "m_real": bounds.sample_size_real(args.n, args.rho, args.beta, args.alpha),
                "inputs": {"n": args.n, "rho": args.rho, "beta": args.beta, "alpha": args.alpha},
            },
        )
        return 0
    elif kind == "worstcase":
        if args.instance:
            inst = graphgen.read_instance(args.instance)
            out, deg = inst.out_degree, inst.in_degree
            vals = dict(delta_max=out.max(), delta_min=out.min(), r_min=deg.min(), r_max=deg.max(), r_mean=deg.mean())
        else:
            vals = dict(
                delta_max=args.delta_max, delta_min=args.delta_min, r_min=args.r_min, r_max=args.r_max, r_mean=args.r_mean
            )
            if any(v is None for v in vals.values()):
                raise ValueError("give --instance or all of the degree summaries")
        vals = {k: float(v) for k, v in vals.items()}
        up, low = bounds.fullsampling_worstcase(args.kind, **vals)
        fs = math.sqrt(vals["delta_max"] / vals["delta_min"])
        _emit(args, {"kind": args.kind, "upper": up, "lower": low, "fs_guarantee": fs, "inputs": vals})
        return 0
    elif kind == "adversarial-lb":
        _emit(args, {"n": args.n, "lower_bound": bounds.adversarial_lower_bound(args.n)})
        return 0
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown bound {kind!r}")
    _emit(args, res.as_dict())
    return 0


_SWEEP_KEYS = (
    "topology",
    "n",
    "mean_degree",
    "gamma",
    "pmf",
    "rho",
    "instance_path",
    "edges_path",
    "genres_path",
    "genre",
    "sample_sizes",
    "betas",
    "instances",
    "samples",
    "seed",
    "estimators",
    "bounds",
    "rs_realizations",
)


def cmd_sweep(args) -> int:
    overrides = {k: getattr(args, k) for k in _SWEEP_KEYS}
    overrides["workers"] = args.threads
    if args.config:
        cfg = simulate.ExperimentConfig.from_file(args.config, overrides, {"seed": _default_seed()})
    else:
        if overrides["seed"] is None:
            overrides["seed"] = _default_seed()
        cfg = simulate.ExperimentConfig.from_mapping({k: v for k, v in overrides.items() if v is not None})
    log.info("config %s: %d instances x %d samples x %d sizes", cfg.config_hash(), cfg.instances, cfg.samples, len(cfg.sample_sizes))
    results = simulate.run_experiment(cfg)
    paths = simulate.write_outputs(results, args.out, args.target)
    print(json.dumps({"config_hash": cfg.config_hash(), **{k: str(v) for k, v in paths.items()}}, indent=2))
    return 0


def cmd_ingest(args) -> int:
    graph = ingest.load_edges(args.edges)
    payload = dict(ingest.graph_stats(graph))
    hidden = ()
    if args.genres:
        index = ingest.load_genres(args.genres, graph.n)
        aliases = ingest.load_aliases(args.aliases) if args.aliases else None
        payload["genres"] = len(index)
        if args.genre:
            hidden = ingest.resolve_genre(index, args.genre, aliases)
            payload["genre"] = args.genre
            payload["h"] = len(hidden)
            payload["rho"] = len(hidden) / graph.n
    elif args.genre:
        raise ValueError("--genre needs --genres")
    if args.out:
        inst = ingest.build_instance(graph, hidden)
        graphgen.write_instance(inst, args.out)
        payload["edges_path"] = str(args.out)
    print(json.dumps(_jsonable(payload), indent=2, sort_keys=True))
    return 0


def cmd_oracle(args) -> int:
    n_values = range(2, args.max_n + 1)
    rows = oracle.run_corpus(oracle.default_corpus(n_values), max_subset=args.max_subset)
    lines = ["model,check,result,detail"]
    for r in rows:
        lines.append(f'"{r.model.label()}",{r.check},{"pass" if r.passed else "FAIL"},{r.detail}')
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    failed = sum(not r.passed for r in rows)
    log.info("%d checks, %d failed", len(rows), failed)
    return 0 if failed == 0 else 2


def cmd_adversarial(args) -> int:
    i1, i2 = graphgen.build_adversarial_pair(args.k)
    m = i1.n if args.full_sample else args.m
    if m is None:
        raise ValueError("give --m or --full-sample")
    payload = {"k": args.k, "n": i1.n, "m": m}
    ards = []
    for name, inst in (("I1", i1), ("I2", i2)):
        sample = estimators.draw_sample(inst, m, args.seed)
        ard = estimators.extract_ard(inst, sample)
        ards.append(ard.multiset())
        entry = {"rho": inst.prevalence}
        for est in (estimators.estimate_mor(ard), estimators.estimate_ros(ard)):
            err = compute_errors(est, inst.prevalence)
            entry[est.method] = {"estimate": est.exact, "error": err.combined}
        payload[name] = entry
    payload["identical_ard"] = ards[0] == ards[1]
    payload["lower_bound"] = math.sqrt((i1.n - 1) / 2)
    _emit(args, payload)
    return 0


# -- parser ------------------------------------------------------------------


def _topology_args(p, default="er"):
    p.add_argument("--topology", choices=["er", "sf", "explicit"], default=default)
    p.add_argument("--n", type=int)
    p.add_argument("--mean-degree", type=float, default=30.0, help="mean degree for er (default 30)")
    p.add_argument("--p", type=float, help="edge probability for er; overrides --mean-degree")
    p.add_argument("--gamma", type=float, default=2.5)
    p.add_argument("--pmf", type=_pmf_arg, help="explicit degree pmf, e.g. 1:0.5,2:0.5")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nsum", description="Network scale-up estimators, bounds and simulations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a random instance")
    _topology_args(p)
    p.add_argument("--h", type=int)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--placement", choices=["first", "uniform"], default="first")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--symmetrize", action="store_true")
    p.add_argument("--out", help="edge list path; metadata goes next to it as .json")
    p.set_defaults(func=cmd_gen, needs_n=True)

    p = sub.add_parser("estimate", help="estimate prevalence from ARD")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="instance edge list (with .json sidecar)")
    src.add_argument("--ard", help="ARD CSV with header node,R,C")
    p.add_argument("--m", type=int, help="sample size (default: everyone)")
    p.add_argument("--rho", type=float, help="true prevalence, for errors when reading ARD")
    p.add_argument("--estimators", type=lambda s: s.split(","), default=["MoR", "RoS"])
    p.add_argument("--zero-degree", choices=estimators.ZERO_DEGREE_POLICIES, default="reject")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bound", help="evaluate a tail bound or sample size")
    bsub = p.add_subparsers(dest="bound", required=True, parser_class=_Parser)
    for name in ("mor", "ros"):
        q = bsub.add_parser(name)
        q.add_argument("--beta", type=float, required=True)
        q.add_argument("--m", type=int, required=True)
        q.add_argument("--rho", type=float, required=True)
        q.add_argument("--n", type=int, help="network size (informational)")
        q.add_argument("--out")
    q = bsub.add_parser("ros-pmf")
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--rho", type=float, required=True)
    q.add_argument("--m", type=int)
    q.add_argument("--rs-pmf", type=_pmf_arg, help="law of the total sampled degree, e.g. 10:0.5,12:0.5")
    _topology_args(q)
    q.add_argument("--out")
    for name in ("er-ros", "sf-ros"):
        q = bsub.add_parser(name)
        q.add_argument("--beta", type=float, required=True)
        q.add_argument("--rho", type=float, required=True)
        q.add_argument("--m", type=int, required=True)
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--delta", type=_delta_arg, default="minimize")
        if name == "er-ros":
            q.add_argument("--p", type=float)
            q.add_argument("--mean-degree", type=float, default=30.0)
        else:
            q.add_argument("--gamma", type=float, required=True)
            q.add_argument("--mu-mode", choices=["paper_approx", "exact_pmf_mean"], default="paper_approx")
        q.add_argument("--out")
    q = bsub.add_parser("chernoff")
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--mu", type=float, required=True)
    q.add_argument("--delta", type=float, default=0.2)
    q.add_argument("--out")
    q = bsub.add_parser("sample-size")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--rho", type=float, required=True)
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--alpha", type=float, default=0.5)
    q.add_argument("--out")
    q = bsub.add_parser("worstcase")
    q.add_argument("--kind", choices=["MoR", "RoS"], required=True)
    q.add_argument("--instance")
    for name in ("delta-max", "delta-min", "r-min", "r-max", "r-mean"):
        q.add_argument(f"--{name}", type=float)
    q.add_argument("--out")
    q = bsub.add_parser("adversarial-lb")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="run a Monte-Carlo experiment and write CSVs")
    p.add_argument("--config", help="INI file with an [experiment] section")
    p.add_argument("--topology", choices=simulate.TOPOLOGIES)
    p.add_argument("--n", type=int)
    p.add_argument("--mean-degree", dest="mean_degree", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--pmf", type=_pmf_arg)
    p.add_argument("--rho", type=float)
    p.add_argument("--instance-path", dest="instance_path")
    p.add_argument("--edges-path", dest="edges_path")
    p.add_argument("--genres-path", dest="genres_path")
    p.add_argument("--genre")
    p.add_argument("--sample-sizes", dest="sample_sizes", type=_int_list)
    p.add_argument("--betas", type=_float_list)
    p.add_argument("--instances", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--estimators", type=lambda s: tuple(s.split(",")))
    p.add_argument("--bounds", type=lambda s: tuple(s.split(",")))
    p.add_argument("--rs-realizations", dest="rs_realizations", type=int)
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: available cores)")
    p.add_argument("--target", type=float, default=0.05, help="tail target for minsize.csv")
    p.add_argument("--out", default="sweep_out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ingest", help="load a friendship dataset")
    p.add_argument("--edges", required=True)
    p.add_argument("--genres")
    p.add_argument("--genre")
    p.add_argument("--aliases", help="JSON map of display label -> dataset genre")
    p.add_argument("--out", help="write the bidirectional instance here")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("oracle", help="exact checks of the random-network identities")
    p.add_argument("--corpus", choices=["default"], default="default")
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--max-subset", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("adversarial", help="run the estimators on the indistinguishable pair")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--full-sample", action="store_true")
    p.add_argument("--m", type=int)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_adversarial)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(levelname)s %(message)s",
            stream=sys.stderr,
        )
        if getattr(args, "seed", "absent") is None and args.command != "sweep":
            args.seed = _default_seed()
        if getattr(args, "needs_n", False) and args.n is None:
            raise UsageError("nsum gen: error: --n is required")
        if args.command == "sweep" and args.threads is None:
            args.threads = _default_threads()
        return args.func(args)
    except SystemExit as exc:  # --help and friends
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"nsum: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
