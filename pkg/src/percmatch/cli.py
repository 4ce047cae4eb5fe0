"""Command-line front end.

Exit codes: 0 success, 1 usage or parameter error, 2 data error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from .analysis import RunMetrics, matchable_count
from .ddm import build_slice_plan, build_stage_plan, run_ddm
from .experiment import WORKERS_ENV, analyze, load_config, run_sweep
from .graph import (Graph, ObservedPair, ParameterError, WeightedGraphSpec, calibrate_w_bar,
                    generate_chung_lu, generate_gnp, sample_observed_pair)
from .io import DataError, load_graph, save_cache, save_edge_list
from .pgm import SeedError, SeedPolicy, classify_matches, run_pgm, select_seeds, write_matches_csv
from .powerlaw import EstimationError, estimate_power_law_exponent


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _save_graph(g: Graph, path) -> None:
    if str(path).endswith((".txt", ".edges", ".tsv")):
        save_edge_list(g, path)
    else:
        save_cache(g, path)


def _pair_paths(prefix):
    p = str(prefix)
    return Path(p + ".g1.pmg"), Path(p + ".g2.pmg"), Path(p + ".truth.csv"), Path(p + ".json")


def save_pair(pair: ObservedPair, prefix) -> None:
    p1, p2, pt, pj = _pair_paths(prefix)
    save_cache(pair.g1, p1)
    save_cache(pair.g2, p2)
    with open(pt, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["g1_id", "g2_id"])
        w.writerows(enumerate(pair.truth.tolist()))
    pj.write_text(json.dumps({"n": pair.n, "s": pair.s}) + "\n")


def load_pair(prefix) -> ObservedPair:
    p1, p2, pt, pj = _pair_paths(prefix)
    meta = json.loads(pj.read_text())
    truth = np.loadtxt(pt, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)[:, 1]
    return ObservedPair(load_graph(p1), load_graph(p2), truth, float(meta["s"]))


def _read_seeds(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    out = []
    for lineno, row in enumerate(rows[1:], 2):
        try:
            out.append((int(row[0]), int(row[1])))
        except (ValueError, IndexError):
            raise DataError(f"{path}:{lineno}: malformed seed row") from None
    return out


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def cmd_generate(args) -> None:
    if args.model == "gnp":
        g = generate_gnp(args.n, args.mean_degree, args.seed)
    elif args.model == "chung-lu":
        w_bar = args.w_bar if args.w_bar is not None else calibrate_w_bar(args.n, args.beta, args.mean_degree)
        g = generate_chung_lu(WeightedGraphSpec(args.n, args.beta, w_bar, args.i0, args.seed))
    else:
        if not args.source:
            raise UsageError("twin needs --source")
        src = load_graph(args.source)
        deg = src.degrees()
        mean = float(deg.mean())
        if args.kind == "gnp":
            g = generate_gnp(src.n, mean, args.seed)
        else:
            beta = args.beta if args.beta_given else estimate_power_law_exponent(deg, args.d_min)
            g = generate_chung_lu(WeightedGraphSpec(src.n, beta, calibrate_w_bar(src.n, beta, mean),
                                                    rng_seed=args.seed))
    _save_graph(g, args.out)
    _emit({"n": g.n, "edges": g.num_edges, "mean_degree": float(g.degrees().mean()), "out": args.out})


def cmd_sample(args) -> None:
    pair = sample_observed_pair(load_graph(args.graph), args.s, args.seed)
    save_pair(pair, args.out)
    _emit({"n": pair.n, "s": pair.s, "g1_edges": pair.g1.num_edges, "g2_edges": pair.g2.num_edges})


def cmd_seeds(args) -> None:
    pair = load_pair(args.pair)
    window = tuple(args.window) if args.window else None
    seeds = select_seeds(pair, SeedPolicy(args.mode, args.count, window, args.seed))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["g1_id", "g2_id"])
        w.writerows(seeds)
    _emit({"count": len(seeds), "out": args.out})


def _report(state, pair, extra=None) -> dict:
    good, bad, unmatched = classify_matches(state, pair.truth)
    m = RunMetrics(good, bad, unmatched, int(state.is_seed.sum()), state.processed_count,
                   matchable_count(pair))
    out = {"good": good, "bad": bad, "unmatched": unmatched, "seeds": m.seeds_used,
           "steps": m.steps, "precision": m.precision, "recall": m.recall}
    out.update(extra or {})
    return out


def cmd_pgm(args) -> None:
    pair = load_pair(args.pair)
    state = run_pgm(pair, _read_seeds(args.seeds), args.r, args.seed, fifo=args.fifo)
    if args.out:
        write_matches_csv(state, args.out)
    _emit(_report(state, pair))


def cmd_ddm(args) -> None:
    pair = load_pair(args.pair)
    w_bar = args.w_bar if args.w_bar is not None else float(pair.g1.degrees().mean()) / max(pair.s, 1e-12)
    with warnings.catch_warnings():
        if not args.theory:
            warnings.simplefilter("ignore")
        plan = build_slice_plan(pair.n, args.beta, w_bar, pair.s, gamma=args.gamma,
                                epsilon_inner=args.epsilon, C=args.C, mode=args.slicing,
                                alpha_star_override=args.alpha_star, theory=args.theory)
    stages = build_stage_plan(plan, r_p1=args.r_p1, simplified=args.simplified)
    res = run_ddm(pair, _read_seeds(args.seeds), plan, stages, args.seed, fifo=args.fifo)
    if args.out:
        write_matches_csv(res.state, args.out)
    if args.trace:
        res.write_trace(args.trace, pair.truth)
    _emit(_report(res.state, pair, {"stages": len(res.stages)}))


def cmd_sweep(args) -> None:
    cfg = load_config(args.config, out=args.out, summary=args.summary)
    rows = run_sweep(cfg, workers=args.workers)
    _emit({"rows": len(rows), "out": cfg.out, "summary": cfg.summary})


def cmd_analyze(args) -> None:
    _emit(analyze(args.results, args.json, args.csv))


def cmd_exponent(args) -> None:
    g = load_graph(args.graph)
    _emit({"n": g.n, "mean_degree": float(g.degrees().mean()),
           "beta": estimate_power_law_exponent(g.degrees(), args.d_min)})


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="percmatch", description="Seeded percolation matching on scale-free graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a Chung-Lu, G(n,p) or twin graph")
    g.add_argument("model", choices=["chung-lu", "gnp", "twin"])
    g.add_argument("--n", type=int, default=10000)
    g.add_argument("--beta", type=float, default=None)
    g.add_argument("--w-bar", type=float, default=None)
    g.add_argument("--mean-degree", type=float, default=10.0)
    g.add_argument("--i0", type=float, default=None)
    g.add_argument("--source", help="twin: graph to imitate")
    g.add_argument("--kind", choices=["chung-lu", "gnp"], default="chung-lu", help="twin flavour")
    g.add_argument("--d-min", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="*.txt/*.edges writes an edge list, else binary cache")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("sample", help="draw two observed graphs from a groundtruth graph")
    s.add_argument("--graph", required=True)
    s.add_argument("--s", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output prefix")
    s.set_defaults(func=cmd_sample)

    sd = sub.add_parser("seeds", help="select seed pairs")
    sd.add_argument("--pair", required=True, help="prefix written by 'sample'")
    sd.add_argument("--mode", choices=["uniform", "degree_window"], default="uniform")
    sd.add_argument("--count", type=int, required=True)
    sd.add_argument("--window", type=float, nargs=2, default=None)
    sd.add_argument("--seed", type=int, default=0)
    sd.add_argument("--out", required=True)
    sd.set_defaults(func=cmd_seeds)

    for name, func in (("pgm", cmd_pgm), ("ddm", cmd_ddm)):
        m = sub.add_parser(name, help=f"run {name.upper()} on a sampled pair")
        m.add_argument("--pair", required=True)
        m.add_argument("--seeds", required=True)
        m.add_argument("--seed", type=int, default=0, help="frontier randomness")
        m.add_argument("--fifo", action="store_true")
        m.add_argument("--out", help="matches CSV")
        m.set_defaults(func=func)
        if name == "pgm":
            m.add_argument("--r", type=int, default=4)
        else:
            m.add_argument("--beta", type=float, default=2.5)
            m.add_argument("--w-bar", type=float, default=None)
            m.add_argument("--gamma", type=float, default=0.5)
            m.add_argument("--epsilon", type=float, default=0.1)
            m.add_argument("--C", type=float, default=1.0)
            m.add_argument("--alpha-star", type=float, default=None)
            m.add_argument("--slicing", choices=["estimated_weight", "true_weight"],
                           default="estimated_weight")
            m.add_argument("--r-p1", type=int, default=None)
            m.add_argument("--simplified", action="store_true", help="threshold 4 at every stage")
            m.add_argument("--theory", action="store_true")
            m.add_argument("--trace", help="stage trace JSON")

    sw = sub.add_parser("sweep", help="seed sweep from a key=value config file")
    sw.add_argument("config")
    sw.add_argument("--out", default=None)
    sw.add_argument("--summary", default=None)
    sw.add_argument("--workers", type=int, default=None, help=f"defaults to ${WORKERS_ENV} or 1")
    sw.set_defaults(func=cmd_sweep)

    an = sub.add_parser("analyze", help="aggregate a sweep CSV")
    an.add_argument("results")
    an.add_argument("--json", default=None)
    an.add_argument("--csv", default=None)
    an.set_defaults(func=cmd_analyze)

    ex = sub.add_parser("exponent", help="estimate the degree power-law exponent")
    ex.add_argument("graph")
    ex.add_argument("--d-min", type=int, default=None)
    ex.set_defaults(func=cmd_exponent)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) == "generate":
            args.beta_given = args.beta is not None
            if args.beta is None:
                args.beta = 2.5
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataError, SeedError, EstimationError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
