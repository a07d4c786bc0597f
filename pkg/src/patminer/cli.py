"""Batch command-line front end.

Count results go to stdout as one "name<TAB>count" line per pattern so they
pipe cleanly; timings and the applied-optimization log go to stderr. In list
mode stdout carries exactly one line per match. With several devices the
per-device load report (CSV) follows the counts, or lands in --report-csv.
"""
from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import apps, scheduler
from .executor import ExecutionConfig
from .graph import Graph, GraphParseError, load_csr, load_edgelist, save_csr
from .pattern import EDGE_INDUCED, Pattern, parse_pattern


def _load_graph(args) -> Graph:
    fmt = args.format
    if fmt == "auto":
        fmt = "csr" if args.graph.endswith((".csr", ".gcsr")) else "el"
    if fmt == "csr":
        g = load_csr(args.graph)
        if args.labels:
            raise ValueError("--labels applies to edgelist input only")
        return g
    return load_edgelist(args.graph, labeled=args.labels is not None,
                         label_path=args.labels)


def _exec_config(args) -> ExecutionConfig:
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("PATMINER_WORKERS", "1"))
    return ExecutionConfig(workers=workers,
                           memory_budget=args.memory_budget,
                           lgs=args.lgs)


def _job_kwargs(args) -> dict:
    kw = dict(cfg=_exec_config(args), devices=args.devices,
              policy=args.policy, alpha=args.alpha)
    if getattr(args, "vertex_parallel", False):
        kw["granularity"] = "vertex"
    return kw


def _pattern_label(p: Pattern) -> str:
    if p.labels is None:
        return p.name
    edges = ",".join(f"{u}-{v}" for u, v in p.edges)
    labels = ",".join(str(x) for x in p.labels)
    return f"labels[{labels}]edges[{edges}]"


def _finish(result, args, elapsed: float, list_mode: bool = False) -> None:
    for line in result.log_lines():
        print(line, file=sys.stderr)
    print(f"elapsed: {elapsed:.3f}s", file=sys.stderr)
    items = sorted((_pattern_label(result.patterns.get(pid)) if pid in result.patterns
                    else pid, c) for pid, c in result.counts.items())
    for name, count in items:
        # stdout carries one line per match in list mode; counts go to stderr
        print(f"{name}\t{count}", file=sys.stderr if list_mode else sys.stdout)
    if result.devices is not None:
        csv = result.devices.load_report_csv()
        if args.report_csv:
            with open(args.report_csv, "w", encoding="utf-8") as fh:
                fh.write(csv)
        else:
            sys.stdout.write(csv)


def _add_common(sp: argparse.ArgumentParser, pattern_flags=()) -> None:
    sp.add_argument("--graph", required=True, help="graph file (edgelist or binary CSR)")
    sp.add_argument("--format", choices=("auto", "el", "csr"), default="auto")
    sp.add_argument("--labels", help="vertex label file (one integer per line)")
    sp.add_argument("--devices", "-n", type=int, default=1)
    sp.add_argument("--policy", choices=(scheduler.POLICY_EVEN, scheduler.POLICY_RR,
                                         scheduler.POLICY_CHUNKED),
                    default=scheduler.POLICY_CHUNKED)
    sp.add_argument("--alpha", type=int, default=2, help="chunk factor: chunk = alpha * workers")
    sp.add_argument("--workers", type=int, default=None,
                    help="worker contexts per device (default: $PATMINER_WORKERS or 1)")
    sp.add_argument("--memory-budget", type=int, default=None,
                    help="bytes of scratch; caps the worker count")
    sp.add_argument("--lgs", choices=("auto", "on", "off"), default="auto",
                    help="local graph search")
    sp.add_argument("--vertex-parallel", action="store_true",
                    help="root tasks at vertices instead of edges")
    sp.add_argument("--report-csv", help="write the per-device load report here")
    for flag in pattern_flags:
        sp.add_argument(flag)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="patminer",
        description="Pattern-aware graph pattern mining on CPU")
    sub = ap.add_subparsers(dest="app", required=True)

    tc = sub.add_parser("tc", help="triangle counting")
    _add_common(tc)

    cl = sub.add_parser("cl", help="k-clique listing/counting")
    _add_common(cl)
    cl.add_argument("--k", type=int, required=True)
    cl.add_argument("--mode", choices=("count", "list"), default="count")

    sl = sub.add_parser("sl", help="subgraph listing for an explicit pattern")
    _add_common(sl)
    sl.add_argument("--pattern", required=True, help="pattern edgelist file")
    sl.add_argument("--mode", choices=("count", "list"), default="count")

    mc = sub.add_parser("mc", help="k-motif counting")
    _add_common(mc)
    mc.add_argument("--k", type=int, required=True)

    fs = sub.add_parser("fsm", help="frequent subgraph mining")
    _add_common(fs)
    fs.add_argument("--k", type=int, required=True, help="maximum pattern edges")
    fs.add_argument("--sigma", type=int, required=True, help="support threshold")
    fs.add_argument("--no-label-pruning", action="store_true")

    cv = sub.add_parser("convert", help="convert an edgelist to binary CSR")
    cv.add_argument("--graph", required=True)
    cv.add_argument("--labels")
    cv.add_argument("--out", required=True)

    gen = sub.add_parser("gen", help="generate a synthetic graph file")
    gen.add_argument("--kind", choices=("er", "powerlaw"), required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--p", type=float, default=0.1, help="edge probability (er)")
    gen.add_argument("--m", type=int, default=4, help="edges per new vertex (powerlaw)")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--num-labels", type=int, default=0,
                     help="also write <out>.labels with this many labels")
    return ap


# ---------------------------------------------------------------------------
# Synthetic graphs
# ---------------------------------------------------------------------------

def gen_synthetic(kind: str, n: int, param, seed: int) -> np.ndarray:
    """Deterministic edge array for a synthetic graph.

    er: each pair kept with probability p. powerlaw: preferential attachment
    with m edges per new vertex, giving the skewed degrees that expose
    scheduler imbalance (early vertices become hubs).
    """
    rng = np.random.default_rng(seed)
    if n < 0:
        raise ValueError("vertex count must be non-negative")
    if kind == "er":
        if not 0 <= param <= 1:
            raise ValueError("edge probability outside [0, 1]")
        if n < 2:
            return np.empty((0, 2), dtype=np.int64)
        mask = np.triu(rng.random((n, n)) < param, 1)
        return np.argwhere(mask)
    if kind == "powerlaw":
        m = int(param)
        if m < 1:
            raise ValueError("powerlaw needs at least one edge per vertex")
        targets: list[int] = []
        edges = []
        for v in range(1, n):
            k = min(m, v)
            picked: set[int] = set()
            while len(picked) < k:
                # preferential attachment: pick endpoints of existing edges
                if targets:
                    cand = int(targets[rng.integers(0, len(targets))])
                else:
                    cand = int(rng.integers(0, v))
                picked.add(cand)
            for w in picked:
                edges.append((v, w))
                targets.extend((v, w))
        return np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    raise ValueError(f"unknown synthetic kind {kind!r}")


def _write_edgelist(edges: np.ndarray, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# generated by patminer gen\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def _cmd_gen(args) -> int:
    param = args.p if args.kind == "er" else args.m
    edges = gen_synthetic(args.kind, args.n, param, args.seed)
    _write_edgelist(edges, args.out)
    if args.num_labels > 0:
        rng = np.random.default_rng(args.seed + 1)
        labels = rng.integers(0, args.num_labels, args.n)
        with open(args.out + ".labels", "w", encoding="utf-8") as fh:
            for lab in labels:
                fh.write(f"{lab}\n")
    print(f"wrote {len(edges)} edges to {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.app == "gen":
            return _cmd_gen(args)
        if args.app == "convert":
            g = load_edgelist(args.graph, labeled=args.labels is not None,
                              label_path=args.labels)
            save_csr(g, args.out)
            print(f"wrote {args.out}", file=sys.stderr)
            return 0

        g = _load_graph(args)
        t0 = time.perf_counter()
        if args.app == "tc":
            result = apps.run_job(apps.MiningJob(
                graph=g, patterns=[apps.generate_clique(3)], **_job_kwargs(args)))
        elif args.app == "cl":
            result = _run_listing(args, g, apps.generate_clique(args.k))
        elif args.app == "sl":
            result = _run_listing(args, g, parse_pattern(args.pattern, EDGE_INDUCED))
        elif args.app == "mc":
            motifs = apps.generate_all_motifs(args.k)
            result = apps.run_job(apps.MiningJob(
                graph=g, patterns=motifs, **_job_kwargs(args)))
        elif args.app == "fsm":
            result = apps.k_fsm(g, args.k, args.sigma,
                                label_pruning=not args.no_label_pruning,
                                **_job_kwargs(args))
        else:  # pragma: no cover - argparse enforces choices
            raise ValueError(f"unknown app {args.app!r}")
        list_mode = getattr(args, "mode", "count") == "list"
        _finish(result, args, time.perf_counter() - t0, list_mode=list_mode)
        return 0
    except (OSError, GraphParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _run_listing(args, g, pat) -> "apps.JobResult":
    if args.mode == "list":
        if args.devices > 1:
            raise ValueError("list mode streams matches; run it on one device")

        def sink(pid, match):
            print(pid + "\t" + " ".join(str(v) for v in match))
            return False
        return apps.run_job(apps.MiningJob(
            graph=g, patterns=[pat], mode="list", sink=sink, **_job_kwargs(args)))
    return apps.run_job(apps.MiningJob(
        graph=g, patterns=[pat], **_job_kwargs(args)))


if __name__ == "__main__":
    sys.exit(main())
