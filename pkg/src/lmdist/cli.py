"""Command-line entry point.

Subcommands: generate, ingest, embed, query, shells, validate, bench,
version.  Every run is deterministic given its flags and input files
(wall-clock fields excepted); all randomness flows from --seed through
tagged stream derivation.  Output files are written atomically.

Exit codes: 0 success (and PASS for validate), 1 validate FAIL,
2 usage or parameter errors, 3 data or I/O errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import __version__
from ._seeds import derive_seed
from .bench import parse_sweep_spec, run_sweep, sweep_csv_lines, sample_pairs
from .embedding import (
    build_embedding,
    query,
    read_embedding,
    read_family,
    sample_family,
    write_embedding,
    write_family,
)
from .errors import (
    EmptySampleError,
    FormatError,
    ParameterError,
    ParseError,
    UnsupportedOperationError,
)
from .graph import (
    _GRAPH_MAGIC,
    Graph,
    components,
    er_generate,
    extract_lcc,
    ingest_edgelist,
    read_graph,
    serialize_edgelist,
    write_graph,
)
from .randomlab import (
    coupling_check,
    coupling_trend,
    growth_survey,
    intersection_survey,
    shell_profile,
    typical_distance_check,
)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LMK_THREADS", "1")))
    except ValueError:
        return 1


def _atomic_write(path: str, payload_fn, binary: bool) -> None:
    """Write via a sibling temp file and rename into place."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".lmdist-tmp-")
    try:
        with os.fdopen(fd, "wb" if binary else "w") as fh:
            payload_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_graph(path: str) -> Graph:
    """Read a graph file, sniffing binary vs text edge list."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == _GRAPH_MAGIC:
        with open(path, "rb") as fh:
            return read_graph(fh)
    with open(path, "r") as fh:
        return ingest_edgelist(fh.read()).graph


def _write_graph_file(g: Graph, path: str, binary: bool) -> None:
    if binary:
        _atomic_write(path, lambda fh: write_graph(g, fh), binary=True)
    else:
        _atomic_write(path, lambda fh: fh.write(serialize_edgelist(g)), binary=False)


def _fmt_value(x) -> str:
    if x is None:
        return "inf"
    f = float(x)
    if np.isinf(f):
        return "inf"
    if f == int(f):
        return str(int(f))
    return f"{f:.6g}"


# ------------------------------------------------------------- subcommands


def cmd_generate(args) -> int:
    g = er_generate(args.n, getattr(args, "lambda"), seed=args.seed)
    _write_graph_file(g, args.out, args.binary)
    print(f"generated {g.n} nodes, {g.m} edges -> {args.out}")
    return 0


def cmd_ingest(args) -> int:
    with open(args.input, "r") as fh:
        res = ingest_edgelist(fh.read())
    g = res.graph
    if g.n == 0:
        raise ParseError("input graph is empty")
    comp = components(g)
    lcc = extract_lcc(g)
    print(
        f"graph: {g.n} nodes, {g.m} edges "
        f"({res.self_loops_dropped} self-loops dropped, "
        f"{res.duplicates_dropped} duplicates dropped)"
    )
    print(f"components: {comp.sizes.size}")
    print(f"LCC: {lcc.n} nodes, {lcc.m} edges")
    if args.out is not None:
        out_graph = lcc if args.lcc else g
        _write_graph_file(out_graph, args.out, args.binary)
        print(f"wrote {'LCC' if args.lcc else 'canonical graph'} -> {args.out}")
    return 0


def cmd_embed(args) -> int:
    g = _load_graph(args.graph)
    if args.family_in is not None:
        with open(args.family_in, "r") as fh:
            fam = read_family(fh)
    else:
        missing = [k for k in ("M", "r", "R") if getattr(args, k) is None]
        if missing:
            raise ParameterError(
                f"--{', --'.join(missing)} required when --family-in is not given"
            )
        fam = sample_family(g.n, args.M, args.r, args.R, args.seed)
    if args.family_out is not None:
        _atomic_write(args.family_out, lambda fh: write_family(fam, fh), binary=False)
    emb = build_embedding(g, fam, threads=args.threads)
    _atomic_write(args.out, lambda fh: write_embedding(emb, fh), binary=True)
    D = emb.R * (emb.r + 1)
    print(f"embedded {emb.n} nodes, D={D} (M={emb.M}, r={emb.r}, R={emb.R}) -> {args.out}")
    return 0


def cmd_query(args) -> int:
    with open(args.embedding, "rb") as fh:
        emb = read_embedding(fh)
    include_ub = True if args.ub else None
    pair = query(emb, args.u, args.v, include_ub=include_ub)
    print(f"lb={_fmt_value(pair.lb)}")
    if emb.builder == "bfs" or args.ub:
        print(f"ub={_fmt_value(pair.ub)}")
    return 0


def cmd_shells(args) -> int:
    g = _load_graph(args.graph)
    prof = shell_profile(g, args.u, args.kmax)
    print("k count cumulative")
    for k in range(prof.counts.size):
        print(f"{k} {prof.counts[k]} {prof.cumulative[k]}")
    return 0


def _validate_graph(args):
    if args.graph is not None:
        return _load_graph(args.graph)
    if args.n is None:
        raise ParameterError("--graph or --n/--lambda required for this check")
    return er_generate(args.n, getattr(args, "lambda"), seed=derive_seed(args.seed, "validate-graph"))


def cmd_validate(args) -> int:
    lam = getattr(args, "lambda")
    if args.check == "growth":
        res = growth_survey(_validate_graph(args), args.nodes, args.seed, eps=args.eps, lam=lam)
    elif args.check == "intersection":
        res = intersection_survey(_validate_graph(args), args.pairs, args.seed, eps=args.eps, lam=lam)
    elif args.check == "typical-distance":
        g = _validate_graph(args)
        pairs = sample_pairs(g, args.pairs, derive_seed(args.seed, "validate-pairs"))
        res = typical_distance_check(g, pairs, lam=lam)
    elif args.check == "coupling":
        res = coupling_check(args.n, lam, args.L, args.trials, args.seed, method=args.method)
    elif args.check == "coupling-trend":
        sizes = tuple(int(tok) for tok in args.sizes.split(","))
        res = coupling_trend(
            sizes, lam, args.L, args.trials, args.reps, args.seed, method=args.method
        )
    else:  # argparse choices make this unreachable
        raise ParameterError(f"unknown check {args.check!r}")
    line = res.summary()
    print(line)
    return 0 if line.startswith("PASS") else 1


def cmd_bench(args) -> int:
    with open(args.spec, "r") as fh:
        spec = parse_sweep_spec(fh.read())
    gnn = args.gnn_embedding if args.gnn_embedding else None
    rows = run_sweep(spec, gnn_embeddings=gnn, threads=args.threads)
    text = "\n".join(sweep_csv_lines(rows)) + "\n"
    if args.out is not None:
        _atomic_write(args.out, lambda fh: fh.write(text), binary=False)
        failed = sum(1 for r in rows if r.error is not None)
        print(f"wrote {len(rows)} rows ({failed} failed) -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_version(args) -> int:
    print(f"lmdist {__version__}")
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lmdist",
        description="Landmark-based shortest-path distance bounds on large sparse graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample a sparse random graph and write it")
    p.add_argument("--n", type=int, required=True, help="number of nodes")
    p.add_argument("--lambda", type=float, required=True, help="mean degree parameter")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--out", required=True, help="output graph file")
    p.add_argument("--binary", action="store_true", help="write binary format instead of text")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="canonicalize an edge list and report LCC stats")
    p.add_argument("input", help="text edge list (whitespace pairs, # comments)")
    p.add_argument("--out", help="write the canonical graph here")
    p.add_argument("--lcc", action="store_true", help="write only the largest component")
    p.add_argument("--binary", action="store_true", help="write binary format instead of text")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("embed", help="sample landmark sets and build the distance embedding")
    p.add_argument("graph", help="input graph file (text or binary)")
    p.add_argument("--M", type=int, help="set-size base")
    p.add_argument("--r", type=int, help="largest set-size exponent")
    p.add_argument("--R", type=int, help="number of rounds")
    p.add_argument("--seed", type=int, default=0, help="family sampling seed")
    p.add_argument("--out", required=True, help="output embedding file")
    p.add_argument("--family-in", help="reuse a stored landmark family (skips sampling)")
    p.add_argument("--family-out", help="also store the sampled family as JSON")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker threads (default: LMK_THREADS or 1)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("query", help="distance bounds for one node pair")
    p.add_argument("embedding", help="embedding file")
    p.add_argument("u", type=int)
    p.add_argument("v", type=int)
    p.add_argument("--ub", action="store_true",
                   help="require the upper bound (refused for learned embeddings)")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("shells", help="hop-shell sizes around a node")
    p.add_argument("graph", help="input graph file")
    p.add_argument("u", type=int, help="center node")
    p.add_argument("kmax", type=int, help="largest radius")
    p.set_defaults(func=cmd_shells)

    p = sub.add_parser("validate", help="run a statistical model check")
    p.add_argument("check", choices=["growth", "intersection", "typical-distance",
                                     "coupling", "coupling-trend"])
    p.add_argument("--graph", help="use this graph file instead of generating one")
    p.add_argument("--n", type=int, help="nodes for a generated graph")
    p.add_argument("--lambda", type=float, default=5.0, help="mean degree parameter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=50, help="sampled centers (growth)")
    p.add_argument("--pairs", type=int, default=100,
                   help="sampled pairs (intersection, typical-distance)")
    p.add_argument("--eps", type=float, default=0.2, help="bracket slack exponent")
    p.add_argument("--L", type=int, default=3, help="shell depth (coupling)")
    p.add_argument("--trials", type=int, default=500, help="trials (coupling)")
    p.add_argument("--reps", type=int, default=5, help="repetitions per size (coupling-trend)")
    p.add_argument("--sizes", default="5000,20000,80000",
                   help="comma list of sizes (coupling-trend)")
    p.add_argument("--method", choices=["graph", "process"], default="graph",
                   help="coupling sampler")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a sweep spec and emit the CSV report")
    p.add_argument("spec", help="flat key = values sweep file")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--gnn-embedding", action="append", default=[],
                   help="learned embedding file for gnn rows (repeatable, consumed in row order)")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help="worker threads (default: LMK_THREADS or 1)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("version", help="print the package version")
    p.set_defaults(func=cmd_version)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ParseError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (FormatError, EmptySampleError, UnsupportedOperationError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
