"""Desk-scale benchmark harness.

Pair sampling, distance-bound error metrics, parameter sweeps over
(n, lambda, M, theta, eps, constant, builder) grids, and wall-clock
timing.  Sweeps emit a fixed CSV schema consumed by plotting scripts
and by the learned-embedding comparison pipeline.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._seeds import derive_rng, derive_seed
from .embedding import (
    Embedding,
    LandmarkFamily,
    build_embedding,
    lower_bound,
    read_embedding,
    sample_family,
    upper_bound,
)
from .errors import EmptySampleError, ParameterError, ParseError
from .graph import Graph, UNREACHED, bfs, components, er_generate
from .randomlab import _schedule_r, params_lb, params_ub

CSV_HEADER = (
    "graph_source,n,m,lambda,M,r,R,seed,builder,pairs,mse_lb,mean_rel_err_lb,"
    "viol_rate_lb_eps,viol_rate_ub_eps,build_ms,query_us_per_pair"
)

# indices of the wall-clock columns (masked when comparing runs byte-wise)
TIMING_COLUMNS = (14, 15)


def sample_pairs(g: Graph, count: int, seed: int) -> np.ndarray:
    """Uniform pairs over V x V with replacement, resampled until the
    endpoints differ and share a component.  Deterministic per seed."""
    if count < 0:
        raise ParameterError("count must be nonnegative")
    comp = components(g)
    if comp.sizes.size == 0 or comp.sizes[0] < 2:
        raise EmptySampleError("no component with at least 2 nodes")
    rng = derive_rng(seed, "pair-sample")
    labels = comp.labels
    out = np.empty((count, 2), dtype=np.int64)
    filled = 0
    while filled < count:
        want = count - filled
        draw = rng.integers(0, g.n, size=(2 * want + 16, 2))
        ok = (draw[:, 0] != draw[:, 1]) & (labels[draw[:, 0]] == labels[draw[:, 1]])
        take = draw[ok][:want]
        out[filled : filled + take.shape[0]] = take
        filled += take.shape[0]
    return out


def exact_distances(g: Graph, pairs: np.ndarray) -> np.ndarray:
    """Hop distance for each pair via one BFS per distinct source."""
    pairs = np.asarray(pairs, dtype=np.int64)
    d = np.empty(pairs.shape[0], dtype=np.int64)
    for u in np.unique(pairs[:, 0]):
        sel = pairs[:, 0] == u
        dist = bfs(g, int(u))
        d[sel] = dist[pairs[sel, 1]]
    return d


@dataclass
class DistortionReport:
    """Distance-bound quality on a sampled pair set.

    Aggregates are recomputable from the stored sample arrays; the ub
    column is NaN where the bound is undefined (no shared landmark) and
    those pairs are excluded from the ub violation rate.
    """

    graph_source: str
    n: int
    m: int
    lam: float
    M: int
    r: int
    R: int
    seed: int
    builder: str
    eps: float
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    d_exact: np.ndarray = field(repr=False)
    lb: np.ndarray = field(repr=False)
    ub: np.ndarray = field(repr=False)
    build_ms: float = float("nan")
    query_us_per_pair: float = float("nan")
    error: str | None = None

    @property
    def pairs(self) -> int:
        return int(self.d_exact.size)

    @property
    def undefined_ub(self) -> int:
        return int(np.count_nonzero(np.isnan(self.ub)))

    @property
    def mse_lb(self) -> float:
        if self.pairs == 0:
            return float("nan")
        return float(np.mean((self.lb - self.d_exact) ** 2))

    @property
    def mean_rel_err_lb(self) -> float:
        if self.pairs == 0:
            return float("nan")
        return float(np.mean((self.d_exact - self.lb) / self.d_exact))

    @property
    def viol_rate_lb(self) -> float:
        if self.pairs == 0:
            return float("nan")
        return float(np.mean(self.lb < (1.0 - self.eps) * self.d_exact))

    @property
    def viol_rate_ub(self) -> float:
        defined = ~np.isnan(self.ub)
        if not defined.any():
            return float("nan")
        return float(np.mean(self.ub[defined] > (1.0 + self.eps) * self.d_exact[defined]))

    def csv_row(self) -> str:
        cells = [
            self.graph_source,
            _fmt(self.n),
            _fmt(self.m),
            _fmt(self.lam),
            _fmt(self.M),
            _fmt(self.r),
            _fmt(self.R),
            _fmt(self.seed),
            self.builder,
            _fmt(self.pairs),
            _fmt(self.mse_lb),
            _fmt(self.mean_rel_err_lb),
            _fmt(self.viol_rate_lb),
            _fmt(self.viol_rate_ub),
            _fmt(self.build_ms),
            _fmt(self.query_us_per_pair),
        ]
        return ",".join(cells)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.10g}"


def run_distortion(
    g: Graph,
    fam_or_emb,
    pairs: np.ndarray,
    *,
    eps: float = 0.5,
    graph_source: str = "er",
    lam: float = float("nan"),
    threads: int = 1,
) -> DistortionReport:
    """Exact distances vs embedding bounds on a fixed pair set.

    Accepts either a landmark family (embedding built and timed here) or
    a prebuilt embedding (build time reported as NaN).  The upper bound
    is evaluated only for builder "bfs"; bfs rows are hard-checked for
    lb <= d <= ub with zero tolerance.
    """
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ParameterError("pairs must have shape (k, 2)")
    if pairs.shape[0] == 0:
        raise ParameterError("need at least one pair")
    if isinstance(fam_or_emb, LandmarkFamily):
        t0 = time.perf_counter()
        emb = build_embedding(g, fam_or_emb, threads=threads)
        build_ms = (time.perf_counter() - t0) * 1e3
    else:
        emb = fam_or_emb
        build_ms = float("nan")
    if emb.n != g.n:
        raise ParameterError(f"embedding covers {emb.n} nodes, graph has {g.n}")
    if np.any(pairs[:, 0] == pairs[:, 1]):
        raise ParameterError("identical-endpoint pairs must be resampled, not scored")

    d = exact_distances(g, pairs)
    if np.any(d == UNREACHED):
        raise ParameterError("every scored pair must lie in one component")

    k = pairs.shape[0]
    lb = np.empty(k, dtype=np.float64)
    ub = np.full(k, np.nan)
    with_ub = emb.builder == "bfs"
    t0 = time.perf_counter()
    for idx in range(k):
        u, v = int(pairs[idx, 0]), int(pairs[idx, 1])
        lb[idx] = lower_bound(emb, u, v)
        if with_ub:
            b = upper_bound(emb, u, v)
            if b is not None:
                ub[idx] = b
    query_us = (time.perf_counter() - t0) * 1e6 / k

    if with_ub:
        # exact-BFS coordinates make these true bounds; any breach is a bug
        if np.any(lb > d):
            raise AssertionError("lower bound exceeded exact distance")
        defined = ~np.isnan(ub)
        if np.any(ub[defined] < d[defined]):
            raise AssertionError("upper bound fell below exact distance")

    return DistortionReport(
        graph_source=graph_source,
        n=g.n,
        m=g.m,
        lam=lam,
        M=emb.M,
        r=emb.r,
        R=emb.R,
        seed=emb.seed,
        builder=emb.builder,
        eps=eps,
        u=pairs[:, 0].copy(),
        v=pairs[:, 1].copy(),
        d_exact=d,
        lb=lb,
        ub=ub,
        build_ms=build_ms,
        query_us_per_pair=query_us,
    )


@dataclass
class SweepSpec:
    """Cartesian sweep over generator and schedule parameters.

    R (and r) may be listed explicitly to sweep round counts directly;
    otherwise the schedule is derived per cell from (n, eps, theta, M,
    varsigma, constant) with the given kind ("lb" or "ub").
    """

    n: tuple = (1000,)
    lam: tuple = (5.0,)
    M: tuple = (2,)
    theta: tuple = (0.25,)
    eps: tuple = (0.5,)
    constant: tuple = (1.0,)
    builders: tuple = ("bfs",)
    R: tuple | None = None
    r: tuple | None = None
    kind: str = "lb"
    varsigma: float = 0.01
    pairs: int = 1000
    reps: int = 1
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "lam", "M", "theta", "eps", "constant", "builders"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ParameterError(f"{name} list must be nonempty")
        if self.R is not None and len(self.R) == 0:
            raise ParameterError("R list must be nonempty when given")
        if self.reps < 1:
            raise ParameterError("reps must be at least 1")
        if self.pairs < 1:
            raise ParameterError("pairs must be at least 1")
        if self.kind not in ("lb", "ub"):
            raise ParameterError("kind must be 'lb' or 'ub'")
        for b in self.builders:
            if b not in ("bfs", "gnn"):
                raise ParameterError(f"unknown builder tag {b!r}")

    def cells(self):
        """Deterministic cell order: n, lam, M, theta, eps, constant, R."""
        r_list = [None] if self.R is None else list(self.R)
        return list(
            itertools.product(
                self.n, self.lam, self.M, self.theta, self.eps, self.constant, r_list
            )
        )


_SWEEP_KEYS = {
    "n": int,
    "lambda": float,
    "M": int,
    "theta": float,
    "eps": float,
    "constant": float,
    "builder": str,
    "R": int,
    "r": int,
    "kind": str,
    "varsigma": float,
    "pairs": int,
    "reps": int,
    "seed": int,
}
_SCALAR_KEYS = ("kind", "varsigma", "pairs", "reps", "seed")


def parse_sweep_spec(text: str) -> SweepSpec:
    """Parse the flat key = comma-separated-values sweep format."""
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"line {lineno}: expected key = values")
        key, _, rhs = stripped.partition("=")
        key = key.strip()
        if key not in _SWEEP_KEYS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        conv = _SWEEP_KEYS[key]
        try:
            values = tuple(conv(tok.strip()) for tok in rhs.split(",") if tok.strip())
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
        if not values:
            raise ParseError(f"line {lineno}: no values for {key!r}")
        if key in _SCALAR_KEYS and len(values) > 1:
            raise ParseError(f"line {lineno}: {key!r} takes a single value")
        raw[key] = values
    kwargs: dict = {}
    rename = {"lambda": "lam", "builder": "builders"}
    for key, values in raw.items():
        name = rename.get(key, key)
        if key in _SCALAR_KEYS:
            kwargs[name] = values[0]
        else:
            kwargs[name] = values
    return SweepSpec(**kwargs)


def _cell_params(spec: SweepSpec, cell):
    n, lam, M, theta, eps, constant, r_override = cell
    if r_override is not None:
        R = int(r_override)
        r = int(spec.r[0]) if spec.r is not None else _schedule_r(n, theta, M)
    else:
        fn = params_lb if spec.kind == "lb" else params_ub
        p = fn(n, eps, theta, M, spec.varsigma, constant)
        r, R = p.r, p.R
    return r, R


def _run_cell(spec: SweepSpec, cell_idx: int, cell, rep: int, gnn_iter, threads: int):
    n, lam, M, theta, eps, constant, _ = cell
    graph_seed = derive_seed(spec.seed, "sweep-graph", cell_idx, rep)
    pair_seed = derive_seed(spec.seed, "sweep-pairs", cell_idx, rep)
    fam_seed = derive_seed(spec.seed, "sweep-family", cell_idx, rep)
    rows = []
    try:
        r, R = _cell_params(spec, cell)
        g = er_generate(n, lam, seed=graph_seed)
        pairs = sample_pairs(g, spec.pairs, pair_seed)
    except Exception as exc:  # noqa: BLE001 - cell failures must not kill the sweep
        for builder in spec.builders:
            rows.append(_failed_row(spec, cell, builder, str(exc)))
        return rows
    fam = None
    for builder in spec.builders:
        try:
            if builder == "bfs":
                if fam is None:
                    fam = sample_family(n, M, r, R, fam_seed)
                rows.append(
                    run_distortion(
                        g, fam, pairs, eps=eps, graph_source="er", lam=lam, threads=threads
                    )
                )
            else:
                emb = next(gnn_iter, None)
                if emb is None:
                    raise ParameterError("no learned embedding supplied for this cell")
                if not isinstance(emb, Embedding):
                    emb = read_embedding(emb)
                rows.append(
                    run_distortion(g, emb, pairs, eps=eps, graph_source="er", lam=lam)
                )
        except Exception as exc:  # noqa: BLE001
            rows.append(_failed_row(spec, cell, builder, str(exc)))
    return rows


def _failed_row(spec: SweepSpec, cell, builder: str, message: str) -> DistortionReport:
    n, lam, M, theta, eps, constant, r_override = cell
    try:
        r, R = _cell_params(spec, cell)
    except Exception:  # noqa: BLE001
        r, R = -1, -1
    empty = np.empty(0, dtype=np.int64)
    return DistortionReport(
        graph_source="er",
        n=n,
        m=0,
        lam=lam,
        M=M,
        r=r,
        R=R,
        seed=spec.seed,
        builder=builder,
        eps=eps,
        u=empty,
        v=empty,
        d_exact=empty,
        lb=np.empty(0),
        ub=np.empty(0),
        error=message,
    )


def run_sweep(
    spec: SweepSpec, *, gnn_embeddings=None, threads: int = 1
) -> list[DistortionReport]:
    """One report per cell x repetition x builder, in deterministic spec
    order.  Builders within a cell share the graph and pair sample, so
    bfs/gnn rows are paired.  Failed cells yield NaN-metric rows with an
    error message and the sweep continues.
    """
    gnn_iter = iter(gnn_embeddings if gnn_embeddings is not None else ())
    jobs = [
        (cell_idx, cell, rep)
        for cell_idx, cell in enumerate(spec.cells())
        for rep in range(spec.reps)
    ]
    if threads > 1 and "gnn" not in spec.builders:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(
                pool.map(lambda j: _run_cell(spec, j[0], j[1], j[2], gnn_iter, 1), jobs)
            )
    else:
        # learned embeddings are consumed in row order, keep it sequential
        chunks = [_run_cell(spec, ci, cell, rep, gnn_iter, threads) for ci, cell, rep in jobs]
    return [row for chunk in chunks for row in chunk]


def sweep_csv_lines(reports) -> list[str]:
    return [CSV_HEADER] + [rep.csv_row() for rep in reports]


def mask_timing_columns(csv_text: str, token: str = "-") -> str:
    """Replace wall-clock cells so two runs can be compared byte-wise."""
    out = []
    for i, line in enumerate(csv_text.splitlines()):
        if i == 0 or not line:
            out.append(line)
            continue
        cells = line.split(",")
        for col in TIMING_COLUMNS:
            cells[col] = token
        out.append(",".join(cells))
    return "\n".join(out)


@dataclass(frozen=True)
class TimingRecord:
    n: int
    m: int
    D: int
    build_ms: float
    query_us_per_pair: float
    repeats: int
    pairs: int


def timing_bench(
    g: Graph,
    fam: LandmarkFamily,
    *,
    pairs: int = 256,
    repeats: int = 3,
    seed: int = 0,
    threads: int = 1,
) -> TimingRecord:
    """Best-of-repeats wall clock for embedding build and per-pair query."""
    if repeats < 1:
        raise ParameterError("repeats must be at least 1")
    build_times = []
    emb = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        emb = build_embedding(g, fam, threads=threads)
        build_times.append(time.perf_counter() - t0)
    pq = sample_pairs(g, pairs, seed)
    query_times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for idx in range(pairs):
            u, v = int(pq[idx, 0]), int(pq[idx, 1])
            lower_bound(emb, u, v)
            upper_bound(emb, u, v)
        query_times.append(time.perf_counter() - t0)
    return TimingRecord(
        n=g.n,
        m=g.m,
        D=emb.R * (emb.r + 1),
        build_ms=min(build_times) * 1e3,
        query_us_per_pair=min(query_times) * 1e6 / pairs,
        repeats=repeats,
        pairs=pairs,
    )
