"""Empirical validators for sparse-random-graph structure.

Shell profiles, shell intersections, branching-process comparison, typical
distances, and the (r, R, D) schedule calculators.  Statistical checks
report pass/fail against configurable thresholds: they are finite-size
surrogates for limit statements, not proofs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._seeds import derive_rng, derive_seed
from .errors import EmptySampleError, ParameterError
from .graph import UNREACHED, Graph, bfs, components, er_generate


# ------------------------------------------------------------- shell profiles


@dataclass(frozen=True)
class ShellProfile:
    """counts[k] = number of nodes at hop distance exactly k from source."""

    source: int
    counts: np.ndarray
    cumulative: np.ndarray

    def csv_header(self):
        return ["k", "shell_size", "ball_size"]

    def csv_rows(self):
        return [
            [k, int(self.counts[k]), int(self.cumulative[k])]
            for k in range(self.counts.shape[0])
        ]


def shell_profile(g: Graph, u: int, k_max: int) -> ShellProfile:
    """Exact shell sizes from one depth-limited search."""
    if k_max < 0:
        raise ParameterError("k_max must be nonnegative")
    dist = bfs(g, u, max_depth=k_max)
    reached = dist[dist != UNREACHED]
    counts = np.bincount(reached, minlength=k_max + 1).astype(np.int64)
    return ShellProfile(source=u, counts=counts, cumulative=np.cumsum(counts))


def shell_intersection(g: Graph, u1: int, u2: int, k1: int, k2: int) -> int:
    """|{w : d(u1,w) = k1 and d(u2,w) = k2}| via two searches."""
    if k1 < 0 or k2 < 0:
        raise ParameterError("shell radii must be nonnegative")
    d1 = bfs(g, u1, max_depth=k1)
    d2 = bfs(g, u2, max_depth=k2)
    return int(np.count_nonzero((d1 == k1) & (d2 == k2)))


# ------------------------------------------------------------- shell growth


@dataclass(frozen=True)
class GrowthCheck:
    """Shell growth of one node against geometric brackets.

    chain_holds: every shell L..L+k lies inside [n^-eps * lam^L * lam^j,
    n^eps * lam^L * lam^j].  ratios: successive shell quotients; their
    mean is the per-node growth-factor estimate.
    """

    node: int
    L: int
    k: int
    eps: float
    lam: float
    counts: np.ndarray
    ratios: np.ndarray
    mean_ratio: float
    chain_holds: bool
    skipped: bool
    precondition_ok: bool


def shell_growth_check(
    g: Graph,
    u: int,
    L: int,
    k: int,
    eps: float,
    *,
    lam: float | None = None,
    kappa0: float = 0.25,
    kappa: float = 0.5,
    in_lcc: bool | None = None,
) -> GrowthCheck:
    """Check geometric shell growth at rate lam between radii L and L+k.

    lam defaults to the empirical mean degree 2m/n.  Radii outside the
    recommended window (L = floor(kappa0 log_lam n), L + k within
    (kappa0+kappa) log_lam n) only clear the precondition flag; the check
    still runs.  Nodes whose shell L is empty, or flagged as outside the
    largest component, return skipped=True.
    """
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if lam is None:
        lam = 2.0 * g.m / g.n
    if lam <= 1.0:
        warnings.warn("mean degree at or below 1: no growth regime", stacklevel=2)
    log_n = math.log(g.n) / math.log(lam) if lam > 1 else float("inf")
    precondition_ok = L == math.floor(kappa0 * log_n) and L + k <= (kappa0 + kappa) * log_n + 1e-9

    empty = np.array([])
    if in_lcc is False:
        return GrowthCheck(u, L, k, eps, lam, empty, empty, math.nan, False, True, precondition_ok)
    prof = shell_profile(g, u, L + k)
    counts = prof.counts
    if counts[L] == 0:
        return GrowthCheck(u, L, k, eps, lam, counts, empty, math.nan, False, True, precondition_ok)

    b_m = g.n ** (-eps) * lam**L
    b_M = g.n ** (eps) * lam**L
    window = counts[L : L + k + 1].astype(np.float64)
    steps = lam ** np.arange(k + 1)
    chain_holds = bool(np.all((window >= b_m * steps) & (window <= b_M * steps)))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = window[1:] / window[:-1]
    mean_ratio = float(np.mean(ratios)) if ratios.size else math.nan
    return GrowthCheck(
        node=u, L=L, k=k, eps=eps, lam=lam, counts=counts, ratios=ratios,
        mean_ratio=mean_ratio, chain_holds=chain_holds, skipped=False,
        precondition_ok=precondition_ok,
    )


@dataclass(frozen=True)
class GrowthSurvey:
    """Growth checks over sampled largest-component nodes."""

    checks: list
    L: int
    k: int
    lam: float
    window: float
    pass_fraction: float
    required_fraction: float
    passed: bool

    def csv_header(self):
        return ["node", "L", "k", "mean_ratio", "chain_holds", "node_passes"]

    def csv_rows(self):
        lo = self.lam * (1 - self.window)
        hi = self.lam * (1 + self.window)
        return [
            [c.node, c.L, c.k, f"{c.mean_ratio:.6f}", int(c.chain_holds),
             int(lo <= c.mean_ratio <= hi)]
            for c in self.checks
        ]

    def summary(self):
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"{tag} growth nodes={len(self.checks)} L={self.L} k={self.k} "
            f"lam={self.lam:g} window={self.window:g} "
            f"pass_fraction={self.pass_fraction:.3f} required={self.required_fraction:g}"
        )


def growth_survey(
    g: Graph,
    nodes: int,
    seed: int,
    *,
    eps: float = 0.2,
    lam: float | None = None,
    kappa0: float = 0.25,
    kappa: float = 0.5,
    window: float = 0.15,
    required_fraction: float = 0.9,
) -> GrowthSurvey:
    """Sample largest-component nodes and check their shell growth.

    A node passes when its mean growth ratio lies within lam*(1 +- window);
    the survey passes when at least required_fraction of nodes do.
    """
    if lam is None:
        lam = 2.0 * g.m / g.n
    if lam <= 1.0:
        raise ParameterError("growth survey needs mean degree above 1")
    log_n = math.log(g.n) / math.log(lam)
    L = math.floor(kappa0 * log_n)
    k = math.floor(kappa * log_n)
    comp = components(g)
    lcc_nodes = np.flatnonzero(comp.labels == 0)
    rng = derive_rng(seed, "growth-survey")
    picks = lcc_nodes[rng.integers(0, lcc_nodes.size, size=nodes)]
    checks = [
        shell_growth_check(
            g, int(u), L, k, eps, lam=lam, kappa0=kappa0, kappa=kappa, in_lcc=True
        )
        for u in picks
    ]
    lo, hi = lam * (1 - window), lam * (1 + window)
    ok = sum(1 for c in checks if not c.skipped and lo <= c.mean_ratio <= hi)
    frac = ok / len(checks) if checks else 0.0
    return GrowthSurvey(
        checks=checks, L=L, k=k, lam=lam, window=window, pass_fraction=frac,
        required_fraction=required_fraction, passed=frac >= required_fraction,
    )


@dataclass(frozen=True)
class IntersectionSurvey:
    """Shell-intersection sizes for sampled pairs against a size bracket."""

    counts: np.ndarray
    nodes_u: np.ndarray
    nodes_v: np.ndarray
    k: int
    lam: float
    eps: float
    bracket_lo: float
    bracket_hi: float
    pass_fraction: float
    required_fraction: float
    precondition_ok: bool
    passed: bool

    def csv_header(self):
        return ["u", "v", "k", "intersection", "in_bracket"]

    def csv_rows(self):
        return [
            [int(u), int(v), self.k, int(c),
             int(self.bracket_lo <= c <= self.bracket_hi)]
            for u, v, c in zip(self.nodes_u, self.nodes_v, self.counts)
        ]

    def summary(self):
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"{tag} intersection pairs={self.counts.size} k={self.k} "
            f"bracket=[{self.bracket_lo:.4f},{self.bracket_hi:.4f}] "
            f"pass_fraction={self.pass_fraction:.3f} required={self.required_fraction:g}"
        )


def intersection_survey(
    g: Graph,
    pairs: int,
    seed: int,
    *,
    eps: float = 0.2,
    lam: float | None = None,
    kfrac: float = 0.55,
    zeta: float = 0.05,
    required_fraction: float = 0.9,
) -> IntersectionSurvey:
    """Check intersection sizes of equal-radius shells around node pairs.

    Radius k = ceil(kfrac * log_lam n), chosen so 2k clears
    (1+zeta) log_lam n; pairs are sampled inside the largest component.
    The bracket is [n^-eps lam^2k / 2n, n^eps lam^2k / n].
    """
    if lam is None:
        lam = 2.0 * g.m / g.n
    if lam <= 1.0:
        raise ParameterError("intersection survey needs mean degree above 1")
    log_n = math.log(g.n) / math.log(lam)
    k = math.ceil(kfrac * log_n)
    precondition_ok = 2 * k > (1 + zeta) * log_n
    if not precondition_ok:
        warnings.warn("2k does not clear (1+zeta) log_lam n; bracket may not apply",
                      stacklevel=2)
    comp = components(g)
    lcc_nodes = np.flatnonzero(comp.labels == 0)
    if lcc_nodes.size < 2:
        raise EmptySampleError("largest component too small to sample pairs")
    rng = derive_rng(seed, "intersection-survey")
    us = np.empty(pairs, dtype=np.int64)
    vs = np.empty(pairs, dtype=np.int64)
    have = 0
    while have < pairs:
        u, v = lcc_nodes[rng.integers(0, lcc_nodes.size, size=2)]
        if u != v:
            us[have] = u
            vs[have] = v
            have += 1
    counts = np.array(
        [shell_intersection(g, int(u), int(v), k, k) for u, v in zip(us, vs)],
        dtype=np.int64,
    )
    lo = g.n ** (-eps) * lam ** (2 * k) / (2 * g.n)
    hi = g.n ** (eps) * lam ** (2 * k) / g.n
    frac = float(np.mean((counts >= lo) & (counts <= hi))) if pairs else 0.0
    return IntersectionSurvey(
        counts=counts, nodes_u=us, nodes_v=vs, k=k, lam=lam, eps=eps,
        bracket_lo=lo, bracket_hi=hi, pass_fraction=frac,
        required_fraction=required_fraction, precondition_ok=precondition_ok,
        passed=frac >= required_fraction,
    )


# --------------------------------------------------------- branching process


@dataclass(frozen=True)
class BranchingTrace:
    """Generation sizes of one Poisson(lam) branching realization."""

    lam: float
    sizes: np.ndarray  # X_0..X_L
    seed: int

    def csv_header(self):
        return ["generation", "size"]

    def csv_rows(self):
        return [[l, int(s)] for l, s in enumerate(self.sizes)]


# Generations larger than this are clamped before drawing children, keeping
# lam * X_l inside the Poisson sampler's range.  Sizes below the cap (any
# realistic depth/lam combination short of supercritical blowup past ~2^40
# individuals) are simulated exactly; above it, extinction has probability
# under q^cap, far beneath observable resolution, so survival frequencies
# and histogram tails used here are unaffected.
_GENERATION_CAP = 1 << 40


def branching_trace(lam: float, L: int, seed: int) -> BranchingTrace:
    """Simulate generation sizes X_0..X_L with Poisson(lam) offspring.

    The children of a whole generation are drawn in one Poisson(lam * X_l)
    step, which has exactly the law of X_l independent Poisson(lam) draws.
    """
    if lam < 0:
        raise ParameterError("lam must be nonnegative")
    if L < 0:
        raise ParameterError("L must be nonnegative")
    rng = derive_rng(seed, "branching-trace")
    sizes = np.empty(L + 1, dtype=np.int64)
    sizes[0] = 1
    for l in range(L):
        alive = min(int(sizes[l]), _GENERATION_CAP)
        sizes[l + 1] = rng.poisson(lam * alive) if alive else 0
    return BranchingTrace(lam=lam, sizes=sizes, seed=seed)


def branching_final_sizes(lam: float, L: int, trials: int, seed: int) -> np.ndarray:
    """Vector of X_L over independent branching realizations."""
    if lam < 0 or L < 0 or trials < 0:
        raise ParameterError("lam, L, trials must be nonnegative")
    rng = derive_rng(seed, "branching-ensemble")
    sizes = np.ones(trials, dtype=np.int64)
    for _ in range(L):
        sizes = rng.poisson(lam * np.minimum(sizes, _GENERATION_CAP))
    return sizes


# ------------------------------------------------------------- coupling check


def ks_statistic(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (exact, ties allowed)."""
    a = np.sort(np.asarray(a))
    b = np.sort(np.asarray(b))
    if a.size == 0 or b.size == 0:
        raise ParameterError("KS statistic needs nonempty samples")
    grid = np.union1d(a, b)
    ca = np.searchsorted(a, grid, side="right") / a.size
    cb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(ca - cb).max())


@dataclass(frozen=True)
class CouplingResult:
    """Divergence between shell sizes at depth L and branching generation L."""

    n: int
    lam: float
    L: int
    trials: int
    seed: int
    method: str
    ks: float
    threshold: float
    precondition_ok: bool
    passed: bool
    shell_hist: np.ndarray = field(repr=False)
    branching_hist: np.ndarray = field(repr=False)

    def csv_header(self):
        return ["value", "shell_count", "branching_count"]

    def csv_rows(self):
        width = max(self.shell_hist.size, self.branching_hist.size)
        rows = []
        for v in range(width):
            sh = int(self.shell_hist[v]) if v < self.shell_hist.size else 0
            br = int(self.branching_hist[v]) if v < self.branching_hist.size else 0
            rows.append([v, sh, br])
        return rows

    def summary(self):
        tag = "PASS" if self.passed else "FAIL"
        return (
            f"{tag} coupling n={self.n} lam={self.lam:g} L={self.L} "
            f"trials={self.trials} method={self.method} ks={self.ks:.5f} "
            f"threshold={self.threshold:g}"
        )


def _shell_sizes_from_graphs(n, lam, L, trials, seed):
    out = np.empty(trials, dtype=np.int64)
    picker = derive_rng(seed, "coupling-node")
    for t in range(trials):
        g = er_generate(n, lam, derive_seed(seed, "coupling-graph", t))
        u = int(picker.integers(0, n))
        dist = bfs(g, u, max_depth=L)
        out[t] = np.count_nonzero(dist == L)
    return out


def _shell_sizes_from_process(n, lam, L, trials, seed, chunk=1 << 21):
    """Sample |shell_L| without materializing graphs.

    Given the ball size s and frontier size a after level l, every one of
    the n-s unexplored nodes joins level l+1 independently with
    probability 1-(1-p)^a, because exactly the a fresh pair slots toward
    the frontier decide membership.  The resulting Markov chain has the
    same law as shell sizes in a full graph sample.
    """
    rng = derive_rng(seed, "coupling-process")
    p = lam / n
    out = np.empty(trials, dtype=np.int64)
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        a = np.ones(c, dtype=np.int64)
        s = np.ones(c, dtype=np.int64)
        for _ in range(L):
            q = -np.expm1(a * np.log1p(-p))
            a = rng.binomial(n - s, q)
            s = s + a
        out[done : done + c] = a
        done += c
    return out


def coupling_check(
    n: int,
    lam: float,
    L: int,
    trials: int,
    seed: int,
    *,
    method: str = "graph",
    threshold: float = 0.1,
) -> CouplingResult:
    """Compare shell sizes |shell_L(u)| against branching generation sizes X_L.

    method "graph" samples a full random graph per trial and reads one
    random node's shell; method "process" samples the identically
    distributed shell-size chain directly, which makes millions of trials
    affordable.  Reports the two-sample KS statistic and both histograms.
    """
    if trials < 1:
        raise ParameterError("trials must be at least 1")
    if method not in ("graph", "process"):
        raise ParameterError(f"unknown method {method!r}")
    if lam <= 1.0:
        warnings.warn("mean degree at or below 1: subcritical regime", stacklevel=2)
    log_n = math.log(n) / math.log(lam) if lam > 1 else float("inf")
    precondition_ok = L <= 0.5 * log_n
    if not precondition_ok:
        warnings.warn(
            f"depth L={L} beyond half of log_lam n = {log_n:.2f}; "
            "shell and branching laws may diverge noticeably",
            stacklevel=2,
        )
    if method == "graph":
        shells = _shell_sizes_from_graphs(n, lam, L, trials, seed)
    else:
        shells = _shell_sizes_from_process(n, lam, L, trials, seed)
    branch = branching_final_sizes(lam, L, trials, derive_seed(seed, "coupling-branching"))
    ks = ks_statistic(shells, branch) if L > 0 else 0.0
    return CouplingResult(
        n=n, lam=lam, L=L, trials=trials, seed=seed, method=method, ks=ks,
        threshold=threshold, precondition_ok=precondition_ok,
        passed=ks < threshold,
        shell_hist=np.bincount(shells), branching_hist=np.bincount(branch),
    )


@dataclass(frozen=True)
class CouplingTrend:
    """Median KS per graph size; larger graphs should not diverge more."""

    ns: tuple
    lam: float
    L: int
    trials: int
    reps: int
    method: str
    ks_values: np.ndarray  # shape (len(ns), reps)
    medians: np.ndarray
    passed: bool

    def csv_header(self):
        return ["n", "rep", "ks", "median_ks"]

    def csv_rows(self):
        rows = []
        for i, n in enumerate(self.ns):
            for rep in range(self.reps):
                rows.append([n, rep, f"{self.ks_values[i, rep]:.6f}",
                             f"{self.medians[i]:.6f}"])
        return rows

    def summary(self):
        tag = "PASS" if self.passed else "FAIL"
        meds = " ".join(f"{m:.5f}" for m in self.medians)
        return (
            f"{tag} coupling-trend ns={','.join(str(n) for n in self.ns)} "
            f"lam={self.lam:g} L={self.L} trials={self.trials} reps={self.reps} "
            f"method={self.method} medians={meds}"
        )


def coupling_trend(
    ns,
    lam: float,
    L: int,
    trials: int,
    reps: int,
    seed: int,
    *,
    method: str = "process",
) -> CouplingTrend:
    """Median KS across graph sizes; passes when medians never increase."""
    ns = tuple(int(n) for n in ns)
    ks_values = np.empty((len(ns), reps), dtype=np.float64)
    for i, n in enumerate(ns):
        for rep in range(reps):
            res = coupling_check(
                n, lam, L, trials, derive_seed(seed, "coupling-trend", i, rep),
                method=method,
            )
            ks_values[i, rep] = res.ks
    medians = np.median(ks_values, axis=1)
    passed = bool(np.all(np.diff(medians) <= 0))
    return CouplingTrend(
        ns=ns, lam=lam, L=L, trials=trials, reps=reps, method=method,
        ks_values=ks_values, medians=medians, passed=passed,
    )


# ----------------------------------------------------------- typical distance


@dataclass(frozen=True)
class TypicalDistanceResult:
    """Distribution of d(u,v) / log_lam n over sampled connected pairs."""

    n: int
    lam: float
    ratios: np.ndarray
    mean_ratio: float
    used_pairs: int
    skipped_pairs: int

    def csv_header(self):
        return ["pair", "ratio"]

    def csv_rows(self):
        return [[i, f"{r:.6f}"] for i, r in enumerate(self.ratios)]

    def summary(self, lo: float = 0.8, hi: float = 1.2):
        tag = "PASS" if lo <= self.mean_ratio <= hi else "FAIL"
        return (
            f"{tag} typical-distance n={self.n} lam={self.lam:g} "
            f"pairs={self.used_pairs} mean_ratio={self.mean_ratio:.4f} "
            f"window=[{lo:g},{hi:g}]"
        )


def typical_distance_check(g: Graph, pairs, lam: float) -> TypicalDistanceResult:
    """Mean of d(u,v)/log_lam n over the given pairs.

    Identical-endpoint pairs and pairs in different components are
    skipped; raises when nothing remains.
    """
    if lam <= 1.0:
        raise ParameterError("lam must exceed 1 to define log_lam n")
    pairs = np.asarray(pairs, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ParameterError("pairs must be an array of shape (k, 2)")
    log_n = math.log(g.n) / math.log(lam)
    cache: dict[int, np.ndarray] = {}
    ratios = []
    skipped = 0
    for u, v in pairs:
        u, v = int(u), int(v)
        if u == v:
            skipped += 1
            continue
        if u not in cache:
            cache[u] = bfs(g, u)
        d = cache[u][v]
        if d == UNREACHED:
            skipped += 1
            continue
        ratios.append(d / log_n)
    if not ratios:
        raise EmptySampleError("no connected distinct pair in the sample")
    ratios = np.array(ratios)
    return TypicalDistanceResult(
        n=g.n, lam=lam, ratios=ratios, mean_ratio=float(ratios.mean()),
        used_pairs=ratios.size, skipped_pairs=skipped,
    )


# ------------------------------------------------------- schedule calculators


@dataclass(frozen=True)
class TheoremParams:
    """Embedding schedule (r, R, D) for a target approximation quality.

    kind "lb": R = ceil(constant * M * n^(1 - eps/2 - min(eps/2, theta)
    + varsigma)) rounds give a (1-eps) lower bound with high probability.
    kind "ub": R = ceil(constant * (ln M / (theta ln n)) * n^(1 - eps
    + varsigma)) rounds give a (1+eps) upper bound.  Both use
    r = floor((theta / ln M) ln n).  The hidden asymptotic constant is
    exposed as an explicit knob (default 1).
    """

    kind: str
    n: int
    eps: float
    theta: float
    M: int
    varsigma: float
    constant: float
    r: int
    R: int
    D: int


def _common_param_checks(n, eps, theta, M, varsigma, constant):
    if n < 2:
        raise ParameterError("n must be at least 2")
    if not 0 < eps < 1:
        raise ParameterError("eps must lie in (0, 1)")
    if not (isinstance(M, (int, np.integer)) and M > 1):
        raise ParameterError("M must be an integer greater than 1")
    if varsigma <= 0:
        raise ParameterError("varsigma must be positive")
    if constant <= 0:
        raise ParameterError("constant must be positive")
    if theta <= 0:
        raise ParameterError("theta must be positive")


def _schedule_r(n, theta, M):
    # nudge guards exact-integer boundaries, e.g. theta=0.5, M=2, n=64
    return int(math.floor((theta / math.log(M)) * math.log(n) + 1e-9))


def params_lb(
    n: int, eps: float, theta: float, M: int, varsigma: float, constant: float = 1.0
) -> TheoremParams:
    """Schedule sized for the lower-bound guarantee; needs theta < eps."""
    _common_param_checks(n, eps, theta, M, varsigma, constant)
    if theta >= eps:
        raise ParameterError("theta must be smaller than eps")
    exponent = 1 - eps / 2 - min(eps / 2, theta) + varsigma
    R = int(math.ceil(constant * M * n**exponent))
    r = _schedule_r(n, theta, M)
    return TheoremParams(
        kind="lb", n=n, eps=eps, theta=theta, M=int(M), varsigma=varsigma,
        constant=constant, r=r, R=R, D=R * (r + 1),
    )


def params_ub(
    n: int, eps: float, theta: float, M: int, varsigma: float, constant: float = 1.0
) -> TheoremParams:
    """Schedule sized for the upper-bound guarantee; needs theta < (1-eps)/2."""
    _common_param_checks(n, eps, theta, M, varsigma, constant)
    if theta >= (1 - eps) / 2:
        raise ParameterError("theta must be smaller than (1 - eps) / 2")
    R = int(math.ceil(constant * (math.log(M) / (theta * math.log(n))) * n ** (1 - eps + varsigma)))
    r = _schedule_r(n, theta, M)
    return TheoremParams(
        kind="ub", n=n, eps=eps, theta=theta, M=int(M), varsigma=varsigma,
        constant=constant, r=r, R=R, D=R * (r + 1),
    )
