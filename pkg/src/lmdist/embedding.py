"""Landmark families, distance embeddings, and bound queries.

A family is R rounds of r+1 uniformly sampled node sets with sizes
M^0..M^r; the embedding stores, per node and per set, the hop distance to
the set (x) and the closest member's id (sigma).  The infinity-norm gap
between two rows is a lower bound on their true distance; the best
x_u + x_v sum over coordinates that agree on sigma is an upper bound.
"""

from __future__ import annotations

import io
import json
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._seeds import derive_rng
from .errors import FormatError, ParameterError, UnsupportedOperationError
from .graph import UNREACHED, Graph, multi_source_bfs

_EMB_MAGIC = b"LMEB"
_EMB_VERSION = 1
_BUILDER_CODES = {"bfs": 0, "gnn": 1}
_BUILDER_NAMES = {code: name for name, code in _BUILDER_CODES.items()}
_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class LandmarkFamily:
    """R rounds x (r+1) landmark sets sampled with replacement.

    sets[j][i] holds the i-th set of round j as sampled (duplicates
    possible); BFS deduplicates internally.  Size-1 sets (i = 0) keep the
    upper bound defined on connected graphs.
    """

    n: int
    M: int
    r: int
    R: int
    seed: int
    sets: tuple = field(repr=False)

    def __post_init__(self):
        if self.M <= 1:
            raise ParameterError("M must be an integer greater than 1")
        if self.r < 0 or self.R < 0:
            raise ParameterError("r and R must be nonnegative")
        if len(self.sets) != self.R:
            raise ParameterError("family must contain exactly R rounds")
        for round_sets in self.sets:
            if len(round_sets) != self.r + 1:
                raise ParameterError("each round must contain r+1 sets")
            for i, ids in enumerate(round_sets):
                if len(ids) != self.M**i:
                    raise ParameterError(f"set of index {i} must have size M^{i}")

    @property
    def D(self) -> int:
        """Coordinate count R*(r+1)."""
        return self.R * (self.r + 1)

    def __eq__(self, other):
        if not isinstance(other, LandmarkFamily):
            return NotImplemented
        if (self.n, self.M, self.r, self.R, self.seed) != (
            other.n, other.M, other.r, other.R, other.seed,
        ):
            return False
        return all(
            np.array_equal(a, b)
            for mine, theirs in zip(self.sets, other.sets)
            for a, b in zip(mine, theirs)
        )

    __hash__ = None

    def flat_sets(self):
        """Yield (column, round, index, ids) in round-major order."""
        c = 0
        for j, round_sets in enumerate(self.sets):
            for i, ids in enumerate(round_sets):
                yield c, j, i, ids
                c += 1

    def distinct_landmarks(self) -> np.ndarray:
        """Sorted ids of every node appearing in any set."""
        if not self.sets:
            return np.array([], dtype=np.int64)
        return np.unique(np.concatenate([ids for _, _, _, ids in self.flat_sets()]))


def sample_family(n: int, M: int, r: int, R: int, seed: int) -> LandmarkFamily:
    """Sample a landmark family, round-major then size-ascending.

    Each set's stream is derived from (seed, round, index), so a family
    with larger R extends a smaller one with the same seed coordinate by
    coordinate, and growing r leaves the smaller sets unchanged.
    """
    if n < 1:
        raise ParameterError("n must be at least 1")
    if M <= 1:
        raise ParameterError("M must be an integer greater than 1")
    if r < 0:
        raise ParameterError("r must be nonnegative")
    if R < 1:
        raise ParameterError("R must be at least 1")
    if M**r > n:
        warnings.warn(
            f"largest set size M^r = {M**r} exceeds n = {n}; sets will repeat nodes",
            stacklevel=2,
        )
    sets = tuple(
        tuple(
            derive_rng(seed, "landmark-family", j, i).integers(0, n, size=M**i, dtype=np.int64)
            for i in range(r + 1)
        )
        for j in range(R)
    )
    return LandmarkFamily(n=n, M=M, r=r, R=R, seed=int(seed) & _MASK64, sets=sets)


@dataclass(frozen=True)
class Embedding:
    """Per-node set distances (x) and closest-member ids (sigma).

    builder "bfs": x is int64 with UNREACHED sentinels, sigma is int64
    with -1 where undefined.  builder "gnn": x is float64 (predicted
    distances, inf where undefined), sigma is None.
    """

    n: int
    M: int
    r: int
    R: int
    seed: int
    builder: str
    x: np.ndarray = field(repr=False)
    sigma: np.ndarray | None = field(repr=False)

    def __post_init__(self):
        if self.builder not in _BUILDER_CODES:
            raise ParameterError(f"unknown builder tag {self.builder!r}")
        D = self.R * (self.r + 1)
        if self.x.shape != (self.n, D):
            raise FormatError(
                f"x must have shape (n, R*(r+1)) = ({self.n}, {D}), got {self.x.shape}"
            )
        if self.builder == "bfs":
            if self.sigma is None or self.sigma.shape != self.x.shape:
                raise FormatError("bfs embeddings require a sigma block of matching shape")
        elif self.sigma is not None:
            raise FormatError("gnn embeddings carry no sigma block")

    @property
    def D(self) -> int:
        return self.x.shape[1]

    def __eq__(self, other):
        if not isinstance(other, Embedding):
            return NotImplemented
        same_header = (self.n, self.M, self.r, self.R, self.seed, self.builder) == (
            other.n, other.M, other.r, other.R, other.seed, other.builder,
        )
        if not same_header or not np.array_equal(self.x, other.x):
            return False
        if self.sigma is None:
            return other.sigma is None
        return other.sigma is not None and np.array_equal(self.sigma, other.sigma)

    __hash__ = None


def build_embedding(g: Graph, fam: LandmarkFamily, *, threads: int = 1) -> Embedding:
    """Run one multi-source BFS per set and collect the coordinate columns."""
    if fam.n != g.n:
        raise ParameterError(f"family sampled for {fam.n} nodes, graph has {g.n}")
    landmarks = fam.distinct_landmarks()
    if landmarks.size and (landmarks[0] < 0 or landmarks[-1] >= g.n):
        raise ParameterError("family contains node ids outside the graph")
    D = fam.D
    x = np.full((g.n, D), UNREACHED, dtype=np.int64)
    sigma = np.full((g.n, D), -1, dtype=np.int64)
    jobs = list(fam.flat_sets())

    def fill(job):
        c, _, _, ids = job
        dist, closest = multi_source_bfs(g, ids)
        x[:, c] = dist
        sigma[:, c] = closest

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, jobs))
    else:
        for job in jobs:
            fill(job)
    return Embedding(
        n=g.n, M=fam.M, r=fam.r, R=fam.R, seed=fam.seed, builder="bfs", x=x, sigma=sigma
    )


def _check_pair(emb: Embedding, u: int, v: int) -> None:
    if not (0 <= u < emb.n and 0 <= v < emb.n):
        raise ParameterError(f"node pair ({u}, {v}) out of range for n={emb.n}")
    if emb.D == 0:
        raise ParameterError("embedding has no coordinates")


def lower_bound(emb: Embedding, u: int, v: int):
    """Infinity-norm gap between the two rows; never exceeds d(u, v).

    Coordinates where either side is unreached are skipped; if every
    coordinate is skipped the bound degrades to 0.  Integer for builder
    "bfs", float for "gnn".
    """
    _check_pair(emb, u, v)
    xu = emb.x[u]
    xv = emb.x[v]
    if emb.builder == "bfs":
        valid = (xu != UNREACHED) & (xv != UNREACHED)
        if not valid.any():
            return 0
        return int(np.abs(xu[valid] - xv[valid]).max())
    valid = np.isfinite(xu) & np.isfinite(xv)
    if not valid.any():
        return 0.0
    return float(np.abs(xu[valid] - xv[valid]).max())


def upper_bound(emb: Embedding, u: int, v: int):
    """Best x_u[i] + x_v[j] over coordinate pairs with equal sigma.

    Returns None when no coordinate pair matches (possible only across
    components or without a size-1 set).  Learned embeddings are refused:
    predicted distances saturate, which inflates sums unpredictably, so
    only the lower bound is meaningful there.
    """
    if emb.builder != "bfs":
        raise UnsupportedOperationError(
            f"upper bounds are not defined for builder {emb.builder!r} embeddings"
        )
    _check_pair(emb, u, v)
    lands_u, mins_u = _min_per_landmark(emb.sigma[u], emb.x[u])
    lands_v, mins_v = _min_per_landmark(emb.sigma[v], emb.x[v])
    common, iu, iv = np.intersect1d(lands_u, lands_v, assume_unique=True, return_indices=True)
    if common.size == 0:
        return None
    return int((mins_u[iu] + mins_v[iv]).min())


def _min_per_landmark(sig_row: np.ndarray, x_row: np.ndarray):
    """Group coordinates by sigma and keep the smallest x per landmark."""
    defined = sig_row >= 0
    sig = sig_row[defined]
    xs = x_row[defined]
    if sig.size == 0:
        return sig, xs
    order = np.argsort(sig, kind="stable")
    sig = sig[order]
    xs = xs[order]
    first = np.ones(sig.size, dtype=bool)
    first[1:] = sig[1:] != sig[:-1]
    return sig[first], np.minimum.reduceat(xs, np.flatnonzero(first))


@dataclass(frozen=True)
class BoundPair:
    """Lower/upper distance bracket; ub is None where undefined or skipped."""

    lb: float
    ub: float | None


def query(emb: Embedding, u: int, v: int, *, include_ub: bool | None = None) -> BoundPair:
    """Both bounds in one lookup.

    include_ub=None computes the upper bound exactly when the builder
    supports it; True forces the attempt (raising for learned
    embeddings); False skips it.
    """
    lb = lower_bound(emb, u, v)
    if include_ub is None:
        include_ub = emb.builder == "bfs"
    ub = upper_bound(emb, u, v) if include_ub else None
    return BoundPair(lb=lb, ub=ub)


# ------------------------------------------------------------------ file I/O


def write_embedding(emb: Embedding, sink) -> None:
    """Write the interchange format (magic LMEB, little-endian)."""
    if emb.M > 0xFFFF or emb.r > 0xFFFF or emb.R > 0xFFFFFFFF:
        raise FormatError("M, r, or R too large for the file header")
    header = bytearray()
    header += _EMB_MAGIC
    header += struct.pack("<H", _EMB_VERSION)
    header += struct.pack("<B", _BUILDER_CODES[emb.builder])
    header += struct.pack("<Q", emb.n)
    header += struct.pack("<H", emb.M)
    header += struct.pack("<H", emb.r)
    header += struct.pack("<I", emb.R)
    header += struct.pack("<Q", emb.seed & _MASK64)
    if emb.builder == "bfs":
        enc = emb.x.astype(np.uint64)
        enc[emb.x == UNREACHED] = _ALL_ONES
        x_bytes = enc.astype("<u8").tobytes()
        sig_bytes = emb.sigma.astype(np.int64).view(np.uint64).astype("<u8").tobytes()
        payload = bytes(header) + x_bytes + sig_bytes
    else:
        enc = np.ascontiguousarray(emb.x, dtype="<f8")
        bits = enc.view(np.uint64).copy()
        bits[~np.isfinite(emb.x)] = _ALL_ONES
        payload = bytes(header) + bits.astype("<u8").tobytes()
    _write_bytes(sink, payload)


def read_embedding(source) -> Embedding:
    """Read the interchange format written by write_embedding."""
    data = _read_bytes(source)
    header_len = 4 + 2 + 1 + 8 + 2 + 2 + 4 + 8
    if len(data) < header_len:
        raise FormatError("truncated embedding header")
    if data[:4] != _EMB_MAGIC:
        raise FormatError("bad magic bytes; not an embedding file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != _EMB_VERSION:
        raise FormatError(f"unsupported embedding format version {version}")
    (builder_code,) = struct.unpack_from("<B", data, 6)
    if builder_code not in _BUILDER_NAMES:
        raise FormatError(f"unknown builder code {builder_code}")
    builder = _BUILDER_NAMES[builder_code]
    (n,) = struct.unpack_from("<Q", data, 7)
    (M,) = struct.unpack_from("<H", data, 15)
    (r,) = struct.unpack_from("<H", data, 17)
    (R,) = struct.unpack_from("<I", data, 19)
    (seed,) = struct.unpack_from("<Q", data, 23)
    D = R * (r + 1)
    count = n * D
    pos = header_len

    raw_x, pos = _take_u64(data, pos, count, "coordinate")
    if builder == "bfs":
        unreached = raw_x == _ALL_ONES
        if np.any(raw_x[~unreached] > np.uint64(1 << 62)):
            raise FormatError("distance value out of range")
        x = np.where(unreached, np.uint64(0), raw_x).astype(np.int64)
        x[unreached] = UNREACHED
        raw_sig, pos = _take_u64(data, pos, count, "sigma")
        sigma = raw_sig.view(np.int64).copy()
        if np.any((sigma < -1) | (sigma >= np.int64(max(n, 1)))):
            raise FormatError("sigma id out of range")
        sigma = sigma.reshape(n, D)
    else:
        bits = raw_x.copy()
        x = bits.view(np.float64).copy()
        x[bits == _ALL_ONES] = np.inf
        sigma = None
    if pos != len(data):
        raise FormatError("trailing bytes after embedding payload")
    return Embedding(
        n=int(n), M=int(M), r=int(r), R=int(R), seed=int(seed), builder=builder,
        x=x.reshape(int(n), D), sigma=sigma,
    )


def write_family(fam: LandmarkFamily, sink) -> None:
    """Write a family as JSON (ids grouped by round, size-ascending)."""
    doc = {
        "format": "landmark-family",
        "version": 1,
        "n": fam.n,
        "M": fam.M,
        "r": fam.r,
        "R": fam.R,
        "seed": fam.seed,
        "sets": [[ids.tolist() for ids in round_sets] for round_sets in fam.sets],
    }
    text = json.dumps(doc, separators=(",", ":")) + "\n"
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)


def read_family(source) -> LandmarkFamily:
    """Read a family JSON document written by write_family."""
    if isinstance(source, (str, Path)) and Path(source).exists():
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, str):
        text = source
    else:
        text = source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"family file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != "landmark-family":
        raise FormatError("not a landmark family document")
    if doc.get("version") != 1:
        raise FormatError(f"unsupported family version {doc.get('version')}")
    try:
        sets = tuple(
            tuple(np.asarray(ids, dtype=np.int64) for ids in round_sets)
            for round_sets in doc["sets"]
        )
        fam = LandmarkFamily(
            n=int(doc["n"]), M=int(doc["M"]), r=int(doc["r"]), R=int(doc["R"]),
            seed=int(doc["seed"]), sets=sets,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed family document: {exc}") from None
    if any(ids.size and (ids.min() < 0 or ids.max() >= fam.n) for _, _, _, ids in fam.flat_sets()):
        raise FormatError("family contains node ids outside 0..n-1")
    return fam


def _take_u64(data: bytes, pos: int, count: int, what: str):
    nbytes = 8 * count
    if pos + nbytes > len(data):
        raise FormatError(f"truncated {what} block")
    arr = np.frombuffer(data, dtype="<u8", count=count, offset=pos)
    return arr, pos + nbytes


def _write_bytes(sink, payload: bytes) -> None:
    if isinstance(sink, (str, Path)):
        with open(sink, "wb") as fh:
            fh.write(payload)
    else:
        sink.write(payload)


def _read_bytes(source) -> bytes:
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            return fh.read()
    return source.read()
