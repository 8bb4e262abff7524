"""Undirected graphs in compressed sparse row form, plus generation and BFS.

Node ids are dense integers 0..n-1.  Neighbor lists are sorted ascending,
self-loops and duplicate edges are never stored, so equal graphs serialize
to identical bytes.  Distances use the UNREACHED sentinel (max int64) for
nodes outside the source's component; text formats render it as "inf".
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _cs_components

from ._seeds import derive_rng
from .errors import FormatError, ParameterError, ParseError

UNREACHED = np.int64(np.iinfo(np.int64).max)

_GRAPH_MAGIC = b"LMGR"
_GRAPH_VERSION = 1
_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


class Graph:
    """Immutable undirected unweighted graph.

    offsets[u]:offsets[u+1] indexes the sorted neighbor list of u inside
    the neighbors array.  Safe to share across threads after construction.
    """

    __slots__ = ("n", "offsets", "neighbors")

    def __init__(self, n: int, offsets, neighbors):
        self.n = int(n)
        self.offsets = np.ascontiguousarray(offsets, dtype=np.int64)
        self.neighbors = np.ascontiguousarray(neighbors, dtype=np.int64)
        if self.n < 0:
            raise ParameterError("node count must be nonnegative")
        if self.offsets.shape != (self.n + 1,):
            raise FormatError("offsets array must have length n+1")
        if self.offsets[0] != 0 or self.offsets[-1] != self.neighbors.shape[0]:
            raise FormatError("offsets do not span the neighbor array")

    @property
    def m(self) -> int:
        """Number of undirected edges."""
        return self.neighbors.shape[0] // 2

    def degree(self, u: int) -> int:
        return int(self.offsets[u + 1] - self.offsets[u])

    def adj(self, u: int) -> np.ndarray:
        """Sorted neighbor ids of u (a view, do not mutate)."""
        return self.neighbors[self.offsets[u] : self.offsets[u + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
        )

    def __hash__(self):
        return hash((self.n, self.neighbors.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    @classmethod
    def from_edges(cls, n: int, u, v) -> "Graph":
        """Build a canonical graph from edge endpoint arrays.

        Self-loops are dropped and duplicate edges collapsed, so the
        result is always in canonical form.
        """
        a, b, _, _ = _simplify_pairs(n, u, v)
        return cls._from_simple_pairs(n, a, b)

    @classmethod
    def _from_simple_pairs(cls, n: int, a: np.ndarray, b: np.ndarray) -> "Graph":
        # a, b are oriented (a < b), unique pairs
        src = np.concatenate([a, b])
        dst = np.concatenate([b, a])
        order = np.lexsort((dst, src))
        src = src[order]
        dst = dst[order]
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
        return cls(n, offsets, dst)


def _simplify_pairs(n: int, u, v):
    """Orient, drop self-loops, collapse duplicates.

    Returns (a, b, self_loops_dropped, duplicates_dropped) with a < b.
    """
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if u.shape != v.shape:
        raise ParameterError("endpoint arrays must have equal length")
    if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
        raise ParameterError("edge endpoint out of range")
    a = np.minimum(u, v)
    b = np.maximum(u, v)
    proper = a != b
    self_loops = int(u.size - np.count_nonzero(proper))
    a = a[proper]
    b = b[proper]
    # n <= ~3e9 keeps the pair key inside int64
    key = a * np.int64(n) + b
    key, idx = np.unique(key, return_index=True)
    duplicates = int(proper.sum() - key.size)
    return a[idx], b[idx], self_loops, duplicates


def er_generate(n: int, lam: float, seed: int) -> Graph:
    """Sample a sparse random graph with edge probability lam/n.

    Each of the C(n,2) node pairs is an edge independently with
    probability p = lam/n.  Pairs are enumerated row-major ((0,1), (0,2),
    ..., (1,2), ...) and selected by sampling geometric gaps between hits,
    so the cost is proportional to the edge count, not to n^2.
    Deterministic for fixed (n, lam, seed).
    """
    n = int(n)
    if n <= 0:
        raise ParameterError("n must be positive")
    if lam < 0 or lam > n:
        raise ParameterError("lam must lie in [0, n]")
    p = lam / n
    total = n * (n - 1) // 2
    empty = np.array([], dtype=np.int64)
    if p == 0.0 or total == 0:
        return Graph._from_simple_pairs(n, empty, empty)

    rng = derive_rng(seed, "er-generate")
    if p >= 1.0:
        slots = np.arange(total, dtype=np.int64)
    else:
        expected = total * p
        batch = max(int(expected + 6.0 * np.sqrt(expected)) + 16, 1024)
        chunks = []
        last = -1
        while last < total:
            gaps = rng.geometric(p, size=batch).astype(np.int64)
            positions = np.cumsum(gaps) + last
            last = int(positions[-1])
            chunks.append(positions)
        slots = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
        slots = slots[slots < total]

    a, b = _slots_to_pairs(n, slots)
    return Graph._from_simple_pairs(n, a, b)


def _slots_to_pairs(n: int, slots: np.ndarray):
    """Invert row-major upper-triangle slot indices to pairs (i, j), i < j."""
    # slots before row i: C(i) = i*(2n - i - 1)/2
    t = slots.astype(np.float64)
    x = 2.0 * n - 1.0
    i = np.floor((x - np.sqrt(x * x - 8.0 * t)) / 2.0).astype(np.int64)
    i = np.clip(i, 0, n - 2)

    def row_start(i_arr):
        return i_arr * (2 * n - i_arr - 1) // 2

    # fix float rounding: C(i) <= t < C(i+1)
    for _ in range(2):
        too_high = row_start(i) > slots
        i[too_high] -= 1
        too_low = row_start(i + 1) <= slots
        i[too_low] += 1
    j = slots - row_start(i) + i + 1
    return i, j


def bfs(g: Graph, source: int, *, max_depth: int | None = None) -> np.ndarray:
    """Exact hop distances from source; UNREACHED outside its component.

    max_depth, when given, stops the search after that many levels
    (farther nodes stay UNREACHED).
    """
    if not 0 <= source < g.n:
        raise ParameterError(f"source {source} out of range for n={g.n}")
    dist = np.full(g.n, UNREACHED, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    offsets, nbrs = g.offsets, g.neighbors
    level = 0
    while frontier.size and (max_depth is None or level < max_depth):
        cand = _expand(offsets, nbrs, frontier)
        cand = cand[dist[cand] == UNREACHED]
        if cand.size == 0:
            break
        frontier = np.unique(cand)
        level += 1
        dist[frontier] = level
    return dist


def multi_source_bfs(g: Graph, sources) -> tuple[np.ndarray, np.ndarray]:
    """Distances to the nearest source and which source attains them.

    Returns (dist, closest).  dist[u] = min over the source set of the
    hop distance; closest[u] = the attaining source id, ties broken by
    the smallest source id; both UNREACHED / -1 where no source reaches u.
    Single frontier pass over the graph.
    """
    srcs = np.unique(np.asarray(sources, dtype=np.int64))
    if srcs.size == 0:
        raise ParameterError("source set must be nonempty")
    if srcs[0] < 0 or srcs[-1] >= g.n:
        raise ParameterError("source id out of range")
    dist = np.full(g.n, UNREACHED, dtype=np.int64)
    closest = np.full(g.n, -1, dtype=np.int64)
    dist[srcs] = 0
    closest[srcs] = srcs
    frontier = srcs
    offsets, nbrs = g.offsets, g.neighbors
    level = 0
    while frontier.size:
        counts = offsets[frontier + 1] - offsets[frontier]
        cand = _expand(offsets, nbrs, frontier)
        labels = np.repeat(closest[frontier], counts)
        new = dist[cand] == UNREACHED
        cand = cand[new]
        labels = labels[new]
        if cand.size == 0:
            break
        # smallest label per node wins: sort by (node, label), keep firsts
        order = np.lexsort((labels, cand))
        cand = cand[order]
        labels = labels[order]
        keep = np.ones(cand.size, dtype=bool)
        keep[1:] = cand[1:] != cand[:-1]
        frontier = cand[keep]
        level += 1
        dist[frontier] = level
        closest[frontier] = labels[keep]
    return dist, closest


def _expand(offsets: np.ndarray, nbrs: np.ndarray, frontier: np.ndarray) -> np.ndarray:
    """All neighbors of the frontier, concatenated (duplicates included)."""
    starts = offsets[frontier]
    counts = offsets[frontier + 1] - starts
    total = int(counts.sum())
    if total == 0:
        return np.array([], dtype=np.int64)
    cum = np.cumsum(counts)
    idx = np.arange(total, dtype=np.int64) + np.repeat(starts - (cum - counts), counts)
    return nbrs[idx]


@dataclass(frozen=True)
class ComponentLabeling:
    """Connected components; ids are ranked by size (0 = largest).

    Equal sizes are ranked by smallest member id.  sizes[i] is the node
    count of component i, so sizes is sorted descending.
    """

    labels: np.ndarray
    sizes: np.ndarray

    @property
    def count(self) -> int:
        return self.sizes.shape[0]


def components(g: Graph) -> ComponentLabeling:
    """Exact connected components with sizes sorted descending."""
    if g.n == 0:
        return ComponentLabeling(np.array([], dtype=np.int64), np.array([], dtype=np.int64))
    mat = csr_matrix(
        (np.ones(g.neighbors.shape[0], dtype=np.int8), g.neighbors, g.offsets),
        shape=(g.n, g.n),
    )
    ncomp, raw = _cs_components(mat, directed=False)
    sizes = np.bincount(raw, minlength=ncomp).astype(np.int64)
    first_member = np.full(ncomp, g.n, dtype=np.int64)
    np.minimum.at(first_member, raw, np.arange(g.n, dtype=np.int64))
    order = np.lexsort((first_member, -sizes))
    rank = np.empty(ncomp, dtype=np.int64)
    rank[order] = np.arange(ncomp, dtype=np.int64)
    return ComponentLabeling(rank[raw.astype(np.int64)], sizes[order])


def extract_lcc(g: Graph) -> Graph:
    """Induced subgraph on the largest component, ids remapped densely.

    Remapping preserves ascending original id order.  Ties between
    equal-size components go to the one with the smallest member id.
    """
    if g.n < 1:
        raise ParameterError("graph must have at least one node")
    comp = components(g)
    keep = comp.labels == 0
    new_id = np.cumsum(keep) - 1
    sub_n = int(keep.sum())
    node_mask = keep[np.repeat(np.arange(g.n), g.degrees())]
    nbr_mask = keep[g.neighbors]
    edge_keep = node_mask & nbr_mask
    src = np.repeat(new_id[np.arange(g.n)], g.degrees())[edge_keep]
    dst = new_id[g.neighbors[edge_keep]]
    offsets = np.zeros(sub_n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=sub_n), out=offsets[1:])
    return Graph(sub_n, offsets, dst)


@dataclass(frozen=True)
class IngestResult:
    """Canonical graph plus the original-label map and cleanup counts."""

    graph: Graph
    labels: np.ndarray  # labels[new_id] = original label
    self_loops_dropped: int
    duplicates_dropped: int


def ingest_edgelist(source) -> IngestResult:
    """Parse a whitespace-separated edge list into a canonical graph.

    Accepts a string, a path, or an iterable of lines.  Lines starting
    with '#' are ignored.  Arbitrary integer node labels are remapped to
    0..n-1 in ascending label order; self-loops are dropped (their labels
    still count as nodes) and duplicate edges collapsed, with counts
    reported in the result.
    """
    lines = _as_lines(source)
    us: list[int] = []
    vs: list[int] = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected two fields, got {len(parts)}")
        try:
            a = int(parts[0])
            b = int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer node label") from None
        us.append(a)
        vs.append(b)
    if not us:
        return IngestResult(
            Graph(0, np.zeros(1, dtype=np.int64), np.array([], dtype=np.int64)),
            np.array([], dtype=np.int64),
            0,
            0,
        )
    u_raw = np.array(us, dtype=np.int64)
    v_raw = np.array(vs, dtype=np.int64)
    labels = np.unique(np.concatenate([u_raw, v_raw]))
    u = np.searchsorted(labels, u_raw)
    v = np.searchsorted(labels, v_raw)
    n = labels.shape[0]
    a, b, self_loops, duplicates = _simplify_pairs(n, u, v)
    return IngestResult(Graph._from_simple_pairs(n, a, b), labels, self_loops, duplicates)


def _as_lines(source):
    if isinstance(source, str) and "\n" not in source and Path(source).exists():
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh
        return
    if isinstance(source, Path):
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh
        return
    if isinstance(source, str):
        yield from io.StringIO(source)
        return
    yield from source


def serialize_edgelist(g: Graph, sink=None, labels: np.ndarray | None = None) -> str | None:
    """Write the canonical text edge list; isolated nodes appear as "u u".

    The self-loop line keeps isolated nodes alive through a parse
    round-trip (ingest drops the loop but registers the label).  Returns
    the text when sink is None, otherwise writes to sink.
    """
    src = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees())
    dst = g.neighbors
    fwd = src < dst
    a = src[fwd]
    b = dst[fwd]
    isolated = np.flatnonzero(g.degrees() == 0)
    a = np.concatenate([a, isolated])
    b = np.concatenate([b, isolated])
    if labels is not None:
        a = labels[a]
        b = labels[b]
    buf = io.StringIO()
    for i in range(a.shape[0]):
        buf.write(f"{a[i]} {b[i]}\n")
    text = buf.getvalue()
    if sink is None:
        return text
    sink.write(text)
    return None


def write_graph(g: Graph, sink) -> None:
    """Write the binary graph format (magic LMGR, little-endian)."""
    payload = bytearray()
    payload += _GRAPH_MAGIC
    payload += struct.pack("<H", _GRAPH_VERSION)
    payload += struct.pack("<Q", g.n)
    payload += g.offsets.astype("<u8").tobytes()
    payload += g.neighbors.astype("<u8").tobytes()
    _write_bytes(sink, bytes(payload))


def read_graph(source) -> Graph:
    """Read the binary graph format written by write_graph."""
    data = _read_bytes(source)
    if len(data) < 14:
        raise FormatError("truncated graph header")
    if data[:4] != _GRAPH_MAGIC:
        raise FormatError("bad magic bytes; not a graph file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != _GRAPH_VERSION:
        raise FormatError(f"unsupported graph format version {version}")
    (n,) = struct.unpack_from("<Q", data, 6)
    pos = 14
    offsets, pos = _take_u64(data, pos, n + 1, "offsets")
    if offsets[0] != 0 or np.any(np.diff(offsets) < 0):
        raise FormatError("offsets not nondecreasing from zero")
    if offsets.size and offsets[-1] > (1 << 62):
        raise FormatError("neighbor count out of range")
    neighbors, pos = _take_u64(data, pos, int(offsets[-1]), "neighbors")
    if pos != len(data):
        raise FormatError("trailing bytes after neighbor array")
    if neighbors.size and neighbors.max() >= n:
        raise FormatError("neighbor id out of range")
    return Graph(n, offsets.astype(np.int64), neighbors.astype(np.int64))


def _take_u64(data: bytes, pos: int, count: int, what: str):
    nbytes = 8 * count
    if pos + nbytes > len(data):
        raise FormatError(f"truncated {what} array")
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
