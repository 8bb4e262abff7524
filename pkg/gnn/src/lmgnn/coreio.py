"""Bridge to the core toolkit: file formats and the command-line tool.

This package never imports the core package.  Everything it needs goes
through the core's documented surface: the `lmdist` executable, the text
edge list, the landmark-family JSON, the binary embedding format (magic
LMEB), the bench CSV schema, and the published seed-derivation rule.  The
readers and writers here are independent implementations of those layouts
so that a format drift on either side shows up as a test failure instead
of silently shared code.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import shutil
import struct
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CoreCliError, FormatError, ParameterError

MASK64 = (1 << 64) - 1
_EMB_MAGIC = b"LMEB"
_EMB_VERSION = 1
_BUILDER_CODES = {"bfs": 0, "gnn": 1}
_BUILDER_NAMES = {code: name for name, code in _BUILDER_CODES.items()}
_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)

BENCH_COLUMNS = (
    "graph_source", "n", "m", "lambda", "M", "r", "R", "seed", "builder",
    "pairs", "mse_lb", "mean_rel_err_lb", "viol_rate_lb_eps",
    "viol_rate_ub_eps", "build_ms", "query_us_per_pair",
)
_BENCH_INT = {"n", "m", "M", "r", "R", "seed", "pairs"}
_BENCH_STR = {"graph_source", "builder"}


# ------------------------------------------------------------ seed rule

def derive_seed(seed: int, tag: str, *indices: int) -> int:
    """The core's published stream derivation, reimplemented.

    SeedSequence([seed, sha256(tag)[:8] little-endian, *indices]) collapsed
    to a single 64-bit value.  Reproducing it lets this package regenerate
    the exact graph and landmark family a bench sweep cell used, via the
    core CLI, without touching core internals.
    """
    digest = hashlib.sha256(tag.encode("utf-8")).digest()
    entropy = [int(seed) & MASK64, int.from_bytes(digest[:8], "little")]
    entropy.extend(int(i) & MASK64 for i in indices)
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def sweep_cell_seeds(base_seed: int, cell_idx: int, rep: int = 0) -> tuple[int, int, int]:
    """(graph, pairs, family) seeds for one sweep cell, per the bench docs."""
    return (
        derive_seed(base_seed, "sweep-graph", cell_idx, rep),
        derive_seed(base_seed, "sweep-pairs", cell_idx, rep),
        derive_seed(base_seed, "sweep-family", cell_idx, rep),
    )


# ------------------------------------------------------------- core CLI

def core_cli() -> list[str]:
    """Argv prefix for the core tool; prefers the installed entry point."""
    exe = shutil.which("lmdist")
    if exe is not None:
        return [exe]
    return [sys.executable, "-m", "lmdist.cli"]


def run_core(*args: str, cwd=None) -> str:
    """Run one core subcommand and return its stdout."""
    argv = core_cli() + [str(a) for a in args]
    proc = subprocess.run(argv, capture_output=True, text=True, cwd=cwd)
    if proc.returncode != 0:
        raise CoreCliError(
            f"core command {' '.join(argv)} exited {proc.returncode}: "
            f"{proc.stderr.strip()}"
        )
    return proc.stdout


# ----------------------------------------------------------- graph text

def read_edgelist(source) -> tuple[int, np.ndarray]:
    """Parse a canonical text edge list into (n, undirected edge array).

    Expects the layout the core writes: ids 0..n-1, '#' comments, one
    "u v" pair per line, isolated nodes as "u u" self-loop markers.
    Self-loops register the node and contribute no edge; duplicates
    collapse.  Returns edges as an (m, 2) int64 array with u < v.
    """
    if isinstance(source, (str, Path)) and "\n" not in str(source):
        raw = Path(source).read_bytes()
        if raw[:4] == b"LMGR":
            raise FormatError(
                "binary graph files are not supported here; write the text form"
            )
        text = raw.decode("utf-8")
    else:
        text = source if isinstance(source, str) else source.read()
    us: list[int] = []
    vs: list[int] = []
    top = -1
    for lineno, line in enumerate(io.StringIO(text), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise FormatError(f"line {lineno}: expected two fields, got {len(parts)}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer node label") from None
        if a < 0 or b < 0:
            raise FormatError(f"line {lineno}: negative node label")
        top = max(top, a, b)
        if a != b:
            us.append(min(a, b))
            vs.append(max(a, b))
    n = top + 1
    if not us:
        return n, np.empty((0, 2), dtype=np.int64)
    edges = np.unique(np.stack([us, vs], axis=1), axis=0).astype(np.int64)
    return n, edges


# -------------------------------------------------------- family (JSON)

@dataclass(frozen=True)
class FamilyFile:
    """A landmark family as stored on disk: R rounds x (r+1) sets."""

    n: int
    M: int
    r: int
    R: int
    seed: int
    sets: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.sets) != self.R:
            raise FormatError("family must contain exactly R rounds")
        for round_sets in self.sets:
            if len(round_sets) != self.r + 1:
                raise FormatError("each round must contain r+1 sets")
            for i, ids in enumerate(round_sets):
                if len(ids) != self.M**i:
                    raise FormatError(f"set of index {i} must have size M^{i}")

    @property
    def D(self) -> int:
        return self.R * (self.r + 1)

    def flat_sets(self):
        """Yield (column, ids) in the round-major order the core uses."""
        c = 0
        for round_sets in self.sets:
            for ids in round_sets:
                yield c, ids
                c += 1

    def distinct_landmarks(self) -> np.ndarray:
        if not self.sets:
            return np.array([], dtype=np.int64)
        return np.unique(np.concatenate([ids for _, ids in self.flat_sets()]))


def read_family(path) -> FamilyFile:
    text = Path(path).read_text(encoding="utf-8")
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
        fam = FamilyFile(
            n=int(doc["n"]), M=int(doc["M"]), r=int(doc["r"]), R=int(doc["R"]),
            seed=int(doc["seed"]), sets=sets,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed family document: {exc}") from None
    for _, ids in fam.flat_sets():
        if ids.size and (ids.min() < 0 or ids.max() >= fam.n):
            raise FormatError("family contains node ids outside 0..n-1")
    return fam


def write_family(path, fam: FamilyFile) -> None:
    doc = {
        "format": "landmark-family",
        "version": 1,
        "n": fam.n,
        "M": fam.M,
        "r": fam.r,
        "R": fam.R,
        "seed": fam.seed,
        "sets": [[np.asarray(ids).tolist() for ids in rs] for rs in fam.sets],
    }
    Path(path).write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")


def singleton_family(n: int, landmarks) -> FamilyFile:
    """One size-1 set per round: column c of the resulting embedding is
    the exact hop distance to landmarks[c].  This is the distance-dump
    trick used to pull BFS targets out of the core."""
    ids = np.asarray(landmarks, dtype=np.int64)
    if ids.size == 0:
        raise ParameterError("need at least one landmark")
    if ids.min() < 0 or ids.max() >= n:
        raise ParameterError("landmark ids must lie in 0..n-1")
    sets = tuple((np.array([s], dtype=np.int64),) for s in ids)
    return FamilyFile(n=n, M=2, r=0, R=int(ids.size), seed=0, sets=sets)


# --------------------------------------------------- embedding (binary)

@dataclass(frozen=True)
class EmbeddingFile:
    """Decoded embedding: x[u][c] as float64, +inf where undefined."""

    n: int
    M: int
    r: int
    R: int
    seed: int
    builder: str
    x: np.ndarray = field(repr=False)

    @property
    def D(self) -> int:
        return self.R * (self.r + 1)


def read_embedding(path) -> EmbeddingFile:
    data = Path(path).read_bytes()
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
    D = int(R) * (int(r) + 1)
    count = int(n) * D
    if len(data) < header_len + 8 * count:
        raise FormatError("truncated coordinate block")
    raw = np.frombuffer(data, dtype="<u8", count=count, offset=header_len)
    if builder == "bfs":
        x = raw.astype(np.float64)
        x[raw == _ALL_ONES] = np.inf
    else:
        x = raw.copy().view(np.float64).copy()
        x[raw == _ALL_ONES] = np.inf
    return EmbeddingFile(
        n=int(n), M=int(M), r=int(r), R=int(R), seed=int(seed),
        builder=builder, x=x.reshape(int(n), D),
    )


def write_gnn_embedding(path, *, n, M, r, R, seed, x) -> None:
    """Write real-valued coordinates under the learned-builder tag.

    The sigma block is omitted for this builder; non-finite entries are
    stored as the all-ones pattern the core decodes back to +inf.
    """
    x = np.ascontiguousarray(x, dtype="<f8")
    D = int(R) * (int(r) + 1)
    if x.shape != (int(n), D):
        raise FormatError(f"coordinate block must be shaped ({n}, {D}), got {x.shape}")
    if M > 0xFFFF or r > 0xFFFF or R > 0xFFFFFFFF:
        raise FormatError("M, r, or R too large for the file header")
    header = bytearray()
    header += _EMB_MAGIC
    header += struct.pack("<H", _EMB_VERSION)
    header += struct.pack("<B", _BUILDER_CODES["gnn"])
    header += struct.pack("<Q", int(n))
    header += struct.pack("<H", int(M))
    header += struct.pack("<H", int(r))
    header += struct.pack("<I", int(R))
    header += struct.pack("<Q", int(seed) & MASK64)
    bits = x.view(np.uint64).copy()
    bits[~np.isfinite(x)] = _ALL_ONES
    Path(path).write_bytes(bytes(header) + bits.astype("<u8").tobytes())


# ------------------------------------------------------------ bench CSV

def read_bench_csv(path) -> list[dict]:
    """Parse the core's fixed-schema sweep report into typed row dicts."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != BENCH_COLUMNS:
            raise FormatError(f"unexpected bench CSV header: {reader.fieldnames}")
        rows = []
        for raw in reader:
            row = {}
            for key, value in raw.items():
                if key in _BENCH_STR:
                    row[key] = value
                elif key in _BENCH_INT:
                    row[key] = int(value)
                else:
                    row[key] = float(value)
            rows.append(row)
    return rows


def format_sweep_spec(entries: dict) -> str:
    """Serialize a mapping into the flat key = values sweep format."""
    lines = []
    for key, value in entries.items():
        if isinstance(value, (list, tuple)):
            rhs = ", ".join(_spec_token(v) for v in value)
        else:
            rhs = _spec_token(value)
        lines.append(f"{key} = {rhs}")
    return "\n".join(lines) + "\n"


def _spec_token(v) -> str:
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            raise ParameterError("sweep values must be finite")
        return f"{v:.10g}"
    return str(v)
