"""Supervised landmark-distance datasets built through the core tool.

Inputs are one-hot indicator columns, one per distinct landmark in a
family file; targets are exact hop distances to those landmarks.  The
targets are never computed here: a throwaway family of size-1 sets is
handed to the core's embed command, whose coordinate columns are then
exactly the wanted per-landmark BFS distances (the distance dump).
Unreachable targets come back as +inf and are masked out of every loss.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coreio import (
    derive_seed,
    read_edgelist,
    read_embedding,
    read_family,
    run_core,
    singleton_family,
    write_family,
)
from .errors import FormatError, ParameterError


def onehot_columns(n: int, landmarks: np.ndarray) -> np.ndarray:
    """(n, L) float32 indicator block, one column per landmark."""
    landmarks = np.asarray(landmarks, dtype=np.int64)
    X = np.zeros((n, landmarks.size), dtype=np.float32)
    X[landmarks, np.arange(landmarks.size)] = 1.0
    return X


def distance_dump(graph_path, n: int, landmarks, workdir=None) -> np.ndarray:
    """Exact hop distances d(u, s) as an (n, L) float array, +inf where
    unreachable, pulled out of the core via a size-1-set family."""
    landmarks = np.asarray(landmarks, dtype=np.int64)
    fam = singleton_family(n, landmarks)
    with tempfile.TemporaryDirectory(dir=workdir) as tmp:
        fam_path = Path(tmp) / "dump_family.json"
        emb_path = Path(tmp) / "dump.lmeb"
        write_family(fam_path, fam)
        run_core("embed", graph_path, "--family-in", fam_path, "--out", emb_path)
        emb = read_embedding(emb_path)
    if emb.n != n or emb.x.shape[1] != landmarks.size:
        raise FormatError("distance dump does not match the requested landmarks")
    return emb.x


@dataclass
class LandmarkDataset:
    """Node-level regression data for one graph and one landmark family."""

    n: int
    edges: np.ndarray = field(repr=False)
    landmarks: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    idx_train: np.ndarray = field(repr=False)
    idx_val: np.ndarray = field(repr=False)
    idx_test: np.ndarray = field(repr=False)
    split_seed: int = 0

    @property
    def split_counts(self) -> dict:
        return {
            "train": int(self.idx_train.size),
            "val": int(self.idx_val.size),
            "test": int(self.idx_test.size),
        }


def make_dataset(graph_path, family_path, *, split_seed: int = 0, workdir=None) -> LandmarkDataset:
    """Build (inputs, targets, node split) for a graph/family pair.

    The split is over nodes in 50/25/25 train/val/test proportions; the
    literal counts land in the trained model's provenance.
    """
    n, edges = read_edgelist(graph_path)
    if n < 4:
        raise ParameterError("need at least 4 nodes to split into train/val/test")
    fam = read_family(family_path)
    if fam.n != n:
        raise FormatError(f"family sampled for {fam.n} nodes, graph has {n}")
    landmarks = fam.distinct_landmarks()
    if landmarks.size == 0:
        raise FormatError("family contains no landmarks")
    Y = distance_dump(graph_path, n, landmarks, workdir=workdir)
    X = onehot_columns(n, landmarks)
    rng = np.random.default_rng(derive_seed(split_seed, "gnn-node-split"))
    perm = rng.permutation(n)
    n_train = n // 2
    n_val = n // 4
    return LandmarkDataset(
        n=n,
        edges=edges,
        landmarks=landmarks,
        X=X,
        Y=Y,
        idx_train=np.sort(perm[:n_train]),
        idx_val=np.sort(perm[n_train : n_train + n_val]),
        idx_test=np.sort(perm[n_train + n_val :]),
        split_seed=int(split_seed),
    )
