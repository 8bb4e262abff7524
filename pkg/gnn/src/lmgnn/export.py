"""Turn a trained model into files the core toolkit consumes.

export_embedding predicts every node's distance to every landmark of a
family (calibrated, see TrainedPredictor.predict), takes the minimum
over each set's members (the same local reduction the exact builder
applies to its BFS results), clips at zero, and writes the real-valued
coordinates under the learned-builder tag.  The core accepts such files
for lower bounds and refuses upper bounds.
"""

from __future__ import annotations

import numpy as np

from .coreio import read_edgelist, read_family, write_gnn_embedding
from .dataset import distance_dump, onehot_columns
from .errors import FormatError
from .models import GraphTensors
from .train import TrainedPredictor


def export_embedding(predictor: TrainedPredictor, graph_path, family_path, out_path) -> np.ndarray:
    """Write predicted coordinates for a graph/family pair; returns the
    (n, D) coordinate block that was stored."""
    n, edges = read_edgelist(graph_path)
    fam = read_family(family_path)
    if fam.n != n:
        raise FormatError(f"family sampled for {fam.n} nodes, graph has {n}")
    adj = GraphTensors(n, edges)
    landmarks = fam.distinct_landmarks()
    pred = predictor.predict(adj, onehot_columns(n, landmarks))
    pred = np.maximum(pred, 0.0)
    col_of = {int(s): k for k, s in enumerate(landmarks)}
    x = np.empty((n, fam.D), dtype=np.float64)
    for c, ids in fam.flat_sets():
        cols = [col_of[int(s)] for s in np.asarray(ids)]
        x[:, c] = pred[:, cols].min(axis=1)
    write_gnn_embedding(
        out_path, n=n, M=fam.M, r=fam.r, R=fam.R, seed=fam.seed, x=x
    )
    return x


def predict_landmark_distances(predictor: TrainedPredictor, graph_path, landmarks) -> np.ndarray:
    """Raw per-landmark predictions (n, L), clipped at zero."""
    n, edges = read_edgelist(graph_path)
    adj = GraphTensors(n, edges)
    pred = predictor.predict(adj, onehot_columns(n, np.asarray(landmarks, dtype=np.int64)))
    return np.maximum(pred, 0.0)


def saturation_probe(
    predictor: TrainedPredictor,
    graph_path,
    *,
    landmarks=None,
    num_landmarks: int = 8,
    seed: int = 0,
    workdir=None,
) -> np.ndarray:
    """(d_true, d_pred) scatter rows for sampled node/landmark pairs.

    Exact distances come from the core's distance dump; unreachable
    pairs are dropped.  Useful for seeing predictions flatten once the
    true distance exceeds the model depth.
    """
    n, edges = read_edgelist(graph_path)
    if landmarks is None:
        from .coreio import derive_seed

        rng = np.random.default_rng(derive_seed(seed, "gnn-probe"))
        landmarks = rng.choice(n, size=min(num_landmarks, n), replace=False)
    landmarks = np.asarray(landmarks, dtype=np.int64)
    d_true = distance_dump(graph_path, n, landmarks, workdir=workdir)
    adj = GraphTensors(n, edges)
    d_pred = np.maximum(predictor.predict(adj, onehot_columns(n, landmarks)), 0.0)
    keep = np.isfinite(d_true)
    return np.stack([d_true[keep], d_pred[keep]], axis=1)
