"""End-to-end protocols pairing learned embeddings against exact ones.

The core's bench command generates each sweep cell's graph, pair sample,
and landmark family internally from documented seed streams.  To feed a
learned embedding into such a cell, the helpers here re-derive the cell
seeds, ask the core CLI to materialize the identical graph and family,
export predictions for them, and hand the file back to bench, which then
reports exact-vs-learned rows on the same graph and pairs.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import numpy as np

from .coreio import (
    derive_seed,
    format_sweep_spec,
    read_bench_csv,
    run_core,
    sweep_cell_seeds,
)
from .dataset import distance_dump, make_dataset, onehot_columns
from .errors import CoreCliError
from .export import export_embedding
from .models import GraphTensors
from .train import TrainConfig, TrainedPredictor, train


def train_on_er(
    n: int,
    lam: float,
    workdir,
    *,
    arch: str = "gcn",
    hidden=(32, 16, 8, 4),
    seed: int = 0,
    M: int = 2,
    r: int = 2,
    R: int = 8,
    epochs: int = 1000,
    patience: int = 100,
    dropout: float = 0.1,
    lr_lo: float = 0.01,
    lr_hi: float = 0.01,
):
    """Sample a sparse random graph and landmark family with the core
    CLI, build the dataset, and fit one model.

    The rate band defaults to collapsed (constant 0.01): cycling up to
    0.1 reliably wrecks training at these graph sizes.  Pass an open
    band to restore the full cyclic schedule.  Returns (predictor,
    dataset, paths) where paths holds the graph and family files.
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    graph_path = workdir / f"train_n{n}_lam{lam:g}_s{seed}.txt"
    fam_path = workdir / f"train_n{n}_lam{lam:g}_s{seed}_family.json"
    scratch_emb = workdir / f"train_n{n}_lam{lam:g}_s{seed}_bfs.lmeb"
    run_core(
        "generate", "--n", n, "--lambda", lam,
        "--seed", derive_seed(seed, "gnn-train-graph"), "--out", graph_path,
    )
    run_core(
        "embed", graph_path, "--M", M, "--r", r, "--R", R,
        "--seed", derive_seed(seed, "gnn-train-family"),
        "--family-out", fam_path, "--out", scratch_emb,
    )
    dataset = make_dataset(graph_path, fam_path, split_seed=seed, workdir=workdir)
    cfg = TrainConfig(
        arch=arch, hidden=tuple(hidden), n=dataset.n, lam=float(lam),
        epochs=epochs, patience=patience, dropout=dropout,
        lr_lo=lr_lo, lr_hi=lr_hi,
        seed=derive_seed(seed, "gnn-init"),
    )
    predictor = train(cfg, dataset)
    paths = {"graph": graph_path, "family": fam_path}
    return predictor, dataset, paths


def _materialize_cell(workdir: Path, tagbase: str, base_seed: int, cell_idx: int,
                      n: int, lam: float, M: int, r: int, R: int):
    """Recreate one sweep cell's graph and family through the core CLI."""
    graph_seed, _, fam_seed = sweep_cell_seeds(base_seed, cell_idx, 0)
    graph_path = workdir / f"{tagbase}_cell{cell_idx}.txt"
    fam_path = workdir / f"{tagbase}_cell{cell_idx}_family.json"
    scratch = workdir / f"{tagbase}_cell{cell_idx}_bfs.lmeb"
    run_core("generate", "--n", n, "--lambda", lam, "--seed", graph_seed, "--out", graph_path)
    run_core(
        "embed", graph_path, "--M", M, "--r", r, "--R", R, "--seed", fam_seed,
        "--family-out", fam_path, "--out", scratch,
    )
    return graph_path, fam_path


def transfer_run(
    train_sizes=(25, 50, 100, 200),
    *,
    eval_n: int = 1600,
    lam: float = 5.0,
    M: int = 2,
    r: int = 2,
    R: int = 8,
    pairs: int = 400,
    base_seed: int = 0,
    arch: str = "gcn",
    hidden=(32, 16, 8, 4),
    epochs: int = 1000,
    patience: int = 100,
    workdir,
) -> list[dict]:
    """Train at several sizes, always evaluating on one fixed graph.

    Every model is exported for the same evaluation graph and family and
    scored by one single-cell bench sweep, so the rows differ only in
    the training size.  Each result dict carries the learned row's lb
    metrics, the exact row's for reference, and the raw per-landmark
    prediction MSE (the two error notions need not coincide).
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    spec_path = workdir / "transfer_spec.txt"
    spec_path.write_text(
        format_sweep_spec(
            {
                "n": eval_n, "lambda": lam, "M": M, "theta": 0.25, "eps": 0.5,
                "constant": 1.0, "builder": ("bfs", "gnn"), "R": R, "r": r,
                "pairs": pairs, "reps": 1, "seed": base_seed,
            }
        ),
        encoding="utf-8",
    )
    graph_path, fam_path = _materialize_cell(
        workdir, "transfer_eval", base_seed, 0, eval_n, lam, M, r, R
    )
    from .coreio import read_edgelist, read_family

    fam = read_family(fam_path)
    landmarks = fam.distinct_landmarks()
    d_true = distance_dump(graph_path, fam.n, landmarks, workdir=workdir)
    n_eval, edges_eval = read_edgelist(graph_path)
    adj_eval = GraphTensors(n_eval, edges_eval)
    finite = np.isfinite(d_true)

    results = []
    for i, size in enumerate(train_sizes):
        predictor, dataset, _ = train_on_er(
            int(size), lam, workdir, arch=arch, hidden=hidden,
            seed=derive_seed(base_seed, "gnn-transfer", i),
            M=M, r=r, R=R, epochs=epochs, patience=patience,
        )
        emb_path = workdir / f"transfer_gnn_n{size}.lmeb"
        export_embedding(predictor, graph_path, fam_path, emb_path)
        csv_path = workdir / f"transfer_n{size}.csv"
        run_core("bench", spec_path, "--gnn-embedding", emb_path, "--out", csv_path)
        rows = read_bench_csv(csv_path)
        gnn_rows = [row for row in rows if row["builder"] == "gnn"]
        bfs_rows = [row for row in rows if row["builder"] == "bfs"]
        if len(gnn_rows) != 1 or len(bfs_rows) != 1:
            raise CoreCliError(f"expected one row per builder, got {len(rows)}")
        if gnn_rows[0]["pairs"] == 0:
            raise CoreCliError("bench rejected the exported embedding")
        pred = np.maximum(predictor.predict(adj_eval, onehot_columns(n_eval, landmarks)), 0.0)
        raw_mse = float(np.mean((pred[finite] - d_true[finite]) ** 2))
        results.append(
            {
                "train_n": int(size),
                "mse_lb": gnn_rows[0]["mse_lb"],
                "mean_rel_err_lb": gnn_rows[0]["mean_rel_err_lb"],
                "bfs_mse_lb": bfs_rows[0]["mse_lb"],
                "raw_mse": raw_mse,
                "val_mse": predictor.provenance["best_val_mse"],
                "epochs_run": predictor.provenance["epochs_run"],
            }
        )
    return results


def paired_lambda_run(
    lams=(5.0, 6.0),
    R_list=(2, 8),
    *,
    eval_n: int = 800,
    train_n: int = 800,
    M: int = 2,
    r: int = 2,
    pairs: int = 400,
    base_seed: int = 0,
    arch: str = "gcn",
    hidden=(64, 32, 16, 8),
    epochs: int = 1000,
    patience: int = 100,
    workdir,
) -> dict:
    """Exact-vs-learned lower bounds across mean degrees and round counts.

    One model is trained per mean degree (a model only transfers within
    its degree regime) and exported for every sweep cell of a joint
    (lambda, R) grid; a single bench call then yields paired rows per
    cell.  Returns {(lam, R): {"bfs": row, "gnn": row}}.

    The defaults train at the evaluation size: the learned bounds are
    only competitive with the exact ones when the training distance
    distribution matches the evaluation graph (models trained much
    smaller or larger than eval_n lose on every cell).
    """
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    lams = tuple(float(v) for v in lams)
    R_list = tuple(int(v) for v in R_list)
    spec_path = workdir / "paired_spec.txt"
    spec_path.write_text(
        format_sweep_spec(
            {
                "n": eval_n, "lambda": lams, "M": M, "theta": 0.25, "eps": 0.5,
                "constant": 1.0, "builder": ("bfs", "gnn"), "R": R_list, "r": r,
                "pairs": pairs, "reps": 1, "seed": base_seed,
            }
        ),
        encoding="utf-8",
    )
    models = {}
    for j, lam in enumerate(lams):
        predictor, _, _ = train_on_er(
            train_n, lam, workdir, arch=arch, hidden=hidden,
            seed=derive_seed(base_seed, "gnn-paired", j),
            M=M, r=r, R=max(R_list), epochs=epochs, patience=patience,
        )
        models[lam] = predictor

    # bench cells enumerate (lambda, R) in product order; exported files
    # must be passed in exactly that order
    emb_paths = []
    for cell_idx, (lam, R) in enumerate(itertools.product(lams, R_list)):
        graph_path, fam_path = _materialize_cell(
            workdir, "paired_eval", base_seed, cell_idx, eval_n, lam, M, r, R
        )
        emb_path = workdir / f"paired_gnn_cell{cell_idx}.lmeb"
        export_embedding(models[lam], graph_path, fam_path, emb_path)
        emb_paths.append(emb_path)

    csv_path = workdir / "paired.csv"
    argv = ["bench", spec_path]
    for p in emb_paths:
        argv += ["--gnn-embedding", p]
    run_core(*argv, "--out", csv_path)
    rows = read_bench_csv(csv_path)
    out = {}
    row_iter = iter(rows)
    for lam, R in itertools.product(lams, R_list):
        cell_rows = {}
        for builder in ("bfs", "gnn"):
            row = next(row_iter)
            if row["builder"] != builder or row["R"] != R:
                raise CoreCliError("bench rows are not in the expected cell order")
            if row["pairs"] == 0:
                raise CoreCliError(f"bench cell (lam={lam}, R={R}, {builder}) failed")
            cell_rows[builder] = row
        out[(lam, R)] = cell_rows
    return out
