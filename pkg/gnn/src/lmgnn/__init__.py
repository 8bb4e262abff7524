"""Learned landmark-distance embeddings for the lmdist toolkit.

Trains message-passing models to predict hop distances from nodes to
landmark sets and exports the predictions in the core's embedding
interchange format, where they serve as drop-in lower-bound coordinates.
The core toolkit is consumed strictly through its command line and file
formats; nothing here imports it.
"""

from .coreio import (
    BENCH_COLUMNS,
    EmbeddingFile,
    FamilyFile,
    core_cli,
    derive_seed,
    format_sweep_spec,
    read_bench_csv,
    read_edgelist,
    read_embedding,
    read_family,
    run_core,
    singleton_family,
    sweep_cell_seeds,
    write_family,
    write_gnn_embedding,
)
from .dataset import LandmarkDataset, distance_dump, make_dataset, onehot_columns
from .errors import CoreCliError, FormatError, LmgnnError, ParameterError, TrainingError
from .experiments import paired_lambda_run, train_on_er, transfer_run
from .export import export_embedding, predict_landmark_distances, saturation_probe
from .models import (
    ARCHITECTURES,
    NINE_LAYOUTS,
    DistancePredictor,
    GATLayer,
    GCNLayer,
    GINLayer,
    GraphTensors,
    SAGELayer,
)
from .train import TrainConfig, TrainedPredictor, learning_rate, train

__version__ = "0.1.0"

__all__ = [
    "ARCHITECTURES",
    "BENCH_COLUMNS",
    "CoreCliError",
    "DistancePredictor",
    "EmbeddingFile",
    "FamilyFile",
    "FormatError",
    "GATLayer",
    "GCNLayer",
    "GINLayer",
    "GraphTensors",
    "LandmarkDataset",
    "LmgnnError",
    "NINE_LAYOUTS",
    "ParameterError",
    "SAGELayer",
    "TrainConfig",
    "TrainedPredictor",
    "TrainingError",
    "core_cli",
    "derive_seed",
    "distance_dump",
    "export_embedding",
    "format_sweep_spec",
    "learning_rate",
    "make_dataset",
    "onehot_columns",
    "paired_lambda_run",
    "predict_landmark_distances",
    "read_bench_csv",
    "read_edgelist",
    "read_embedding",
    "read_family",
    "run_core",
    "saturation_probe",
    "singleton_family",
    "sweep_cell_seeds",
    "train",
    "train_on_er",
    "transfer_run",
    "write_family",
    "write_gnn_embedding",
    "__version__",
]
