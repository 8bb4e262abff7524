"""Training loop: squared-error regression on landmark distances.

The recipe is fixed: Adam with weight decay, a cyclic cosine learning
rate, an epoch cap with early stopping on validation error, and the best
validation snapshot kept as the result.  Every run records its literal
split counts, schedule parameters, and loss curve in the provenance
dict so a saved model states exactly how it was produced.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .dataset import LandmarkDataset
from .errors import ParameterError, TrainingError
from .models import ARCHITECTURES, NINE_LAYOUTS, DistancePredictor, GraphTensors


@dataclass(frozen=True)
class TrainConfig:
    """Architecture, layout, and optimization settings for one model.

    hidden must be one of the nine supported width layouts; the two
    bookend layers are always sized to isqrt(n) of the training graph,
    so depth = len(hidden) + 2 message-passing layers.
    """

    arch: str
    hidden: tuple
    n: int
    lam: float
    epochs: int = 1000
    patience: int = 100
    lr: float = 0.01
    weight_decay: float = 1e-4
    lr_lo: float = 0.001
    lr_hi: float = 0.1
    half_period: int = 20
    cycles: int = 10
    dropout: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(w) for w in self.hidden))
        if self.arch not in ARCHITECTURES:
            raise ParameterError(f"unknown architecture {self.arch!r}")
        if self.hidden not in NINE_LAYOUTS:
            raise ParameterError(
                f"hidden widths {self.hidden} are not one of the supported layouts"
            )
        if self.n < 4:
            raise ParameterError("training graph must have at least 4 nodes")
        if self.lam <= 0:
            raise ParameterError("lam must be positive")
        if self.epochs < 1 or self.patience < 1:
            raise ParameterError("epochs and patience must be at least 1")
        if self.lr <= 0 or self.weight_decay < 0:
            raise ParameterError("lr must be positive and weight_decay nonnegative")
        if not 0 < self.lr_lo <= self.lr_hi:
            raise ParameterError("need 0 < lr_lo <= lr_hi")
        if self.half_period < 1 or self.cycles < 1:
            raise ParameterError("half_period and cycles must be at least 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ParameterError("dropout must lie in [0, 1)")

    @property
    def depth(self) -> int:
        """Message-passing layers: two bookends plus the hidden stack."""
        return len(self.hidden) + 2

    @property
    def bookend_width(self) -> int:
        return math.isqrt(self.n)

    @property
    def widths(self) -> tuple:
        return (self.bookend_width,) + self.hidden + (self.bookend_width,)


def learning_rate(cfg: TrainConfig, epoch: int) -> float:
    """Cyclic cosine between lr_lo and lr_hi.

    Each cycle rises from the floor to the peak and back over
    2*half_period epochs; after the configured number of cycles the
    rate stays at the floor.  Collapsing the band (lr_lo == lr_hi)
    gives a constant rate, which is what the desk-scale experiment
    drivers use: on the tiny graphs they train on, excursions to the
    top of the band reliably knock the model back to predicting the
    mean, and the best-snapshot rule then keeps a barely-trained model.
    """
    period = 2 * cfg.half_period
    if epoch >= period * cfg.cycles:
        return cfg.lr_lo
    phase = epoch % period
    return cfg.lr_lo + (cfg.lr_hi - cfg.lr_lo) * (1 - math.cos(math.pi * phase / cfg.half_period)) / 2


@dataclass
class TrainedPredictor:
    """Weights plus the provenance of how they were obtained."""

    config: TrainConfig
    state: dict = field(repr=False)
    provenance: dict = field(repr=False)

    def model(self) -> DistancePredictor:
        """Rebuild the network in eval mode; inference is then a pure
        function of weights and inputs."""
        net = DistancePredictor(self.config.arch, self.config.widths, self.config.dropout)
        net.load_state_dict(self.state)
        net.eval()
        return net

    @property
    def calibration(self) -> tuple:
        """(alpha, beta) of the held-out affine fit pred = alpha + beta*true."""
        cal = self.provenance.get("calibration", {})
        return float(cal.get("alpha", 0.0)), float(cal.get("beta", 1.0))

    def predict(self, adj: GraphTensors, onehot: np.ndarray, chunk: int = 16) -> np.ndarray:
        """Calibrated distance predictions for (n, L) indicator columns.

        Applies the inverse of the held-out affine fit to the raw network
        output.  Squared-error training shrinks predictions toward the
        target mean, and any common shrink factor carries straight through
        to the coordinate differences that distance bounds are built from,
        so the scale is restored here rather than left to consumers.
        """
        alpha, beta = self.calibration
        return (self.model().predict(adj, onehot, chunk=chunk) - alpha) / beta

    def save(self, path) -> None:
        torch.save(
            {
                "config": asdict(self.config),
                "state": self.state,
                "provenance": self.provenance,
            },
            path,
        )

    @classmethod
    def load(cls, path) -> "TrainedPredictor":
        blob = torch.load(path, weights_only=True)
        cfg = blob["config"]
        cfg["hidden"] = tuple(cfg["hidden"])
        return cls(
            config=TrainConfig(**cfg),
            state=blob["state"],
            provenance=blob["provenance"],
        )


def _masked_mse(pred: torch.Tensor, Y: torch.Tensor, mask: torch.Tensor):
    """Mean squared error over True entries of mask; None if empty."""
    if not bool(mask.any()):
        return None
    diff = (pred - Y)[mask]
    return (diff * diff).mean()


def train(cfg: TrainConfig, dataset: LandmarkDataset) -> TrainedPredictor:
    """Fit the configured model to one dataset.

    Minimizes squared error on training nodes across every landmark
    column; unreachable targets are masked out.  Early stopping watches
    validation error and the best snapshot wins.  A non-finite loss
    aborts with a training error.
    """
    if dataset.n != cfg.n:
        raise ParameterError(f"config declares n={cfg.n}, dataset has n={dataset.n}")
    torch.manual_seed(cfg.seed)
    adj = GraphTensors(dataset.n, dataset.edges)
    cols = torch.as_tensor(dataset.X.T, dtype=torch.float32).unsqueeze(-1)
    Y = torch.as_tensor(dataset.Y.T, dtype=torch.float32)
    finite = torch.isfinite(Y)
    Y = torch.where(finite, Y, torch.zeros_like(Y))

    def node_mask(idx: np.ndarray) -> torch.Tensor:
        m = torch.zeros(dataset.n, dtype=torch.bool)
        m[torch.as_tensor(idx)] = True
        return finite & m.unsqueeze(0)

    train_mask = node_mask(dataset.idx_train)
    val_mask = node_mask(dataset.idx_val)
    if not bool(train_mask.any()):
        raise ParameterError("no reachable training targets")
    # tiny or disconnected fixtures can leave validation empty; early
    # stopping then falls back to the training loss
    stop_mask = val_mask if bool(val_mask.any()) else train_mask

    model = DistancePredictor(cfg.arch, cfg.widths, cfg.dropout)
    # starting the readout bias at the mean reachable target skips the
    # phase where the optimizer crushes every weight toward the mean,
    # which otherwise strands small models in a constant-prediction basin
    bias_init = float(Y[train_mask].mean())
    with torch.no_grad():
        model.readout.bias.fill_(bias_init)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr, weight_decay=cfg.weight_decay)

    def evaluate(mask: torch.Tensor) -> float:
        model.eval()
        with torch.no_grad():
            loss = _masked_mse(model(adj, cols), Y, mask)
        return float("nan") if loss is None else float(loss)

    initial_train = evaluate(train_mask)
    best_val = evaluate(stop_mask)
    best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
    best_epoch = -1
    stale = 0
    curve = []
    final_train = initial_train
    epochs_run = 0
    for epoch in range(cfg.epochs):
        lr = learning_rate(cfg, epoch)
        for group in opt.param_groups:
            group["lr"] = lr
        model.train()
        opt.zero_grad()
        loss = _masked_mse(model(adj, cols), Y, train_mask)
        if not bool(torch.isfinite(loss)):
            raise TrainingError(f"loss became non-finite at epoch {epoch}")
        loss.backward()
        opt.step()
        val = evaluate(stop_mask)
        final_train = float(loss.detach())
        epochs_run = epoch + 1
        curve.append((epoch, final_train, val, lr))
        if math.isfinite(val) and val < best_val - 1e-12:
            best_val = val
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    # calibration: the squared-error fit pulls predictions toward the
    # target mean (slope of pred-vs-true below 1), and that slope
    # multiplies every coordinate difference downstream; fit the affine
    # on held-out nodes with the best weights and store it for inversion
    model.load_state_dict(best_state)
    model.eval()
    with torch.no_grad():
        fit_pred = model(adj, cols)
    fit_true = Y[stop_mask].numpy()
    fit_est = fit_pred[stop_mask].numpy()
    alpha, beta, fit_on = 0.0, 1.0, "identity"
    if fit_true.size >= 8 and float(np.var(fit_true)) > 0.0:
        slope, intercept = np.polyfit(fit_true, fit_est, 1)
        # a near-flat or inverted fit means the model collapsed; inverting
        # it would blow predictions up, so keep the raw outputs instead
        if slope >= 0.2:
            alpha, beta = float(intercept), float(slope)
            fit_on = "val" if bool(val_mask.any()) else "train"

    provenance = {
        "split_counts": dataset.split_counts,
        "split_seed": dataset.split_seed,
        "landmarks": int(dataset.landmarks.size),
        "masked_targets": int((~torch.isfinite(torch.as_tensor(dataset.Y))).sum()),
        "epochs_run": epochs_run,
        "best_epoch": best_epoch,
        "best_val_mse": best_val,
        "initial_train_mse": initial_train,
        "final_train_mse": final_train,
        "early_stop_on": "val" if bool(val_mask.any()) else "train",
        "readout_bias_init": bias_init,
        "calibration": {
            "alpha": alpha,
            "beta": beta,
            "fit_on": fit_on,
            "samples": int(fit_true.size),
        },
        "schedule": {
            "kind": "cyclic-cosine",
            "lr_lo": cfg.lr_lo,
            "lr_hi": cfg.lr_hi,
            "half_period": cfg.half_period,
            "cycles": cfg.cycles,
            "optimizer_lr": cfg.lr,
            "weight_decay": cfg.weight_decay,
        },
        "curve": curve,
        # plain str: TorchVersion objects would break weights-only loading
        "torch_version": str(torch.__version__),
    }
    return TrainedPredictor(config=cfg, state=best_state, provenance=provenance)
