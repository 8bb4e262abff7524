"""Message-passing layers and the distance predictor: shapes,
determinism, dropout, and receptive-field locality.

No core tool involved; everything here is pure tensor work on
hand-built graphs.
"""

import numpy as np
import pytest
import torch

from lmgnn import (
    ARCHITECTURES,
    NINE_LAYOUTS,
    DistancePredictor,
    GraphTensors,
    TrainConfig,
    onehot_columns,
)
from lmgnn.errors import ParameterError


def path_edges(n):
    return np.array([(i, i + 1) for i in range(n - 1)], dtype=np.int64)


# ------------------------------------------------------ config validation


def test_nine_layouts_accepted():
    assert len(NINE_LAYOUTS) == 9
    for hidden in NINE_LAYOUTS:
        cfg = TrainConfig(arch="gcn", hidden=hidden, n=100, lam=5.0)
        assert cfg.depth == len(hidden) + 2
        assert cfg.widths == (10,) + hidden + (10,)


@pytest.mark.parametrize(
    "hidden", [(), (100, 50), (64,), (64, 32, 16, 8, 4), (16, 32)]
)
def test_unsupported_layouts_rejected(hidden):
    with pytest.raises(ParameterError):
        TrainConfig(arch="gcn", hidden=hidden, n=100, lam=5.0)


def test_unknown_architecture_rejected():
    with pytest.raises(ParameterError):
        TrainConfig(arch="transformer", hidden=(32, 16), n=100, lam=5.0)
    with pytest.raises(ParameterError):
        DistancePredictor("transformer", (4, 4))


def test_predictor_rejects_degenerate_widths():
    with pytest.raises(ParameterError):
        DistancePredictor("gcn", (7,))
    with pytest.raises(ParameterError):
        DistancePredictor("gcn", (4, 0, 4))
    with pytest.raises(ParameterError):
        DistancePredictor("gcn", (4, 4), dropout=1.0)


def test_bookend_width_is_isqrt_of_n():
    cfg = TrainConfig(arch="gin", hidden=(32, 16), n=50, lam=3.0)
    assert cfg.widths[0] == cfg.widths[-1] == 7


# ------------------------------------------------------- forward / predict


@pytest.mark.parametrize("arch", sorted(ARCHITECTURES))
def test_forward_and_predict_shapes(arch):
    torch.manual_seed(0)
    n = 12
    adj = GraphTensors(n, path_edges(n))
    model = DistancePredictor(arch, (6, 5), dropout=0.1)
    cols = torch.zeros((3, n, 1))
    cols[0, 0, 0] = cols[1, 4, 0] = cols[2, 11, 0] = 1.0
    out = model(adj, cols)
    assert out.shape == (3, n)
    pred = model.predict(adj, onehot_columns(n, np.array([0, 4, 11])), chunk=2)
    assert pred.shape == (n, 3)
    assert pred.dtype == np.float64
    assert np.isfinite(pred).all()


@pytest.mark.parametrize("arch", sorted(ARCHITECTURES))
def test_eval_inference_is_deterministic(arch):
    torch.manual_seed(1)
    n = 10
    adj = GraphTensors(n, path_edges(n))
    model = DistancePredictor(arch, (6, 5), dropout=0.5)
    X = onehot_columns(n, np.array([0, 5]))
    a = model.predict(adj, X)
    b = model.predict(adj, X)
    np.testing.assert_array_equal(a, b)


def test_train_mode_dropout_perturbs_outputs():
    torch.manual_seed(2)
    n = 10
    adj = GraphTensors(n, path_edges(n))
    model = DistancePredictor("gcn", (8, 8), dropout=0.5)
    model.train()
    cols = torch.zeros((1, n, 1))
    cols[0, 0, 0] = 1.0
    a = model(adj, cols)
    b = model(adj, cols)
    assert not torch.equal(a, b)
    # predict() must leave the module in the mode it found it
    model.predict(adj, onehot_columns(n, np.array([0])))
    assert model.training


def test_predict_rejects_wrong_indicator_shape():
    adj = GraphTensors(4, path_edges(4))
    model = DistancePredictor("gcn", (4, 4))
    with pytest.raises(ParameterError):
        model.predict(adj, np.zeros((5, 2), dtype=np.float32))
    with pytest.raises(ParameterError):
        model.predict(adj, np.zeros(4, dtype=np.float32))


@pytest.mark.parametrize("arch", sorted(ARCHITECTURES))
def test_isolated_node_predictions_stay_finite(arch):
    # node 3 has no edges; the attention softmax in particular must not
    # divide by an empty neighborhood
    torch.manual_seed(3)
    adj = GraphTensors(4, np.array([(0, 1), (1, 2)], dtype=np.int64))
    model = DistancePredictor(arch, (5, 4))
    pred = model.predict(adj, onehot_columns(4, np.array([0, 3])))
    assert np.isfinite(pred).all()


# ----------------------------------------------------------- locality


@pytest.mark.parametrize("arch", sorted(ARCHITECTURES))
def test_receptive_field_is_local(arch):
    # a depth-2 stack sees at most the 2-hop ball (plus boundary degrees);
    # rewiring the far end of a path must not move predictions near the
    # probed landmark, and must move them near the rewired edge
    torch.manual_seed(4)
    n = 10
    adj_a = GraphTensors(n, path_edges(n))
    extra = np.vstack([path_edges(n), [(5, 8)]]).astype(np.int64)
    adj_b = GraphTensors(n, extra)
    model = DistancePredictor(arch, (5, 4), dropout=0.0)
    X = onehot_columns(n, np.array([0, 8]))
    pa = model.predict(adj_a, X)
    pb = model.predict(adj_b, X)
    np.testing.assert_allclose(pa[:3, 0], pb[:3, 0], atol=1e-6)
    # landmark 8 sits on the rewired edge, so its column must react
    assert np.abs(pa[:, 1] - pb[:, 1]).max() > 1e-6
