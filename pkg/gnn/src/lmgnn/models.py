"""Message-passing architectures for landmark-distance regression.

A model maps a one-hot landmark indicator column to a per-node distance
column.  Landmark columns ride along a batch axis, so the learned weights
never depend on how many landmarks a family has, and a model trained on a
small graph runs unchanged on a larger one (feature widths are fixed at
construction; only the adjacency changes).

All four layer families aggregate neighbor messages by summation and are
stacked with ReLU activations and dropout in between.  The stack is
bookended by two fixed-width layers sized to the training graph, with a
pointwise linear readout producing the scalar distance; the readout does
not look at neighbors, so the receptive field equals the number of
message-passing layers (the model depth).
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .errors import ParameterError

ARCHITECTURES = ("gcn", "sage", "gat", "gin")

# Hidden-width layouts between the two bookend layers, grouped by depth
# (depth counts message-passing layers: bookends + hidden).
NINE_LAYOUTS = (
    (128, 64, 32, 16),
    (64, 32, 16, 8),
    (32, 16, 8, 4),
    (128, 64, 32),
    (64, 32, 16),
    (32, 16, 8),
    (128, 64),
    (64, 32),
    (32, 16),
)


class GraphTensors:
    """Adjacency bundled in the shapes the layers need.

    Sparse CSR for summed neighbor aggregation, and directed edge arrays
    with self loops appended for attention.  Edges arrive as (m, 2) with
    u < v; both directions are materialized here.
    """

    def __init__(self, n: int, edges: np.ndarray):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n):
            raise ParameterError("edge endpoint outside 0..n-1")
        self.n = int(n)
        self.m = int(edges.shape[0])
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        loops = np.arange(self.n, dtype=np.int64)
        index = torch.from_numpy(np.stack([src, dst]))
        values = torch.ones(index.shape[1], dtype=torch.float32)
        coo = torch.sparse_coo_tensor(index, values, (self.n, self.n)).coalesce()
        self._csr = coo.to_sparse_csr()
        # renormalized propagation for the gcn layer: deg is of A + I
        deg = np.bincount(src, minlength=self.n) + 1.0
        dinv = 1.0 / np.sqrt(deg)
        lsrc = np.concatenate([src, loops])
        ldst = np.concatenate([dst, loops])
        nvals = torch.from_numpy((dinv[ldst] * dinv[lsrc]).astype(np.float32))
        nindex = torch.from_numpy(np.stack([ldst, lsrc]))
        ncoo = torch.sparse_coo_tensor(nindex, nvals, (self.n, self.n)).coalesce()
        self._norm_csr = ncoo.to_sparse_csr()
        self.loop_src = torch.from_numpy(lsrc)
        self.loop_dst = torch.from_numpy(ldst)

    def _mm(self, mat, H: torch.Tensor) -> torch.Tensor:
        B, n, w = H.shape
        flat = H.permute(1, 0, 2).reshape(n, B * w)
        out = torch.sparse.mm(mat, flat)
        return out.reshape(n, B, w).permute(1, 0, 2)

    def spmm(self, H: torch.Tensor) -> torch.Tensor:
        """Summed neighbor features: out[b, i] = sum_{j ~ i} H[b, j]."""
        return self._mm(self._csr, H)

    def spmm_norm(self, H: torch.Tensor) -> torch.Tensor:
        """Degree-renormalized sum over the closed neighborhood."""
        return self._mm(self._norm_csr, H)


class GCNLayer(nn.Module):
    """Degree-renormalized sum over the closed neighborhood, one shared
    linear map.  The normalization keeps activation scales flat across
    depth; the other layer families use raw sums per their definitions."""

    def __init__(self, w_in: int, w_out: int):
        super().__init__()
        self.lin = nn.Linear(w_in, w_out)

    def forward(self, adj: GraphTensors, H: torch.Tensor) -> torch.Tensor:
        return self.lin(adj.spmm_norm(H))


class SAGELayer(nn.Module):
    """Separate linear maps for the self term and the neighbor sum."""

    def __init__(self, w_in: int, w_out: int):
        super().__init__()
        self.lin_self = nn.Linear(w_in, w_out)
        self.lin_neigh = nn.Linear(w_in, w_out, bias=False)

    def forward(self, adj: GraphTensors, H: torch.Tensor) -> torch.Tensor:
        return self.lin_self(H) + self.lin_neigh(adj.spmm(H))


class GATLayer(nn.Module):
    """Single-head attention over each node's closed neighborhood.

    Scores are computed per edge and normalized with a scatter softmax,
    so no dense n x n attention matrix is ever built and large inference
    graphs stay cheap.
    """

    def __init__(self, w_in: int, w_out: int):
        super().__init__()
        self.lin = nn.Linear(w_in, w_out, bias=False)
        self.att_src = nn.Linear(w_out, 1, bias=False)
        self.att_dst = nn.Linear(w_out, 1, bias=False)
        self.bias = nn.Parameter(torch.zeros(w_out))

    def forward(self, adj: GraphTensors, H: torch.Tensor) -> torch.Tensor:
        B, n, _ = H.shape
        Hw = self.lin(H)
        score_dst = self.att_dst(Hw).squeeze(-1)
        score_src = self.att_src(Hw).squeeze(-1)
        src, dst = adj.loop_src, adj.loop_dst
        e = torch.nn.functional.leaky_relu(
            score_dst[:, dst] + score_src[:, src], negative_slope=0.2
        )
        # scatter softmax over the incoming edges of every dst node; the
        # self loop guarantees each row has at least one edge
        idx = dst.unsqueeze(0).expand(B, -1)
        rowmax = torch.full((B, n), -torch.inf, dtype=e.dtype)
        rowmax.scatter_reduce_(1, idx, e, reduce="amax", include_self=True)
        z = torch.exp(e - rowmax[:, dst])
        denom = torch.zeros((B, n), dtype=e.dtype)
        denom.index_add_(1, dst, z)
        alpha = z / denom[:, dst]
        out = torch.zeros_like(Hw)
        out.index_add_(1, dst, alpha.unsqueeze(-1) * Hw[:, src])
        return out + self.bias


class GINLayer(nn.Module):
    """Summed neighbors plus a learnably weighted self term, then an MLP."""

    def __init__(self, w_in: int, w_out: int):
        super().__init__()
        self.eps = nn.Parameter(torch.zeros(()))
        self.mlp = nn.Sequential(
            nn.Linear(w_in, w_out), nn.ReLU(), nn.Linear(w_out, w_out)
        )

    def forward(self, adj: GraphTensors, H: torch.Tensor) -> torch.Tensor:
        return self.mlp((1.0 + self.eps) * H + adj.spmm(H))


_LAYERS = {"gcn": GCNLayer, "sage": SAGELayer, "gat": GATLayer, "gin": GINLayer}


class DistancePredictor(nn.Module):
    """Stack of message-passing layers mapping indicator columns to
    distance columns.

    widths lists the output width of every message-passing layer,
    bookends included; the input width is 1 (one indicator column per
    landmark, batched along the first axis).
    """

    def __init__(self, arch: str, widths, dropout: float = 0.1):
        super().__init__()
        if arch not in _LAYERS:
            raise ParameterError(f"unknown architecture {arch!r}")
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2 or any(w < 1 for w in widths):
            raise ParameterError("need at least two positive layer widths")
        if not 0.0 <= dropout < 1.0:
            raise ParameterError("dropout must lie in [0, 1)")
        self.arch = arch
        self.widths = widths
        layer_cls = _LAYERS[arch]
        dims = (1,) + widths
        self.convs = nn.ModuleList(
            layer_cls(dims[i], dims[i + 1]) for i in range(len(widths))
        )
        self.drop = nn.Dropout(dropout)
        self.readout = nn.Linear(widths[-1], 1)

    @property
    def depth(self) -> int:
        return len(self.convs)

    def forward(self, adj: GraphTensors, cols: torch.Tensor) -> torch.Tensor:
        """cols (B, n, 1) -> predicted distances (B, n)."""
        H = cols
        for conv in self.convs:
            H = self.drop(torch.relu(conv(adj, H)))
        return self.readout(H).squeeze(-1)

    @torch.no_grad()
    def predict(self, adj: GraphTensors, onehot: np.ndarray, chunk: int = 16) -> np.ndarray:
        """Inference on (n, L) indicator columns -> (n, L) distances.

        Columns are processed in chunks to bound peak memory on large
        graphs.  Eval mode, so dropout is off and the output is a pure
        function of weights and inputs.
        """
        was_training = self.training
        self.eval()
        try:
            X = torch.as_tensor(np.asarray(onehot, dtype=np.float32))
            if X.ndim != 2 or X.shape[0] != adj.n:
                raise ParameterError(
                    f"indicator block must be shaped ({adj.n}, L), got {tuple(X.shape)}"
                )
            outs = []
            for lo in range(0, X.shape[1], max(1, chunk)):
                cols = X[:, lo : lo + chunk].T.unsqueeze(-1)
                outs.append(self.forward(adj, cols).T)
            return torch.cat(outs, dim=1).numpy().astype(np.float64)
        finally:
            self.train(was_training)
