"""GCN message passing, sum readout, Adam and the training loop."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .embedding import (CwlParams, EmbeddingTable, GwlParams, WLEncoder, cwl_from_indices,
                        gwl_from_indices, uniform_init)
from .errors import DimensionMismatch, EmptyDataset, EmptyGraph, TargetTypeMismatch, WLEmbedError
from .graph import DatasetRecord, LabeledMultigraph

log = logging.getLogger(__name__)


# ---- GCN layer ----

def normalized_adjacency(graph: LabeledMultigraph) -> ad.CsrMatrix:
    """``D^-1/2 (A + I) D^-1/2`` over collapsed neighborhoods, in CSR."""
    n = graph.num_nodes
    inv = 1.0 / np.sqrt(np.asarray(graph.degrees, dtype=np.float64) + 1.0)
    indptr = [0]
    indices, data = [], []
    for i in range(n):
        row = sorted(graph.adjacency[i] + (i,))
        indices.extend(row)
        data.extend(inv[i] * inv[j] for j in row)
        indptr.append(len(indices))
    return ad.CsrMatrix(indptr, indices, data, (n, n), symmetric=True)


@dataclass
class GcnLayerParams:
    weight: ad.Tensor  # d_in x d_out
    bias: ad.Tensor    # d_out

    @classmethod
    def create(cls, d_in: int, d_out: int, rng: np.random.Generator, name: str = "gcn"):
        scale = np.sqrt(6.0 / (d_in + d_out))
        return cls(ad.parameter(uniform_init(rng, (d_in, d_out), scale), name=f"{name}.W"),
                   ad.parameter(np.zeros(d_out), name=f"{name}.b"))

    def parameters(self):
        return [self.weight, self.bias]


def gcn_layer(H, adjacency, params: GcnLayerParams) -> ad.Tensor:
    """``ReLU(Â H W + b)``; ``adjacency`` is a graph or a prebuilt ``Â``."""
    H = ad.as_tensor(H)
    if isinstance(adjacency, LabeledMultigraph):
        adjacency = normalized_adjacency(adjacency)
    if H.shape[1] != params.weight.shape[0]:
        raise DimensionMismatch(f"features have width {H.shape[1]}, weight expects {params.weight.shape[0]}")
    agg = ad.spmm(adjacency, H)
    return ad.relu(ad.add(ad.matmul(agg, params.weight), params.bias))


def sum_readout(H, segments=None, num_graphs: int | None = None) -> ad.Tensor:
    """Columnwise node sum; with ``segments`` one row per graph."""
    H = ad.as_tensor(H)
    if H.shape[0] == 0:
        raise EmptyGraph("readout of a graph with no nodes")
    if segments is None:
        segments = np.zeros(H.shape[0], dtype=np.int64)
        num_graphs = 1
    return ad.segment_sum(H, segments, num_graphs)


# ---- model ----

@dataclass
class ModelSpec:
    embedding: str = "wl"
    layers: int = 2
    dim: int = 32
    task: str = "classification"
    T: int = 1

    def __post_init__(self):
        if self.layers < 0 or self.dim < 1 or self.T < 0:
            raise WLEmbedError("need layers >= 0, dim >= 1, T >= 0")
        if self.task not in ("classification", "regression"):
            raise WLEmbedError(f"unknown task {self.task!r}")

    @property
    def out_dim(self) -> int:
        return 2 if self.task == "classification" else 1


@dataclass
class TrainConfig:
    alpha: float = 1e-3
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0:
            raise WLEmbedError("alpha must be nonnegative")


@dataclass
class EncodedGraph:
    idx: dict[str, np.ndarray]
    adjacency: ad.CsrMatrix
    num_nodes: int


@dataclass
class Batch:
    idx: dict[str, np.ndarray]
    adjacency: ad.CsrMatrix
    segments: np.ndarray
    num_graphs: int


def make_batch(items: Sequence[EncodedGraph]) -> Batch:
    keys = items[0].idx.keys()
    idx = {k: np.concatenate([it.idx[k] for it in items]) for k in keys}
    sizes = np.array([it.num_nodes for it in items], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    nnz = np.array([len(it.adjacency.data) for it in items], dtype=np.int64)
    nnz_off = np.concatenate([[0], np.cumsum(nnz)[:-1]])
    indptr = np.concatenate([[0]] + [it.adjacency.indptr[1:] + o for it, o in zip(items, nnz_off)])
    indices = np.concatenate([it.adjacency.indices + o for it, o in zip(items, offsets)])
    data = np.concatenate([it.adjacency.data for it in items])
    n = int(sizes.sum())
    adj = ad.CsrMatrix(indptr, indices, data, (n, n), symmetric=True)
    segments = np.repeat(np.arange(len(items)), sizes)
    return Batch(idx, adj, segments, len(items))


class GNNModel:
    """Embedding -> L GCN layers -> sum readout -> affine head."""

    def __init__(self, spec: ModelSpec, encoder: WLEncoder, rng: np.random.Generator):
        self.spec = spec
        self.encoder = encoder
        d = spec.dim
        sizes = encoder.table_sizes()
        if spec.embedding in ("atomic", "wl"):
            self.embedding = EmbeddingTable.create(sizes["node"], d, rng, "theta")
        elif spec.embedding == "cwl":
            t1 = EmbeddingTable.create(sizes["atom"], d, rng, "theta1")
            t2 = EmbeddingTable.create(sizes["hood"], d, rng, "theta2")
            W = ad.parameter(uniform_init(rng, (d, 2 * d), 1.0 / np.sqrt(2 * d)), name="W")
            self.embedding = CwlParams(t1, t2, W)
        else:
            tl = EmbeddingTable.create(sizes["atom"], d, rng, "theta_l")
            tm = EmbeddingTable.create(sizes["hood"], d, rng, "theta_M")
            W1 = ad.parameter(uniform_init(rng, (d, d), 1.0 / np.sqrt(d)), name="W1")
            W2 = ad.parameter(uniform_init(rng, (d, d), 1.0 / np.sqrt(d)), name="W2")
            self.embedding = GwlParams(tl, tm, W1, W2)
        self.layers = [GcnLayerParams.create(d, d, rng, f"gcn{i}") for i in range(spec.layers)]
        scale = np.sqrt(6.0 / (d + spec.out_dim))
        self.head_W = ad.parameter(uniform_init(rng, (d, spec.out_dim), scale), name="head.W")
        self.head_b = ad.parameter(np.zeros(spec.out_dim), name="head.b")

    def parameters(self) -> list[ad.Tensor]:
        if isinstance(self.embedding, EmbeddingTable):
            params = [self.embedding.rows]
        else:
            params = list(self.embedding.parameters())
        for layer in self.layers:
            params.extend(layer.parameters())
        return params + [self.head_W, self.head_b]

    def named_parameters(self) -> dict[str, ad.Tensor]:
        return {p.name: p for p in self.parameters()}

    def encode(self, graph: LabeledMultigraph) -> EncodedGraph:
        return EncodedGraph(self.encoder.encode(graph, grow=False),
                            normalized_adjacency(graph), graph.num_nodes)

    def embed(self, idx: dict[str, np.ndarray]) -> ad.Tensor:
        if self.spec.embedding in ("atomic", "wl"):
            return self.embedding.lookup(idx["node"])
        if self.spec.embedding == "cwl":
            return cwl_from_indices(self.embedding, idx["atom"], idx["hood"])
        return gwl_from_indices(self.embedding, idx["atom"], idx["hood"])

    def forward_batch(self, batch: Batch) -> ad.Tensor:
        H = self.embed(batch.idx)
        for layer in self.layers:
            H = gcn_layer(H, batch.adjacency, layer)
        pooled = sum_readout(H, batch.segments, batch.num_graphs)
        return ad.add(ad.matmul(pooled, self.head_W), self.head_b)

    def forward(self, graph: LabeledMultigraph) -> np.ndarray:
        """Prediction for one graph: a scalar (regression) or two logits."""
        out = self.forward_batch(make_batch([self.encode(graph)])).data[0]
        return out[0] if self.spec.task == "regression" else out

    def scores(self, encoded: Sequence[EncodedGraph], batch_size: int = 256) -> np.ndarray:
        """Regression predictions, or the logit margin of class 1."""
        out = []
        for s in range(0, len(encoded), batch_size):
            logits = self.forward_batch(make_batch(encoded[s:s + batch_size])).data
            out.append(logits[:, 0] if self.spec.task == "regression" else logits[:, 1] - logits[:, 0])
        return np.concatenate(out) if out else np.zeros(0)

    def predict(self, graphs: Sequence[LabeledMultigraph]) -> np.ndarray:
        return self.scores([self.encode(g) for g in graphs])


# ---- Adam ----

@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, params: Sequence[ad.Tensor]) -> "AdamState":
        return cls([np.zeros_like(p.data) for p in params], [np.zeros_like(p.data) for p in params])


def adam_step(params: Sequence[ad.Tensor], grads: Sequence[np.ndarray], state: AdamState,
              alpha: float) -> None:
    """One bias-corrected Adam update, in place on ``params`` and ``state``."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p.data -= alpha * (m / c1) / (np.sqrt(v / c2) + state.eps)


# ---- training ----

def loss_fn(task: str, out: ad.Tensor, targets: np.ndarray) -> ad.Tensor:
    if task == "classification":
        return ad.softmax_cross_entropy(out, targets.astype(np.int64))
    return ad.mse(out, targets)


def check_targets(task: str, targets: np.ndarray) -> None:
    if task == "classification" and not np.all(np.isin(targets, (0, 1))):
        raise TargetTypeMismatch("classification targets must be 0 or 1")
    if not np.all(np.isfinite(targets)):
        raise TargetTypeMismatch("targets must be finite numbers")


@dataclass
class TrainResult:
    model: GNNModel
    history: list[float] = field(default_factory=list)


def build_model(spec: ModelSpec, graphs: Sequence[LabeledMultigraph], seed: int,
                encoder: WLEncoder | None = None) -> GNNModel:
    if encoder is None:
        encoder = WLEncoder(spec.embedding, max(spec.T, 1) if spec.embedding != "atomic" else 0)
        encoder.fit(graphs)
    return GNNModel(spec, encoder, np.random.default_rng(seed))


def train(spec: ModelSpec, dataset: Sequence[DatasetRecord], config: TrainConfig,
          encoder: WLEncoder | None = None) -> TrainResult:
    """Minibatch Adam; returns the model and per-epoch mean training loss.

    The encoder is fitted on ``dataset`` unless one is supplied. Runs are
    deterministic given ``config.seed``.
    """
    if len(dataset) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    targets = np.asarray([r.target for r in dataset], dtype=np.float64)
    check_targets(spec.task, targets)
    model = build_model(spec, [r.graph for r in dataset], config.seed, encoder)
    encoded = [model.encode(r.graph) for r in dataset]
    return TrainResult(model, fit(model, encoded, targets, config))


def fit(model: GNNModel, encoded: Sequence[EncodedGraph], targets: np.ndarray,
        config: TrainConfig) -> list[float]:
    rng = np.random.default_rng([config.seed, 1])
    params = model.parameters()
    state = AdamState.zeros_like(params)
    n = len(encoded)
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, config.batch_size):
            sel = order[s:s + config.batch_size]
            batch = make_batch([encoded[i] for i in sel])
            loss = loss_fn(model.spec.task, model.forward_batch(batch), targets[sel])
            grads = ad.gradient_of(loss, params)
            adam_step(params, grads, state, config.alpha)
            total += float(loss.data) * len(sel)
        history.append(total / n)
        log.debug("epoch %d loss %.6f", epoch, history[-1])
    return history


def model_state(model: GNNModel) -> dict:
    return {"spec": asdict(model.spec), "encoder": model.encoder.state()}
