"""Evaluation metrics, shuffle importance and C-WL weight summaries."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .embedding import CwlParams
from .errors import (EmptyInputError, LengthMismatch, ShufflePoolTooSmall, SingleClass,
                     WrongEmbeddingVariant)
from .graph import DatasetRecord
from .nn import GNNModel
from .wl import UNKNOWN


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise LengthMismatch(f"{a.size} predictions vs {b.size} targets")
    if a.size == 0:
        raise EmptyInputError("no values to score")
    return a, b


def mae(predictions, targets) -> float:
    p, t = _pair(predictions, targets)
    return float(np.mean(np.abs(p - t)))


def roc_auc(scores, labels) -> float:
    """Mann-Whitney estimate; tied positive/negative pairs count one half."""
    s, y = _pair(scores, labels)
    pos = s[y == 1]
    neg = s[y != 1]
    if pos.size == 0 or neg.size == 0:
        raise SingleClass("ROC-AUC needs both classes")
    ranks = rankdata(s)  # average ranks handle ties exactly
    u = ranks[y == 1].sum() - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def task_metric(task: str, scores, targets) -> float:
    return roc_auc(scores, targets) if task == "classification" else mae(scores, targets)


@dataclass
class Metrics:
    task: str
    values: list[float] = field(default_factory=list)

    @property
    def name(self) -> str:
        return "roc_auc" if self.task == "classification" else "mae"

    @property
    def value(self) -> float:
        return self.mean

    @property
    def mean(self) -> float:
        return float(np.mean(self.values)) if self.values else float("nan")

    @property
    def std(self) -> float:
        return float(np.std(self.values)) if self.values else float("nan")


def evaluate(model: GNNModel, records: Sequence[DatasetRecord]) -> float:
    if not records:
        raise EmptyInputError("empty evaluation set")
    scores = model.predict([r.graph for r in records])
    return task_metric(model.spec.task, scores, [r.target for r in records])


# ---- shuffle importance ----

@dataclass
class ShuffleResult:
    mode: str
    base: float
    shuffled: float

    @property
    def delta(self) -> float:
        return self.shuffled - self.base


def _require_cwl(model: GNNModel) -> CwlParams:
    if model.spec.embedding != "cwl" or not isinstance(model.embedding, CwlParams):
        raise WrongEmbeddingVariant(f"needs a C-WL model, got {model.spec.embedding!r}")
    return model.embedding


def shuffle_importance(model: GNNModel, records: Sequence[DatasetRecord], mode: str,
                       rng: np.random.Generator) -> ShuffleResult:
    """Metric before and after replacing one node's atom or neighborhood index per graph.

    ``mode`` is ``"atom"`` or ``"nl"``. The replacement is drawn uniformly
    from the other interned entries of that side. The model is not changed.
    """
    _require_cwl(model)
    mode = mode.lower()
    if mode not in ("atom", "nl"):
        raise ValueError(f"mode must be 'atom' or 'nl', not {mode!r}")
    if not records:
        raise EmptyInputError("empty test set")
    key = "atom" if mode == "atom" else "hood"
    registry = model.encoder.atoms if key == "atom" else model.encoder.hoods
    pool = np.arange(1, registry.J + 1)
    encoded = [model.encode(r.graph) for r in records]
    shuffled = []
    for enc in encoded:
        idx = {k: v.copy() for k, v in enc.idx.items()}
        i = int(rng.integers(enc.num_nodes))
        own = idx[key][i]
        choices = pool[pool != own]
        if choices.size == 0:
            raise ShufflePoolTooSmall(f"no {mode} label other than index {own} to swap in")
        idx[key][i] = rng.choice(choices)
        shuffled.append(type(enc)(idx, enc.adjacency, enc.num_nodes))
    targets = [r.target for r in records]
    base = task_metric(model.spec.task, model.scores(encoded), targets)
    after = task_metric(model.spec.task, model.scores(shuffled), targets)
    return ShuffleResult(mode, base, after)


# ---- C-WL weight magnitudes ----

@dataclass
class WeightReport:
    magnitude: np.ndarray  # d x (d1 + d2)
    d1: int

    @property
    def left_mean(self) -> float:
        return float(self.magnitude[:, :self.d1].mean())

    @property
    def right_mean(self) -> float:
        return float(self.magnitude[:, self.d1:].mean())


def _mean_row_norm(rows: np.ndarray) -> float:
    # row 0 is the UNKNOWN slot; it only matters when nothing else exists
    body = rows[UNKNOWN + 1:] if rows.shape[0] > 1 else rows
    return float(np.linalg.norm(body, axis=1).mean())


def cwl_weight_magnitudes(model_or_params) -> WeightReport:
    """``|W|`` with each half scaled by the mean norm of its embedding rows.

    This removes the freedom to shrink a table while growing the matching
    half of ``W``.
    """
    if isinstance(model_or_params, GNNModel):
        params = _require_cwl(model_or_params)
    elif isinstance(model_or_params, CwlParams):
        params = model_or_params
    else:
        raise WrongEmbeddingVariant("needs a C-WL model or CwlParams")
    W = params.W.data
    d1 = params.table1.d
    scale = np.concatenate([np.full(d1, _mean_row_norm(params.table1.rows.data)),
                            np.full(params.table2.d, _mean_row_norm(params.table2.rows.data))])
    return WeightReport(np.abs(W) * scale, d1)
