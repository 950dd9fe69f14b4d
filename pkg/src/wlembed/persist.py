"""Whole-model checkpoints: parameters in an ``.npz`` plus a JSON header."""
from __future__ import annotations

import json

import numpy as np

from .embedding import WLEncoder
from .errors import WLEmbedError
from .nn import GNNModel, ModelSpec, model_state

_META_KEY = "__meta__"


def save_model(path, model: GNNModel, extra: dict | None = None) -> None:
    meta = model_state(model)
    meta["extra"] = extra or {}
    arrays = {name: p.data for name, p in model.named_parameters().items()}
    arrays[_META_KEY] = np.array(json.dumps(meta))
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_model(path) -> tuple[GNNModel, dict]:
    """Rebuild a model saved by :func:`save_model`; returns (model, extra)."""
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise WLEmbedError(f"cannot read model checkpoint {path}: {exc}") from exc
    with data:
        if _META_KEY not in data.files:
            raise WLEmbedError(f"{path} has no model header")
        meta = json.loads(str(data[_META_KEY]))
        spec = ModelSpec(**meta["spec"])
        encoder = WLEncoder.from_state(meta["encoder"])
        model = GNNModel(spec, encoder, np.random.default_rng(0))
        for name, p in model.named_parameters().items():
            if name not in data.files or data[name].shape != p.shape:
                raise WLEmbedError(f"checkpoint entry {name} missing or misshapen")
            p.data = np.array(data[name], dtype=np.float64)
    return model, meta.get("extra", {})
