"""Atomic, naive WL, concatenated (C-WL) and gated (G-WL) node embeddings.

Tables keep row 0 for the ``UNKNOWN`` index so that extended labels never
seen during fitting still embed to a trained-capable vector.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .errors import DimensionMismatch, EmbeddingError, UninternedLabel, WLEmbedError
from .graph import LabeledMultigraph
from .wl import EMPTY, UNKNOWN, ExtendedLabel, LabelRegistry, wl_refine

VARIANTS = ("atomic", "wl", "cwl", "gwl")


def uniform_init(rng: np.random.Generator, shape, scale: float) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


@dataclass
class EmbeddingTable:
    """``rows[j]`` is the trainable vector for index ``j`` (row 0: UNKNOWN)."""

    rows: ad.Tensor

    @classmethod
    def create(cls, num_rows: int, d: int, rng: np.random.Generator, name: str = "theta"):
        return cls(ad.parameter(uniform_init(rng, (num_rows, d), 1.0 / np.sqrt(d)), name=name))

    @classmethod
    def from_array(cls, arr, name: str = "theta"):
        return cls(ad.parameter(np.asarray(arr, dtype=np.float64), name=name))

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @property
    def num_rows(self) -> int:
        return self.rows.shape[0]

    def lookup(self, idx) -> ad.Tensor:
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.num_rows):
            bad = idx[(idx < 0) | (idx >= self.num_rows)][0]
            raise UninternedLabel(f"index {bad} has no row in a {self.num_rows}-row table")
        return ad.gather_rows(self.rows, idx)


@dataclass
class CwlParams:
    table1: EmbeddingTable
    table2: EmbeddingTable
    W: ad.Tensor  # d x (d1 + d2)

    def __post_init__(self):
        if self.W.shape[1] != self.table1.d + self.table2.d:
            raise DimensionMismatch(
                f"W has {self.W.shape[1]} columns, tables give {self.table1.d}+{self.table2.d}")

    @property
    def d(self) -> int:
        return self.W.shape[0]

    def parameters(self):
        return [self.table1.rows, self.table2.rows, self.W]


@dataclass
class GwlParams:
    table_l: EmbeddingTable
    table_M: EmbeddingTable
    W1: ad.Tensor
    W2: ad.Tensor

    def __post_init__(self):
        d = self.table_l.d
        if self.table_M.d != d or self.W1.shape != (d, d) or self.W2.shape != (d, d):
            raise DimensionMismatch("G-WL tables and gates must share one dimension d")

    @property
    def d(self) -> int:
        return self.table_l.d

    def parameters(self):
        return [self.table_l.rows, self.table_M.rows, self.W1, self.W2]


# ---- index-level constructions (used by the batched model) ----

def cwl_from_indices(params: CwlParams, atom_idx, hood_idx) -> ad.Tensor:
    z = ad.concat([params.table1.lookup(atom_idx), params.table2.lookup(hood_idx)], axis=1)
    return ad.matmul(z, ad.transpose(params.W))


def gwl_from_indices(params: GwlParams, atom_idx, hood_idx) -> ad.Tensor:
    zl = params.table_l.lookup(atom_idx)
    zm = params.table_M.lookup(hood_idx)
    gate = ad.sigmoid(ad.add(ad.matmul(zl, ad.transpose(params.W1)),
                             ad.matmul(zm, ad.transpose(params.W2))))
    return ad.add(ad.mul(ad.sub(1.0, gate), zl), ad.mul(gate, zm))


# ---- label encoders ----

class WLEncoder:
    """Maps graphs to embedding-table indices for one variant.

    ``refine`` is the WL refinement registry; ``atoms`` holds ``(ℓ, ∅)``
    and ``hoods`` holds ``(∅, M)`` for the two sides of C-WL/G-WL. For
    ``T >= 2`` the atomic side stays at the original label and the
    neighborhood side is the multiset over depth ``T-1`` labels (the raw
    labels when ``T = 1``, so ``refine`` stays empty then).
    """

    def __init__(self, variant: str, T: int = 1, K: int | None = None):
        if variant not in VARIANTS:
            raise WLEmbedError(f"unknown embedding variant {variant!r}")
        if variant != "atomic" and T < 1:
            raise WLEmbedError("WL variants need T >= 1")
        self.variant = variant
        self.T = T
        self.K = K
        self.refine = LabelRegistry()
        self.atoms = LabelRegistry()
        self.hoods = LabelRegistry()

    def fit(self, graphs: Sequence[LabeledMultigraph]) -> "WLEncoder":
        for g in graphs:
            self.encode(g, grow=True)
        if self.K is None:
            self.K = max((g.K for g in graphs), default=1)
        return self

    def encode(self, graph: LabeledMultigraph, grow: bool = False) -> dict[str, np.ndarray]:
        if self.variant == "atomic":
            labels = np.asarray(graph.labels, dtype=np.int64)
            if self.K is not None:
                # labels beyond the fitted alphabet share the UNKNOWN row
                labels = np.where(labels > self.K, UNKNOWN, labels)
            return {"node": labels}
        if self.variant == "wl":
            res = wl_refine(graph, self.T, self.refine, grow=grow)
            return {"node": np.asarray(res.final(), dtype=np.int64)}
        if self.T == 1:
            prev = graph.labels
        else:
            prev = wl_refine(graph, self.T - 1, self.refine, grow=grow).final()
        atom_labels = [ExtendedLabel(lab, EMPTY) for lab in graph.labels]
        hood_labels = [ExtendedLabel(EMPTY, tuple(sorted(prev[j] for j in graph.adjacency[i])))
                       for i in range(graph.num_nodes)]
        if grow:
            atom = [self.atoms.intern(x) for x in atom_labels]
            hood = [self.hoods.intern(x) for x in hood_labels]
        else:
            atom = [self.atoms.lookup(x) for x in atom_labels]
            hood = [self.hoods.lookup(x) for x in hood_labels]
        return {"atom": np.asarray(atom, dtype=np.int64), "hood": np.asarray(hood, dtype=np.int64)}

    def table_sizes(self) -> dict[str, int]:
        """Rows needed per table, including the UNKNOWN row."""
        if self.variant == "atomic":
            return {"node": (self.K or 1) + 1}
        if self.variant == "wl":
            return {"node": self.refine.J + 1}
        return {"atom": self.atoms.J + 1, "hood": self.hoods.J + 1}

    def state(self) -> dict:
        return {"variant": self.variant, "T": self.T, "K": self.K,
                "refine": self.refine.to_list(), "atoms": self.atoms.to_list(),
                "hoods": self.hoods.to_list()}

    @classmethod
    def from_state(cls, state: dict) -> "WLEncoder":
        enc = cls(state["variant"], state["T"], state["K"])
        enc.refine = LabelRegistry.from_list(state["refine"])
        enc.atoms = LabelRegistry.from_list(state["atoms"])
        enc.hoods = LabelRegistry.from_list(state["hoods"])
        return enc


# ---- graph-level operations ----

def atomic_embed(table: EmbeddingTable, graph: LabeledMultigraph) -> ad.Tensor:
    """Row i is ``θ[ℓ_i]``."""
    labels = np.asarray(graph.labels, dtype=np.int64)
    if labels.size and labels.max() >= table.num_rows:
        raise UninternedLabel(f"label {labels.max()} has no row in a {table.num_rows}-row table")
    return table.lookup(labels)


def naive_wl_embed(table: EmbeddingTable, registry: LabelRegistry, graph: LabeledMultigraph,
                   T: int = 1) -> ad.Tensor:
    """Row i is ``θ[t(ℓ_i, M_i)]``; unseen extended labels use the UNKNOWN row."""
    idx = wl_refine(graph, T, registry, grow=False).final()
    return table.lookup(idx)


def _sides(atoms: LabelRegistry, hoods: LabelRegistry, graph: LabeledMultigraph,
           refine: LabelRegistry | None, T: int):
    enc = WLEncoder("cwl", T)
    enc.atoms, enc.hoods = atoms, hoods
    if refine is not None:
        enc.refine = refine
    elif T > 1:
        raise EmbeddingError("T > 1 needs the refinement registry")
    out = enc.encode(graph, grow=False)
    return out["atom"], out["hood"]


def cwl_embed(params: CwlParams, atoms: LabelRegistry, hoods: LabelRegistry,
              graph: LabeledMultigraph, refine: LabelRegistry | None = None, T: int = 1) -> ad.Tensor:
    """``x_i = W · concat(z_{i,ℓ}, z_{i,M})``."""
    a, h = _sides(atoms, hoods, graph, refine, T)
    return cwl_from_indices(params, a, h)


def gwl_embed(params: GwlParams, atoms: LabelRegistry, hoods: LabelRegistry,
              graph: LabeledMultigraph, refine: LabelRegistry | None = None, T: int = 1) -> ad.Tensor:
    """``x_i = (1 - G_i) ⊙ z_{i,ℓ} + G_i ⊙ z_{i,M}`` with a sigmoid gate."""
    a, h = _sides(atoms, hoods, graph, refine, T)
    return gwl_from_indices(params, a, h)


# ---- binary checkpoint of embedding parameters ----

_MAGIC = b"WLEMBED1"
_VARIANT_CODES = {v: i for i, v in enumerate(VARIANTS)}


def embedding_arrays(variant: str, params) -> list[np.ndarray]:
    if variant in ("atomic", "wl"):
        return [params.rows.data]
    if variant == "cwl":
        return [params.table1.rows.data, params.table2.rows.data, params.W.data]
    return [params.table_l.rows.data, params.table_M.rows.data, params.W1.data, params.W2.data]


def save_embedding_checkpoint(path, variant: str, params) -> None:
    """Write the flat little-endian float64 embedding format.

    Layout: 8-byte magic, ``<I`` variant code, ``<I`` array count, then
    ``<QQ`` (rows, cols) per array, then every array's data row-major.
    Tables come first, so the header reads ``variant, J, d`` for atomic
    and naive WL and ``variant, J1, d1, J2, d2, d, d1+d2`` for C-WL.
    """
    arrays = embedding_arrays(variant, params)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", _VARIANT_CODES[variant], len(arrays)))
        for a in arrays:
            fh.write(struct.pack("<QQ", *a.shape))
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_embedding_checkpoint(path) -> tuple[str, list[np.ndarray]]:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise WLEmbedError(f"{path} is not an embedding checkpoint")
        code, count = struct.unpack("<II", fh.read(8))
        shapes = [struct.unpack("<QQ", fh.read(16)) for _ in range(count)]
        arrays = []
        for r, c in shapes:
            buf = fh.read(8 * r * c)
            arrays.append(np.frombuffer(buf, dtype="<f8").reshape(r, c).astype(np.float64))
    return VARIANTS[code], arrays
