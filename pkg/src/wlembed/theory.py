"""Numerical checks of the representability results for WL embedding.

Covers the lattice of neighbor multiplicities, the rank of WL-embedding
readouts over a graph set, the explicit ReLU layer whose lattice image is
triangular, and the growth rate of that layer's bias norm.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, DimensionTooSmall, SizeOverflow
from .graph import LabeledMultigraph, build_graph
from .wl import extended_label

SIZE_LIMIT = 10 ** 6


def _guard(K: int, M: int) -> int:
    if K < 1 or M < 0:
        raise ValueError("need K >= 1 and M >= 0")
    if K * math.log10(M + 1) > 6 + 1e-12 or (M + 1) ** K > SIZE_LIMIT:
        raise SizeOverflow(f"(M+1)^K = {M + 1}^{K} exceeds {SIZE_LIMIT}")
    return (M + 1) ** K


def capacity_bound(K: int, M: int) -> int:
    """Upper bound ``K (M+1)^K`` on the readout dimensionality."""
    return K * (M + 1) ** K


def enumerate_lattice(K: int, M: int) -> list[tuple[int, ...]]:
    """All multiplicity vectors in ``{0..M}^K`` in base-(M+1) counting order."""
    _guard(K, M)
    return list(itertools.product(range(M + 1), repeat=K))


def digit_weights(K: int, M: int) -> np.ndarray:
    """``((M+1)^{K-1}, ..., M+1, 1)``: <w, m> reads m as a base-(M+1) number."""
    return np.array([(M + 1) ** (K - 1 - i) for i in range(K)], dtype=np.float64)


# ---- rank by elimination ----

def gauss_rank(A, rtol: float = 1e-9) -> int:
    """Rank by Gaussian elimination with full pivoting.

    A pivot counts when it exceeds ``rtol * ||A||_F``.
    """
    A = np.array(A, dtype=np.float64)
    if A.size == 0:
        return 0
    tol = rtol * np.linalg.norm(A)
    rows, cols = A.shape
    rank = 0
    for r in range(min(rows, cols)):
        sub = np.abs(A[r:, r:])
        flat = int(np.argmax(sub))
        pi, pj = divmod(flat, sub.shape[1])
        if sub[pi, pj] <= tol:
            break
        pi += r
        pj += r
        A[[r, pi]] = A[[pi, r]]
        A[:, [r, pj]] = A[:, [pj, r]]
        A[r + 1:] -= np.outer(A[r + 1:, r] / A[r, r], A[r])
        rank += 1
    return rank


# ---- the ReLU construction ----

@dataclass
class ReluConstruction:
    """Label-specific ReLU layer mapping each lattice point to its own unit.

    ``W[k]`` (d1 x K) and ``b[k]`` (d1) are nonzero only in block ``k``
    of width ``(M+1)^K + 1``; inside it every row of ``W[k]`` is the digit
    weight vector and ``b[k]`` runs ``(M+1)^K - 1, ..., 0, -1``. The
    embedding of label ``k`` is ``alpha * e_k``.
    """

    K: int
    M: int
    alpha: float
    weights: np.ndarray   # digit weight vector w, shape (K,)
    bias: np.ndarray      # single-block b, shape ((M+1)^K + 1,)
    W: list[np.ndarray]
    b: list[np.ndarray]
    embedding: np.ndarray  # rows x_k = alpha e_k, shape (K, K)

    @property
    def block_width(self) -> int:
        return len(self.bias)

    @property
    def d1(self) -> int:
        return self.K * self.block_width


def relu_construction(K: int, M: int, alpha: float = 1.0) -> ReluConstruction:
    if M < 1:
        raise ValueError("construction needs M >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    N = _guard(K, M)
    w = digit_weights(K, M)
    bias = np.arange(N - 1, -2, -1, dtype=np.float64)
    width = N + 1
    d1 = K * width
    Ws, bs = [], []
    for k in range(K):
        Wk = np.zeros((d1, K))
        Wk[k * width:(k + 1) * width] = w
        bk = np.zeros(d1)
        bk[k * width:(k + 1) * width] = bias
        Ws.append(Wk)
        bs.append(bk)
    return ReluConstruction(K, M, float(alpha), w, bias, Ws, bs, alpha * np.eye(K))


def construction_matrix(c: ReluConstruction) -> np.ndarray:
    """Rows ``alpha * relu(W_k m - b_k)`` for every (k, m), k-major."""
    lattice = np.array(enumerate_lattice(c.K, c.M), dtype=np.float64)
    blocks = []
    for k in range(c.K):
        pre = c.alpha * (lattice @ c.W[k].T - c.b[k])
        blocks.append(np.maximum(pre, 0.0))
    return np.vstack(blocks)


def construction_rank(K: int, M: int, alpha: float = 1.0) -> tuple[np.ndarray, int]:
    H = construction_matrix(relu_construction(K, M, alpha))
    return H, gauss_rank(H)


def triangular_block(c: ReluConstruction, k: int = 0) -> np.ndarray:
    """Block ``k`` of H reordered to be upper triangular.

    Rows go from the largest base-(M+1) value down to zero; the block's
    always-zero first column is dropped.
    """
    N = (c.M + 1) ** c.K
    H = construction_matrix(c)
    width = c.block_width
    block = H[k * N:(k + 1) * N, k * width:(k + 1) * width]
    return block[::-1, 1:]


# ---- WL-embedding readout dimensionality ----

def extended_label_histograms(graphs: Sequence[LabeledMultigraph]):
    """Histogram matrix (graphs x distinct extended labels) and the label list."""
    index: dict = {}
    counts = []
    for g in graphs:
        row: dict[int, int] = {}
        for i in range(g.num_nodes):
            j = index.setdefault(extended_label(g, i), len(index))
            row[j] = row.get(j, 0) + 1
        counts.append(row)
    hist = np.zeros((len(graphs), len(index)))
    for r, row in enumerate(counts):
        for j, c in row.items():
            hist[r, j] = c
    return hist, list(index)


def wle_max_dimensionality(graphs: Sequence[LabeledMultigraph], d: int | None = None) -> int:
    """Rank of naive-WL sum readouts with one-hot (independent) embeddings."""
    hist, labels = extended_label_histograms(graphs)
    if d is None:
        d = len(labels)
    if d < len(labels):
        raise DimensionTooSmall(f"d={d} < {len(labels)} distinct extended labels")
    readouts = np.zeros((len(graphs), d))
    readouts[:, :len(labels)] = hist
    return gauss_rank(readouts)


def graph_set_parameters(graphs: Sequence[LabeledMultigraph]) -> tuple[int, int]:
    """(K, M): alphabet size and observed label-specific maximum degree."""
    K = max(g.K for g in graphs)
    M = max((g.label_specific_max_degree() for g in graphs), default=0)
    return K, M


def star_graph_set(K: int, M: int) -> list[LabeledMultigraph]:
    """One star per lattice point: a center labeled k with m_l leaves of label l.

    Every (k, m) with m in {0..M}^K occurs as a center label.
    """
    graphs = []
    for k in range(1, K + 1):
        for m in enumerate_lattice(K, M):
            labels = [k]
            for l, count in enumerate(m, start=1):
                labels.extend([l] * count)
            edges = [(0, i) for i in range(1, len(labels))]
            graphs.append(build_graph(len(labels), labels, edges, K=K))
    return graphs


def edge_balance_constraints(K: int, M: int) -> np.ndarray:
    """Linear forms vanishing on every graph's extended-label histogram.

    For labels k < l, the k-l edge count seen from k-labeled nodes equals
    the count seen from l-labeled nodes. Columns follow ``(k, m)`` in
    k-major lattice order.
    """
    lattice = enumerate_lattice(K, M)
    N = len(lattice)
    rows = []
    for k in range(K):
        for l in range(k + 1, K):
            c = np.zeros(K * N)
            for j, m in enumerate(lattice):
                c[k * N + j] += m[l]
                c[l * N + j] -= m[k]
            rows.append(c)
    return np.array(rows).reshape(len(rows), K * N)


def lattice_histogram(graph: LabeledMultigraph, K: int, M: int) -> np.ndarray:
    """Counts n_{k,m} of a graph as a k-major vector over ``{0..M}^K``."""
    N = (M + 1) ** K
    w = [(M + 1) ** (K - 1 - i) for i in range(K)]
    out = np.zeros(K * N)
    for i in range(graph.num_nodes):
        m = [0] * K
        for j in graph.adjacency[i]:
            m[graph.labels[j] - 1] += 1
        if max(m, default=0) > M:
            raise ValueError(f"node {i} exceeds label-specific degree {M}")
        out[(graph.labels[i] - 1) * N + sum(a * b for a, b in zip(w, m))] += 1
    return out


def graph_realizable_dimensionality(K: int, M: int) -> int:
    """Largest rank attainable by actual graphs: the bound minus balance constraints."""
    if M == 0:
        return K
    return capacity_bound(K, M) - K * (K - 1) // 2


# ---- bias norm growth ----

def bias_norm(K: int, M: int) -> float:
    """Exact ``||b||_2`` with b running (M+1)^K - 1 down to -1."""
    n = _guard(K, M) - 1
    return math.sqrt(1 + n * (n + 1) * (2 * n + 1) // 6)


def norm_profile(K: int, Ms: Sequence[int]) -> list[tuple[int, float, float]]:
    """(M, ||b||_2, ||b||_2 / M^{3K/2}) for each M."""
    return [(M, bias_norm(K, M), bias_norm(K, M) / M ** (1.5 * K)) for M in Ms]


# ---- single nonlinear layer readout ----

@dataclass
class SingleLayerParams:
    """Label-specific layer ``h_i = σ(U[ℓ_i] x_i + W[ℓ_i] Σ_j V[ℓ_i][ℓ_j] x_j)``.

    ``x`` holds the atomic embeddings (K x d), ``U[k]`` and ``W[k]`` are
    d1 x d, ``V[k][l]`` is d x d. Labels are 1-based; lists are 0-based.
    """

    x: np.ndarray
    U: list[np.ndarray]
    W: list[np.ndarray]
    V: list[list[np.ndarray]]
    activation: Callable[[np.ndarray], np.ndarray] = lambda z: np.maximum(z, 0.0)

    @classmethod
    def from_construction(cls, c: ReluConstruction) -> "SingleLayerParams":
        K = c.K
        U = [-np.outer(c.b[k], np.eye(K)[k]) for k in range(K)]
        V = [[np.eye(K) for _ in range(K)] for _ in range(K)]
        return cls(c.embedding.copy(), U, [Wk.copy() for Wk in c.W], V)

    @classmethod
    def random(cls, K: int, d: int, d1: int, rng: np.random.Generator, activation=None):
        p = cls(rng.normal(size=(K, d)),
                [rng.normal(size=(d1, d)) for _ in range(K)],
                [rng.normal(size=(d1, d)) for _ in range(K)],
                [[rng.normal(size=(d, d)) for _ in range(K)] for _ in range(K)])
        if activation is not None:
            p.activation = activation
        return p


def single_layer_readout(graph: LabeledMultigraph, params: SingleLayerParams) -> np.ndarray:
    """Sum over nodes of the label-specific single-layer representation."""
    K, d = params.x.shape
    if len(params.U) < graph.K or params.U[0].shape[1] != d or params.W[0].shape[1] != d:
        raise DimensionMismatch("parameter shapes do not match the embedding table")
    d1 = params.U[0].shape[0]
    total = np.zeros(d1)
    for i in range(graph.num_nodes):
        k = graph.labels[i] - 1
        msg = np.zeros(d)
        for j in graph.adjacency[i]:
            msg += params.V[k][graph.labels[j] - 1] @ params.x[graph.labels[j] - 1]
        total += params.activation(params.U[k] @ params.x[k] + params.W[k] @ msg)
    return total
