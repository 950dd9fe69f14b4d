"""Synthetic label-counting and subgraph-detection datasets.

Positive graphs are a thinned 5-clique joined to one 5-node target
pattern; negative graphs are thinned random 4-regular graphs on 10 nodes.
Every node is then labeled uniformly from ``1..label_alphabet_size``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import GenerationBudgetExceeded, InfeasibleDegreeSequence, GenerationError
from .graph import DatasetRecord, LabeledMultigraph, build_graph


def _pattern(edges):
    return build_graph(5, [1] * 5, edges, K=1)


# Three pairwise non-isomorphic 5-node graphs with 7 edges each; equal
# node and edge counts mean none contains another.
TARGET_PATTERNS: dict[str, LabeledMultigraph] = {
    # hub 0 over the path 1-2-3-4
    "gem": _pattern([(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (2, 3), (3, 4)]),
    # K4 on 0..3 plus pendant 4
    "k4_pendant": _pattern([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)]),
    # adjacent pair 0,1 sharing neighbors 2,3,4
    "book": _pattern([(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)]),
}


@dataclass
class GeneratorSpec:
    task: str = "detection"
    positives_per_dataset: int = 300
    negatives_per_dataset: int = 300
    num_datasets: int = 3
    label_alphabet_size: int = 5
    p_drop: float = 0.25
    p_attach: float = 0.1
    max_degree: int = 4
    target_patterns: dict[str, LabeledMultigraph] = field(default_factory=lambda: dict(TARGET_PATTERNS))
    seed: int = 0
    max_attempts: int = 10_000

    def __post_init__(self):
        if self.task not in ("counting", "detection"):
            raise GenerationError(f"unknown task {self.task!r}")
        for name in ("p_drop", "p_attach"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise GenerationError(f"{name}={p} outside [0, 1]")
        for name, pat in self.target_patterns.items():
            if not pat.is_connected() or pat.max_degree() > self.max_degree:
                raise GenerationError(f"pattern {name} must be connected with degree <= {self.max_degree}")


def random_regular_graph(n: int, deg: int, rng: np.random.Generator,
                         max_tries: int = 10_000) -> LabeledMultigraph:
    """Uniform simple ``deg``-regular graph via the pairing model.

    Pairings that produce a self-loop or a repeated edge are rejected and
    redrawn. Nodes carry label 1.
    """
    if n < 0 or deg < 0 or (n * deg) % 2 or (n > 0 and deg >= n):
        raise InfeasibleDegreeSequence(f"no simple {deg}-regular graph on {n} nodes")
    points = np.repeat(np.arange(n), deg)
    for _ in range(max_tries):
        perm = rng.permutation(points)
        pairs = perm.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keyed = {(min(a, b), max(a, b)) for a, b in pairs.tolist()}
        if len(keyed) != len(pairs):
            continue
        return build_graph(n, [1] * n, sorted(keyed), K=1)
    raise GenerationBudgetExceeded(f"pairing model failed {max_tries} times for ({n}, {deg})")


def thin_edges(graph: LabeledMultigraph, p: float, rng: np.random.Generator) -> LabeledMultigraph:
    """Drop every edge independently with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise GenerationError(f"p={p} outside [0, 1]")
    keep = rng.random(len(graph.edges)) >= p
    edges = [e for e, k in zip(graph.edges, keep) if k]
    return build_graph(graph.num_nodes, graph.labels, edges, K=graph.K)


def attach_subgraph(base: LabeledMultigraph, pattern: LabeledMultigraph, p: float,
                    rng: np.random.Generator) -> LabeledMultigraph:
    """Disjoint union of ``base`` and ``pattern`` plus random cross edges.

    Each pair (u in base, v in pattern) is joined with probability ``p``.
    Pattern nodes are appended after the base nodes.
    """
    if not 0.0 <= p <= 1.0:
        raise GenerationError(f"p={p} outside [0, 1]")
    nb, npat = base.num_nodes, pattern.num_nodes
    edges = list(base.edges) + [(i + nb, j + nb) for i, j in pattern.edges]
    join = rng.random((nb, npat)) < p
    for u, v in zip(*np.nonzero(join)):
        edges.append((int(u), int(v) + nb))
    K = max(base.K, pattern.K)
    return build_graph(nb + npat, base.labels + pattern.labels, edges, K=K)


def _bitmasks(graph: LabeledMultigraph) -> np.ndarray:
    masks = np.zeros(graph.num_nodes, dtype=np.uint64)
    for i, nbrs in enumerate(graph.adjacency):
        m = 0
        for j in nbrs:
            m |= 1 << j
        masks[i] = m
    return masks


def _search_order(pattern: LabeledMultigraph) -> np.ndarray:
    # BFS from the highest-degree node: each later node has a mapped neighbor
    order: list[int] = []
    seen: set[int] = set()
    starts = sorted(range(pattern.num_nodes), key=lambda v: -pattern.degrees[v])
    for s in starts:
        if s in seen:
            continue
        seen.add(s)
        queue = deque([s])
        while queue:
            u = queue.popleft()
            order.append(u)
            for v in sorted(pattern.adjacency[u], key=lambda v: -pattern.degrees[v]):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
    return np.asarray(order, dtype=np.intc)


def contains_subgraph(graph: LabeledMultigraph, pattern: LabeledMultigraph) -> bool:
    """Label-blind, non-induced subgraph containment by backtracking."""
    if pattern.num_nodes > graph.num_nodes:
        return False
    if pattern.num_nodes == 0:
        return True
    if graph.num_nodes > 64:
        return kernels.python_backend.subgraph_exists(
            _big_masks(graph), _big_masks(pattern), _search_order(pattern))
    return kernels.subgraph_exists(_bitmasks(graph), _bitmasks(pattern), _search_order(pattern))


def _big_masks(graph: LabeledMultigraph) -> list[int]:
    return [sum(1 << j for j in nbrs) for nbrs in graph.adjacency]


def contained_patterns(graph: LabeledMultigraph, patterns: dict[str, LabeledMultigraph]) -> list[str]:
    return [name for name, pat in patterns.items() if contains_subgraph(graph, pat)]


def _label(graph: LabeledMultigraph, K: int, rng: np.random.Generator) -> LabeledMultigraph:
    labels = rng.integers(1, K + 1, size=graph.num_nodes)
    return graph.relabel(labels.tolist(), K=K)


def generate_positive(spec: GeneratorSpec, rng: np.random.Generator) -> tuple[LabeledMultigraph, str]:
    names = list(spec.target_patterns)
    for _ in range(spec.max_attempts):
        base = thin_edges(random_regular_graph(5, 4, rng), spec.p_drop, rng)
        name = names[int(rng.integers(len(names)))]
        g = attach_subgraph(base, spec.target_patterns[name], spec.p_attach, rng)
        if not g.is_connected() or g.max_degree() > spec.max_degree:
            continue
        found = contained_patterns(g, spec.target_patterns)
        if len(found) == 1:
            return _label(g, spec.label_alphabet_size, rng), found[0]
    raise GenerationBudgetExceeded(f"no positive graph accepted in {spec.max_attempts} attempts")


def generate_negative(spec: GeneratorSpec, rng: np.random.Generator) -> LabeledMultigraph:
    for _ in range(spec.max_attempts):
        g = thin_edges(random_regular_graph(10, 4, rng), spec.p_drop, rng)
        if not g.is_connected() or g.max_degree() > spec.max_degree:
            continue
        if not contained_patterns(g, spec.target_patterns):
            return _label(g, spec.label_alphabet_size, rng)
    raise GenerationBudgetExceeded(f"no negative graph accepted in {spec.max_attempts} attempts")


def counting_target(graph: LabeledMultigraph, label: int = 1) -> int:
    return sum(1 for x in graph.labels if x == label)


def generate_dataset(spec: GeneratorSpec, dataset_index: int = 0) -> list[DatasetRecord]:
    """One dataset: positives first, then negatives.

    Each graph slot draws from its own child stream of
    ``SeedSequence([spec.seed, task_code, dataset_index])`` so slots are
    independent and reproducible.
    """
    task_code = 0 if spec.task == "detection" else 1
    root = np.random.SeedSequence([spec.seed, task_code, dataset_index])
    n_pos, n_neg = spec.positives_per_dataset, spec.negatives_per_dataset
    streams = root.spawn(n_pos + n_neg)
    records = []
    for slot, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        if slot < n_pos:
            g, _ = generate_positive(spec, rng)
            cls = 1
        else:
            g = generate_negative(spec, rng)
            cls = 0
        target = cls if spec.task == "detection" else counting_target(g)
        records.append(DatasetRecord(g, target))
    return records


def generate_datasets(spec: GeneratorSpec) -> list[list[DatasetRecord]]:
    return [generate_dataset(spec, i) for i in range(spec.num_datasets)]
