"""Labeled undirected multigraphs and the JSONL record format."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import IndexOutOfRange, LabelOutOfAlphabet, SelfLoop, GraphError


@dataclass(frozen=True)
class LabeledMultigraph:
    """Immutable undirected K-labeled multigraph.

    Labels are 1-based integers in ``1..K``. Parallel edges are kept in
    ``edges`` but collapsed in every neighborhood query.
    """

    num_nodes: int
    labels: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    K: int
    bond_orders: tuple[int, ...] | None = field(default=None, compare=False)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        nbrs: list[set[int]] = [set() for _ in range(self.num_nodes)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        return tuple(tuple(sorted(s)) for s in nbrs)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def simple_edges(self) -> list[tuple[int, int]]:
        """Distinct edges (i < j) in ascending order."""
        return sorted({(min(i, j), max(i, j)) for i, j in self.edges})

    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    def is_connected(self) -> bool:
        if self.num_nodes == 0:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == self.num_nodes

    def label_specific_max_degree(self) -> int:
        """Largest number of same-labeled neighbors of any node."""
        best = 0
        for i in range(self.num_nodes):
            counts: dict[int, int] = {}
            for j in self.adjacency[i]:
                counts[self.labels[j]] = counts.get(self.labels[j], 0) + 1
            best = max(best, max(counts.values(), default=0))
        return best

    def relabel(self, labels: Sequence[int], K: int | None = None) -> "LabeledMultigraph":
        return build_graph(self.num_nodes, labels, self.edges,
                           K=self.K if K is None else K, bond_orders=self.bond_orders)

    def permute(self, perm: Sequence[int]) -> "LabeledMultigraph":
        """Return the graph with node ``i`` moved to position ``perm[i]``."""
        if sorted(perm) != list(range(self.num_nodes)):
            raise GraphError("perm is not a permutation of the node indices")
        labels = [0] * self.num_nodes
        for i, p in enumerate(perm):
            labels[p] = self.labels[i]
        edges = [(perm[i], perm[j]) for i, j in self.edges]
        return build_graph(self.num_nodes, labels, edges, K=self.K, bond_orders=self.bond_orders)


def build_graph(num_nodes: int, labels: Sequence[int], edge_list: Iterable[Sequence[int]],
                K: int | None = None, bond_orders: Sequence[int] | None = None) -> LabeledMultigraph:
    """Validate input and construct a :class:`LabeledMultigraph`.

    ``K`` defaults to the largest label present (at least 1).
    """
    if num_nodes < 0:
        raise GraphError("num_nodes must be nonnegative")
    labels = tuple(int(x) for x in labels)
    if len(labels) != num_nodes:
        raise GraphError(f"expected {num_nodes} labels, got {len(labels)}")
    if K is None:
        K = max(labels, default=1)
    for i, lab in enumerate(labels):
        if not 1 <= lab <= K:
            raise LabelOutOfAlphabet(f"label {lab} of node {i} not in 1..{K}")
    edges = []
    for e in edge_list:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < num_nodes and 0 <= j < num_nodes):
            raise IndexOutOfRange(f"edge ({i}, {j}) references a node outside 0..{num_nodes - 1}")
        if i == j:
            raise SelfLoop(f"self-loop on node {i}")
        edges.append((min(i, j), max(i, j)))
    if bond_orders is not None:
        bond_orders = tuple(int(b) for b in bond_orders)
        if len(bond_orders) != len(edges):
            raise GraphError("bond_orders must align with edges")
    return LabeledMultigraph(num_nodes, labels, tuple(edges), int(K), bond_orders)


def _check_node(graph: LabeledMultigraph, i: int) -> None:
    if not 0 <= i < graph.num_nodes:
        raise IndexOutOfRange(f"node {i} not in 0..{graph.num_nodes - 1}")


def neighbors(graph: LabeledMultigraph, i: int) -> tuple[int, ...]:
    """Collapsed neighbor set of node ``i`` in ascending order."""
    _check_node(graph, i)
    return graph.adjacency[i]


def neighbor_label_multiset(graph: LabeledMultigraph, i: int) -> tuple[int, ...]:
    """Sorted labels of the collapsed neighbors of ``i``."""
    _check_node(graph, i)
    return tuple(sorted(graph.labels[j] for j in graph.adjacency[i]))


@dataclass(frozen=True)
class DatasetRecord:
    graph: LabeledMultigraph
    target: float


def record_to_json(record: DatasetRecord) -> str:
    g = record.graph
    payload = {
        "labels": list(g.labels),
        "edges": [list(e) for e in g.edges],
        "target": record.target,
    }
    return json.dumps(payload, separators=(",", ":"))


def record_from_json(line: str, K: int | None = None) -> DatasetRecord:
    obj = json.loads(line)
    labels = obj["labels"]
    graph = build_graph(len(labels), labels, obj.get("edges", []), K=K)
    target = obj.get("target", 0.0)
    return DatasetRecord(graph, target)


def write_jsonl(path, records: Iterable[DatasetRecord]) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(record_to_json(rec) + "\n")


def read_jsonl(path, K: int | None = None) -> list[DatasetRecord]:
    """Read records; when ``K`` is None every graph gets the file-wide max label."""
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip()]
    if K is None:
        K = max((max(json.loads(ln)["labels"], default=1) for ln in lines), default=1)
    return [record_from_json(ln, K=K) for ln in lines]


def iter_jsonl(lines: Iterable[str], K: int | None = None) -> Iterator[DatasetRecord]:
    for ln in lines:
        if ln.strip():
            yield record_from_json(ln, K=K)
