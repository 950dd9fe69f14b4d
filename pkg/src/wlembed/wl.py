"""1-dimensional Weisfeiler-Lehman label expansion.

Extended labels ``(center, neighborhood)`` are interned into a
:class:`LabelRegistry`, an insertion-ordered injective map onto
``1..J``. Index 0 is reserved for labels never interned (``UNKNOWN``).
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .graph import LabeledMultigraph, neighbor_label_multiset, _check_node

EMPTY = None
UNKNOWN = 0


class ExtendedLabel(NamedTuple):
    center: int | None
    neighborhood: tuple[int, ...] | None

    @classmethod
    def make(cls, center, neighborhood) -> "ExtendedLabel":
        nb = None if neighborhood is EMPTY else tuple(sorted(int(x) for x in neighborhood))
        return cls(None if center is EMPTY else int(center), nb)

    def __str__(self):
        c = "∅" if self.center is None else str(self.center)
        m = "∅" if self.neighborhood is None else "{" + ",".join(map(str, self.neighborhood)) + "}"
        return f"({c}, {m})"


class LabelRegistry:
    """Insertion-ordered injective table ExtendedLabel -> 1..J."""

    def __init__(self, labels: Iterable[ExtendedLabel] = ()):
        self._index: dict[ExtendedLabel, int] = {}
        self._labels: list[ExtendedLabel] = []
        for lab in labels:
            self.intern(lab)

    def __len__(self) -> int:
        return len(self._labels)

    @property
    def J(self) -> int:
        return len(self._labels)

    def __contains__(self, label) -> bool:
        return label in self._index

    def intern(self, label: ExtendedLabel) -> int:
        if not isinstance(label, ExtendedLabel):
            label = ExtendedLabel.make(*label)
        idx = self._index.get(label)
        if idx is None:
            self._labels.append(label)
            idx = self._index[label] = len(self._labels)
        return idx

    def lookup(self, label: ExtendedLabel) -> int:
        """Index of ``label``, or ``UNKNOWN`` when it was never interned."""
        return self._index.get(label, UNKNOWN)

    def label_of(self, index: int) -> ExtendedLabel:
        if not 1 <= index <= len(self._labels):
            raise KeyError(index)
        return self._labels[index - 1]

    def entries(self) -> list[tuple[int, ExtendedLabel]]:
        return list(enumerate(self._labels, start=1))

    def dump(self) -> str:
        """``index<TAB>center<TAB>multiset`` lines."""
        rows = []
        for idx, lab in self.entries():
            c = "-" if lab.center is None else str(lab.center)
            m = "-" if lab.neighborhood is None else ",".join(map(str, lab.neighborhood))
            rows.append(f"{idx}\t{c}\t{m}")
        return "\n".join(rows)

    def to_list(self) -> list:
        return [[lab.center, None if lab.neighborhood is None else list(lab.neighborhood)]
                for lab in self._labels]

    @classmethod
    def from_list(cls, rows) -> "LabelRegistry":
        return cls(ExtendedLabel.make(c, m) for c, m in rows)

    def __eq__(self, other):
        return isinstance(other, LabelRegistry) and self._labels == other._labels

    def __repr__(self):
        return f"LabelRegistry(J={self.J})"


def intern(registry: LabelRegistry, ext_label) -> int:
    return registry.intern(ext_label)


def extended_label(graph: LabeledMultigraph, i: int) -> ExtendedLabel:
    """``(ℓ_i, M_i)`` over the original node labels."""
    _check_node(graph, i)
    return ExtendedLabel(graph.labels[i], neighbor_label_multiset(graph, i))


def _step(graph: LabeledMultigraph, current: Sequence[int]) -> list[ExtendedLabel]:
    return [ExtendedLabel(current[i], tuple(sorted(current[j] for j in graph.adjacency[i])))
            for i in range(graph.num_nodes)]


def _assign(registry: LabelRegistry, labels, grow: bool) -> tuple[int, ...]:
    if grow:
        return tuple(registry.intern(lab) for lab in labels)
    return tuple(registry.lookup(lab) for lab in labels)


@dataclass
class RefinementResult:
    iterations: list[tuple[int, ...]]
    registry: LabelRegistry
    label_counts: list[int] = field(default_factory=list)

    @property
    def T(self) -> int:
        return len(self.iterations) - 1

    def final(self) -> tuple[int, ...]:
        return self.iterations[-1]


def wl_refine(graph: LabeledMultigraph, T: int, registry: LabelRegistry | None = None,
              grow: bool = True) -> RefinementResult:
    """Run ``T`` WL iterations, keeping every intermediate labeling.

    Iteration 0 interns ``(ℓ_i, ∅)``; iteration τ+1 interns
    ``(label_τ(i), multiset{label_τ(j) : j ∈ N_i})``. With ``grow=False``
    the registry is read-only and unseen labels map to ``UNKNOWN``.
    ``label_counts[τ]`` is the registry size J after iteration τ.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    if registry is None:
        registry = LabelRegistry()
    current = _assign(registry, [ExtendedLabel(lab, EMPTY) for lab in graph.labels], grow)
    iterations = [current]
    counts = [registry.J]
    for _ in range(T):
        current = _assign(registry, _step(graph, current), grow)
        iterations.append(current)
        counts.append(registry.J)
    return RefinementResult(iterations, registry, counts)


def wl_refine_many(graphs: Sequence[LabeledMultigraph], T: int,
                   registry: LabelRegistry | None = None) -> tuple[list[RefinementResult], list[int]]:
    """Refine a graph set iteration by iteration against one registry.

    Returns per-graph results and J after each iteration over the whole
    set, so that J_T counts expanded labels of depth at most T.
    """
    if registry is None:
        registry = LabelRegistry()
    current = [_assign(registry, [ExtendedLabel(lab, EMPTY) for lab in g.labels], True)
               for g in graphs]
    history = [[c] for c in current]
    counts = [registry.J]
    for _ in range(T):
        current = [_assign(registry, _step(g, c), True) for g, c in zip(graphs, current)]
        for h, c in zip(history, current):
            h.append(c)
        counts.append(registry.J)
    results = [RefinementResult(h, registry, list(counts)) for h in history]
    return results, counts


class WLTestResult(enum.Enum):
    NOT_ISOMORPHIC = "NotIsomorphic"
    INCONCLUSIVE = "Inconclusive"


def wl_isomorphism_test(g1: LabeledMultigraph, g2: LabeledMultigraph, max_iters: int,
                        registry: LabelRegistry | None = None) -> WLTestResult:
    """1-WL test on a shared registry.

    Returns ``NOT_ISOMORPHIC`` as soon as the label histograms differ and
    ``INCONCLUSIVE`` after ``max_iters`` iterations or once the joint
    coloring stops splitting.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if registry is None:
        registry = LabelRegistry()
    c1 = _assign(registry, [ExtendedLabel(lab, EMPTY) for lab in g1.labels], True)
    c2 = _assign(registry, [ExtendedLabel(lab, EMPTY) for lab in g2.labels], True)
    if Counter(c1) != Counter(c2):
        return WLTestResult.NOT_ISOMORPHIC
    n_colors = len(set(c1) | set(c2))
    for _ in range(max_iters):
        c1 = _assign(registry, _step(g1, c1), True)
        c2 = _assign(registry, _step(g2, c2), True)
        if Counter(c1) != Counter(c2):
            return WLTestResult.NOT_ISOMORPHIC
        new_colors = len(set(c1) | set(c2))
        if new_colors == n_colors:
            break
        n_colors = new_colors
    return WLTestResult.INCONCLUSIVE


def unfold(registry: LabelRegistry, index: int, depth: int):
    """Registry-independent nested form of a depth-``depth`` refined label.

    Two registries agree on ``unfold`` exactly when they encode the same
    WL color, which makes it usable to compare refinements run against
    different registries.
    """
    lab = registry.label_of(index)
    if depth == 0:
        return lab.center
    return (unfold(registry, lab.center, depth - 1),
            tuple(sorted(unfold(registry, j, depth - 1) for j in lab.neighborhood)))
