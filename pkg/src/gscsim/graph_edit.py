"""Graph edit distance between small labelled directed graphs.

Exact search is a depth-first branch and bound over injective node
assignments with incremental edge accounting; it is intended for the small
graphs this pipeline produces (question graphs and two-node triplet graphs).
A beam variant handles larger graphs approximately when explicitly allowed.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass

EXACT_NODE_LIMIT = 8

DELETED = -1
UNSET = -2


class GedSizeError(ValueError):
    """Graph too large for exact search and no heuristic allowed."""


@dataclass(frozen=True)
class GedCosts:
    """Edit costs; identity substitutions are always free."""

    w_node: float = 1.0
    w_edge: float = 1.0
    w_node_indel: float | None = None
    w_edge_indel: float | None = None

    def __post_init__(self):
        # indel costs default to the matching substitution cost
        if self.w_node_indel is None:
            object.__setattr__(self, "w_node_indel", self.w_node)
        if self.w_edge_indel is None:
            object.__setattr__(self, "w_edge_indel", self.w_edge)
        for name in ("w_node", "w_edge", "w_node_indel", "w_edge_indel"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class LabelledGraph:
    """Directed graph with hashable node and edge labels; parallel edges allowed."""

    node_labels: tuple
    edges: tuple[tuple[int, int, object], ...] = ()

    def __post_init__(self):
        n = len(self.node_labels)
        for a, b, _ in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) references a missing node")

    @property
    def order(self) -> int:
        return len(self.node_labels)

    @property
    def size(self) -> int:
        return len(self.edges)

    def edge_multisets(self) -> dict[tuple[int, int], Counter]:
        out: dict[tuple[int, int], Counter] = {}
        for a, b, label in self.edges:
            out.setdefault((a, b), Counter())[label] += 1
        return out


def _edge_set_cost(a: Counter | None, b: Counter | None, costs: GedCosts) -> float:
    """Cheapest way to turn one edge-label multiset into another."""
    na = sum(a.values()) if a else 0
    nb = sum(b.values()) if b else 0
    if na == 0 and nb == 0:
        return 0.0
    eq = 0
    if a and b:
        eq = sum(min(c, b[label]) for label, c in a.items())
    r1, r2 = na - eq, nb - eq
    sub = min(costs.w_edge, 2.0 * costs.w_edge_indel)
    return sub * min(r1, r2) + costs.w_edge_indel * abs(r1 - r2)


def _indel_count_cost(a: Counter | None, costs: GedCosts) -> float:
    return costs.w_edge_indel * (sum(a.values()) if a else 0)


def ged(
    g1: LabelledGraph,
    g2: LabelledGraph,
    costs: GedCosts | None = None,
    allow_heuristic: bool = False,
    beam_width: int = 64,
) -> float:
    """Minimum total edit cost transforming ``g1`` into ``g2``.

    Exact for graphs up to EXACT_NODE_LIMIT nodes each; beyond that a beam
    search runs instead when ``allow_heuristic`` is set (upper bound, not
    guaranteed minimal), otherwise :class:`GedSizeError` is raised.
    """
    costs = costs or GedCosts()
    if g1.order > EXACT_NODE_LIMIT or g2.order > EXACT_NODE_LIMIT:
        if not allow_heuristic:
            raise GedSizeError(
                f"graphs of order {g1.order} and {g2.order} exceed the exact "
                f"limit of {EXACT_NODE_LIMIT}; pass allow_heuristic=True"
            )
        return ged_beam(g1, g2, costs, beam_width)

    n1, n2 = g1.order, g2.order
    labels1, labels2 = g1.node_labels, g2.node_labels
    e1 = g1.edge_multisets()
    e2 = g2.edge_multisets()

    phi = [UNSET] * n1
    used = [False] * n2
    # start from the all-indel route so pruning has a finite incumbent
    best = (
        costs.w_node_indel * (n1 + n2)
        + costs.w_edge_indel * (g1.size + g2.size)
    )

    def leaf_cost() -> float:
        total = 0.0
        for j in range(n2):
            if not used[j]:
                total += costs.w_node_indel
        for (a, b), labels in e2.items():
            if not (used[a] and used[b]):
                total += _indel_count_cost(labels, costs)
        return total

    def map_cost(i: int, j: int) -> float:
        total = 0.0 if labels1[i] == labels2[j] else costs.w_node
        total += _edge_set_cost(e1.get((i, i)), e2.get((j, j)), costs)
        for u in range(i):
            pu = phi[u]
            if pu == DELETED:
                total += _indel_count_cost(e1.get((i, u)), costs)
                total += _indel_count_cost(e1.get((u, i)), costs)
            else:
                total += _edge_set_cost(e1.get((i, u)), e2.get((j, pu)), costs)
                total += _edge_set_cost(e1.get((u, i)), e2.get((pu, j)), costs)
        return total

    def delete_cost(i: int) -> float:
        total = costs.w_node_indel
        total += _indel_count_cost(e1.get((i, i)), costs)
        for u in range(i):
            total += _indel_count_cost(e1.get((i, u)), costs)
            total += _indel_count_cost(e1.get((u, i)), costs)
        return total

    def dfs(i: int, acc: float, used_count: int) -> None:
        nonlocal best
        bound = costs.w_node_indel * abs((n1 - i) - (n2 - used_count))
        if acc + bound >= best:
            return
        if i == n1:
            total = acc + leaf_cost()
            if total < best:
                best = total
            return
        for j in range(n2):
            if used[j]:
                continue
            step = map_cost(i, j)
            if acc + step < best:
                phi[i] = j
                used[j] = True
                dfs(i + 1, acc + step, used_count + 1)
                used[j] = False
                phi[i] = UNSET
        step = delete_cost(i)
        if acc + step < best:
            phi[i] = DELETED
            dfs(i + 1, acc + step, used_count)
            phi[i] = UNSET

    dfs(0, 0.0, 0)
    return best


def ged_beam(
    g1: LabelledGraph,
    g2: LabelledGraph,
    costs: GedCosts | None = None,
    beam_width: int = 64,
) -> float:
    """Beam-limited variant of :func:`ged`; returns an upper bound."""
    costs = costs or GedCosts()
    if beam_width < 1:
        raise ValueError("beam_width must be at least 1")
    n1, n2 = g1.order, g2.order
    labels1, labels2 = g1.node_labels, g2.node_labels
    e1 = g1.edge_multisets()
    e2 = g2.edge_multisets()

    def extend(acc: float, phi: tuple, used: frozenset, j: int | None) -> float:
        i = len(phi)
        if j is None:
            total = costs.w_node_indel + _indel_count_cost(e1.get((i, i)), costs)
            for u in range(i):
                total += _indel_count_cost(e1.get((i, u)), costs)
                total += _indel_count_cost(e1.get((u, i)), costs)
            return acc + total
        total = 0.0 if labels1[i] == labels2[j] else costs.w_node
        total += _edge_set_cost(e1.get((i, i)), e2.get((j, j)), costs)
        for u in range(i):
            pu = phi[u]
            if pu == DELETED:
                total += _indel_count_cost(e1.get((i, u)), costs)
                total += _indel_count_cost(e1.get((u, i)), costs)
            else:
                total += _edge_set_cost(e1.get((i, u)), e2.get((j, pu)), costs)
                total += _edge_set_cost(e1.get((u, i)), e2.get((pu, j)), costs)
        return acc + total

    states: list[tuple[float, tuple, frozenset]] = [(0.0, (), frozenset())]
    for i in range(n1):
        nxt: list[tuple[float, tuple, frozenset]] = []
        for acc, phi, used in states:
            for j in range(n2):
                if j in used:
                    continue
                nxt.append((extend(acc, phi, used, j), phi + (j,), used | {j}))
            nxt.append((extend(acc, phi, used, None), phi + (DELETED,), used))
        states = heapq.nsmallest(beam_width, nxt, key=lambda s: s[0])

    best = float("inf")
    for acc, phi, used in states:
        total = acc + costs.w_node_indel * (n2 - len(used))
        for (a, b), labels in e2.items():
            if not (a in used and b in used):
                total += _indel_count_cost(labels, costs)
        best = min(best, total)
    return best


def graph_from_dict(doc: dict) -> LabelledGraph:
    """Build a graph from {'nodes': [...], 'edges': [[src, label, dst], ...]}."""
    nodes = tuple(doc.get("nodes", []))
    edges = []
    for entry in doc.get("edges", []):
        if len(entry) != 3:
            raise ValueError(f"edge {entry!r} must be [source, label, target]")
        src, label, dst = entry
        edges.append((int(src), int(dst), label))
    return LabelledGraph(node_labels=nodes, edges=tuple(edges))
