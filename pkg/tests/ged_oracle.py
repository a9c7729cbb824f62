"""Brute-force edit distance for small labelled graphs.

Independent of the package implementation: enumerates every injective
partial node mapping and prices node/edge edits directly.  Exponential,
so only usable for graphs with a handful of nodes.
"""

from __future__ import annotations

import itertools
from collections import Counter

from gscsim.graph_edit import GedCosts, LabelledGraph


def _edge_multisets(g: LabelledGraph) -> dict[tuple[int, int], Counter]:
    out: dict[tuple[int, int], Counter] = {}
    for a, b, lab in g.edges:
        out.setdefault((a, b), Counter())[lab] += 1
    return out


def _bag_cost(a: Counter, b: Counter, costs: GedCosts) -> float:
    """Cheapest way to turn one label multiset into another."""
    common = sum((a & b).values())
    extra_a = sum(a.values()) - common
    extra_b = sum(b.values()) - common
    swap = min(costs.w_edge, 2 * costs.w_edge_indel)
    return min(extra_a, extra_b) * swap + abs(extra_a - extra_b) * costs.w_edge_indel


def brute_force_ged(
    g1: LabelledGraph, g2: LabelledGraph, costs: GedCosts | None = None
) -> float:
    costs = costs or GedCosts()
    n1, n2 = g1.order, g2.order
    e1, e2 = _edge_multisets(g1), _edge_multisets(g2)
    nodes2 = range(n2)
    best = float("inf")

    for kept in itertools.chain.from_iterable(
        itertools.combinations(range(n1), r) for r in range(min(n1, n2) + 1)
    ):
        for image in itertools.permutations(nodes2, len(kept)):
            mapping = dict(zip(kept, image))
            cost = (n1 - len(kept)) * costs.w_node_indel
            cost += (n2 - len(kept)) * costs.w_node_indel
            for u, v in mapping.items():
                if g1.node_labels[u] != g2.node_labels[v]:
                    cost += costs.w_node
            for (a, b), bag in e1.items():
                if a in mapping and b in mapping:
                    other = e2.get((mapping[a], mapping[b]), Counter())
                    cost += _bag_cost(bag, other, costs)
                else:
                    cost += sum(bag.values()) * costs.w_edge_indel
            image_pairs = {(mapping[a], mapping[b])
                           for (a, b) in e1 if a in mapping and b in mapping}
            for (a, b), bag in e2.items():
                if (a, b) not in image_pairs:
                    cost += sum(bag.values()) * costs.w_edge_indel
            best = min(best, cost)
    return best
