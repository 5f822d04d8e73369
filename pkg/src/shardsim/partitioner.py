"""Weighted balanced k-way graph partitioning.

Implements the offline partitioning used by the partition baseline policy:
heavy-edge coarsening followed by greedy single-vertex refinement moves under
a hard per-cluster vertex cap.  A brute-force enumerator serves as the exact
oracle for small instances, and the graph supports online single-edge weight
increments for the streaming variant.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass


class SelfLoop(Exception):
    pass


class UncoveredVertex(Exception):
    pass


class Infeasible(Exception):
    pass


class TooLarge(Exception):
    pass


class WeightedGraph:
    """Undirected graph with positive integer edge weights, no self-loops."""

    def __init__(self):
        self.adj: dict = {}  # vertex -> {neighbor: weight}

    @property
    def vertices(self):
        return self.adj.keys()

    def add_vertex(self, v) -> None:
        self.adj.setdefault(v, {})

    def weight(self, u, v) -> int:
        return self.adj.get(u, {}).get(v, 0)

    def add_edge(self, u, v, weight: int = 1) -> None:
        if u == v:
            raise SelfLoop(f"self-loop on {u!r}")
        if weight < 1:
            raise ValueError("edge weight must be >= 1")
        self.adj.setdefault(u, {})[v] = self.adj.get(u, {}).get(v, 0) + weight
        self.adj.setdefault(v, {})[u] = self.adj[u][v]

    def online_increment(self, u, v) -> None:
        """Bump w(u, v) by one, creating vertices/edge as needed."""
        self.add_edge(u, v, 1)

    def edges(self):
        for u, nbrs in self.adj.items():
            for v, w in nbrs.items():
                if u < v:
                    yield u, v, w

    def __len__(self):
        return len(self.adj)


@dataclass
class Partition:
    assignment: dict  # vertex -> cluster index
    k: int
    balance_cap: int

    def cluster_sizes(self) -> list:
        sizes = [0] * self.k
        for c in self.assignment.values():
            sizes[c] += 1
        return sizes


def graph_from_transactions(txs) -> WeightedGraph:
    """Co-occurrence graph: edge weight counts write-set pairings."""
    g = WeightedGraph()
    for tx in txs:
        ws = tx.write_set
        for acc in ws:
            g.add_vertex(acc)
        for a, b in itertools.combinations(ws, 2):
            g.add_edge(a, b, 1)
    return g


def cut_weight(graph: WeightedGraph, partition: Partition) -> int:
    total = 0
    assignment = partition.assignment
    for u, v, w in graph.edges():
        if u not in assignment or v not in assignment:
            raise UncoveredVertex(u if u not in assignment else v)
        if assignment[u] != assignment[v]:
            total += w
    for v in graph.vertices:
        if v not in assignment:
            raise UncoveredVertex(v)
    return total


def partition_bruteforce(graph: WeightedGraph, k: int, balance_cap: int) -> Partition:
    """Exact minimum-cut feasible partition by exhaustive enumeration.

    Ties break toward the lexicographically smallest assignment vector over
    the sorted vertex order.  Only meant for graphs with at most 12 vertices.
    """
    vertices = sorted(graph.vertices)
    if len(vertices) > 12:
        raise TooLarge(f"{len(vertices)} vertices exceeds the enumeration budget")
    if k < 1 or balance_cap * k < len(vertices):
        raise Infeasible("balance cap times k below vertex count")
    edge_list = [(vertices.index(u), vertices.index(v), w) for u, v, w in graph.edges()]
    best = None
    best_cut = None
    for labels in itertools.product(range(k), repeat=len(vertices)):
        sizes = [0] * k
        ok = True
        for c in labels:
            sizes[c] += 1
            if sizes[c] > balance_cap:
                ok = False
                break
        if not ok:
            continue
        cut = sum(w for i, j, w in edge_list if labels[i] != labels[j])
        if best_cut is None or cut < best_cut:
            best_cut = cut
            best = labels
    return Partition(dict(zip(vertices, best)) if best else {}, k, balance_cap)


def _coarsen(adj: dict, node_weight: dict, balance_cap: int):
    """One heavy-edge matching pass; returns the coarser graph and mapping."""
    matched = {}
    # Merged nodes stay at half the cap or below so the initial assignment
    # can still bin-pack them; full-cap nodes leave no packing slack.
    merge_limit = max(2, balance_cap // 2)
    order = sorted(adj, key=lambda v: (-max(adj[v].values(), default=0), v))
    for v in order:
        if v in matched:
            continue
        best = None
        for n, w in sorted(adj[v].items(), key=lambda kv: (-kv[1], kv[0])):
            if n not in matched and node_weight[v] + node_weight[n] <= merge_limit:
                best = n
                break
        matched[v] = best if best is not None else v
        if best is not None:
            matched[best] = v
    # Build merged nodes; the smaller vertex names the merged node.
    rep = {}
    for v, m in matched.items():
        rep[v] = v if m == v else min(v, m)
    coarse_adj: dict = {}
    coarse_weight: dict = {}
    for v in adj:
        r = rep[v]
        coarse_adj.setdefault(r, {})
        coarse_weight[r] = coarse_weight.get(r, 0) + node_weight[v]
    for v, nbrs in adj.items():
        rv = rep[v]
        for n, w in nbrs.items():
            rn = rep[n]
            if rv != rn:
                coarse_adj[rv][rn] = coarse_adj[rv].get(rn, 0) + w
    return coarse_adj, coarse_weight, rep


def _initial_assign(adj, node_weight, k, balance_cap):
    assignment = {}
    sizes = [0] * k
    for v in sorted(adj, key=lambda v: (-node_weight[v], v)):
        gains = [0] * k
        for n, w in adj[v].items():
            if n in assignment:
                gains[assignment[n]] += w
        candidates = [
            c for c in range(k) if sizes[c] + node_weight[v] <= balance_cap
        ]
        if not candidates:
            raise Infeasible("no cluster can absorb a coarse node within the cap")
        c = max(candidates, key=lambda c: (gains[c], -sizes[c], -c))
        assignment[v] = c
        sizes[c] += node_weight[v]
    return assignment


def _refine(adj, node_weight, assignment, k, balance_cap, rng, max_passes=8):
    sizes = [0] * k
    for v, c in assignment.items():
        sizes[c] += node_weight[v]
    order = sorted(adj)
    for _ in range(max_passes):
        rng.shuffle(order)
        improved = False
        for v in order:
            cur = assignment[v]
            link = [0] * k
            for n, w in adj[v].items():
                link[assignment[n]] += w
            best_c = cur
            best_gain = 0
            for c in range(k):
                if c == cur or sizes[c] + node_weight[v] > balance_cap:
                    continue
                gain = link[c] - link[cur]  # cut reduction of moving v to c
                better = gain > best_gain or (
                    # equal-cut tie-break: spread intra weight toward the
                    # lighter cluster, then the lower index
                    gain == best_gain
                    and gain > 0
                    and (sizes[c], c) < (sizes[best_c], best_c)
                )
                if better:
                    best_gain = gain
                    best_c = c
            if best_c != cur:
                assignment[v] = best_c
                sizes[cur] -= node_weight[v]
                sizes[best_c] += node_weight[v]
                improved = True
        if not improved:
            break
    return assignment


def partition_greedy(graph: WeightedGraph, k: int, balance_cap: int, seed: int = 0) -> Partition:
    """Heavy-edge coarsening plus greedy boundary refinement.

    Deterministic for a fixed seed; output always respects the vertex cap.
    """
    n = len(graph)
    if k < 1:
        raise ValueError("k must be positive")
    if balance_cap * k < n:
        raise Infeasible("balance cap times k below vertex count")
    if n == 0:
        return Partition({}, k, balance_cap)
    if k == 1:
        return Partition({v: 0 for v in graph.vertices}, k, balance_cap)

    rng = random.Random(seed)
    adj = {v: dict(nbrs) for v, nbrs in graph.adj.items()}
    weight = {v: 1 for v in adj}
    levels = []  # (fine_adj, fine_weight, rep) per coarsening step
    while len(adj) > max(2 * k, 16):
        coarse_adj, coarse_weight, rep = _coarsen(adj, weight, balance_cap)
        if len(coarse_adj) == len(adj):
            break
        levels.append((adj, weight, rep))
        adj, weight = coarse_adj, coarse_weight

    while True:
        try:
            assignment = _initial_assign(adj, weight, k, balance_cap)
            break
        except Infeasible:
            if not levels:
                raise  # unit weights: genuinely infeasible
            # coarse nodes would not bin-pack; retry one level finer
            adj, weight, _ = levels.pop()
    assignment = _refine(adj, weight, assignment, k, balance_cap, rng)

    for fine_adj, fine_weight, rep in reversed(levels):
        assignment = {v: assignment[r] for v, r in rep.items()}
        assignment = _refine(fine_adj, fine_weight, assignment, k, balance_cap, rng)
    return Partition(assignment, k, balance_cap)


def save_partition(partition: Partition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for vertex in sorted(partition.assignment):
            fh.write(f"{vertex} {partition.assignment[vertex]}\n")


def load_partition(path, k: int, balance_cap: int | None = None) -> Partition:
    assignment = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            vertex, cluster = line.split()
            assignment[vertex] = int(cluster)
    cap = balance_cap if balance_cap is not None else len(assignment)
    return Partition(assignment, k, cap)
