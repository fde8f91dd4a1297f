"""Ground truth: in-memory Euler machinery, tour validation, and generators.

Everything here is independent of the streaming pipeline, so it can confirm
pipeline results from the other side: a classical in-memory tour builder, a
recursive merger that walks a circuit forest directly, a tour validator,
and seeded random generators for Eulerian and deliberately broken inputs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .stream_core import (
    DISCONNECTED,
    GraphEdge,
    IntegrityFault,
    ODD_DEGREE,
    StreamItem,
)

PERTURB_ODD = "odd"
PERTURB_DISCONNECTED = "disconnected"


@dataclass
class AdjacencyGraph:
    """Simple undirected graph with deterministic, sorted adjacency."""

    n: int
    edges: list[tuple[int, int]]
    adj: dict[int, list[tuple[int, int]]] = field(default_factory=dict)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "AdjacencyGraph":
        g = cls(n=n, edges=list(edges))
        for eid, (u, v) in enumerate(g.edges):
            g.adj.setdefault(u, []).append((v, eid))
            g.adj.setdefault(v, []).append((u, eid))
        for v in g.adj:
            g.adj[v].sort()
        return g

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj.get(v, ()))


def eulerian_reason(g: AdjacencyGraph) -> Optional[str]:
    """None when the graph has an Euler tour, otherwise why not.

    Odd degree is reported first; vertices of degree zero are ignored by the
    connectivity check.
    """
    active = [v for v in range(1, g.n + 1) if g.degree(v) > 0]
    for v in active:
        if g.degree(v) % 2 == 1:
            return ODD_DEGREE
    if not active:
        return None
    seen = {active[0]}
    stack = [active[0]]
    while stack:
        v = stack.pop()
        for w, _ in g.adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(active):
        return DISCONNECTED
    return None


def is_eulerian(g: AdjacencyGraph) -> bool:
    return eulerian_reason(g) is None


def hierholzer(g: AdjacencyGraph) -> Optional[list[tuple[int, int]]]:
    """Classical in-memory Euler tour, or None when none exists.

    Deterministic: starts from the lowest vertex of positive degree and
    always follows the lowest-numbered unused neighbor.
    """
    if eulerian_reason(g) is not None:
        return None
    if g.m == 0:
        return []
    start = min(v for v in range(1, g.n + 1) if g.degree(v) > 0)
    used = [False] * g.m
    cursor = {v: 0 for v in g.adj}
    stack = [start]
    order: list[int] = []
    while stack:
        v = stack[-1]
        lst = g.adj[v]
        i = cursor[v]
        while i < len(lst) and used[lst[i][1]]:
            i += 1
        cursor[v] = i
        if i == len(lst):
            order.append(stack.pop())
        else:
            w, eid = lst[i]
            used[eid] = True
            stack.append(w)
    order.reverse()
    return [(order[i], order[i + 1]) for i in range(len(order) - 1)]


@dataclass
class CircuitForest:
    """A circuit decomposition plus its rooted connection tree.

    ``circuits`` maps circuit id to its directed edge list; ``parent`` maps
    every non-root id to (parent id, shared vertex).  A valid forest has
    each non-root circuit starting at the vertex it shares with its parent.
    """

    circuits: dict[int, list[tuple[int, int]]]
    parent: dict[int, tuple[int, int]]
    root: int

    @classmethod
    def from_stream_items(cls, items: Iterable[StreamItem]) -> "CircuitForest":
        """Assemble a forest from phase-1 output, rotating members into place."""
        raw: dict[int, list[GraphEdge]] = {}
        parent: dict[int, tuple[int, int]] = {}
        for item in items:
            if isinstance(item, GraphEdge):
                raw.setdefault(item.f3, []).append(item)
            else:
                if item.succ in parent:
                    raise IntegrityFault(f"circuit {item.succ} has two parents")
                parent[item.succ] = (item.pred, item.cvertex)
        circuits: dict[int, list[tuple[int, int]]] = {}
        for cid, edges in raw.items():
            edges.sort(key=lambda e: e.f4)
            seq = [(e.tail, e.head) for e in edges]
            if cid in parent:
                share = parent[cid][1]
                pivot = next((i for i, (t, _) in enumerate(seq) if t == share), None)
                if pivot is None:
                    raise IntegrityFault(
                        f"circuit {cid} does not touch shared vertex {share}")
                seq = seq[pivot:] + seq[:pivot]
            circuits[cid] = seq
        roots = [cid for cid in circuits if cid not in parent]
        if len(roots) != 1:
            raise IntegrityFault(f"forest has roots {sorted(roots)}")
        return cls(circuits=circuits, parent=parent, root=roots[0])

    def validate(self) -> None:
        for cid, seq in self.circuits.items():
            if not seq:
                raise IntegrityFault(f"circuit {cid} is empty")
            for i, (_, head) in enumerate(seq):
                if head != seq[(i + 1) % len(seq)][0]:
                    raise IntegrityFault(f"circuit {cid} breaks at {i}")
        for cid, (pid, share) in self.parent.items():
            if pid not in self.circuits:
                raise IntegrityFault(f"parent {pid} of {cid} missing")
            if self.circuits[cid][0][0] != share:
                raise IntegrityFault(f"circuit {cid} does not start at {share}")
            if all(t != share for t, _ in self.circuits[pid]):
                raise IntegrityFault(f"vertex {share} not on parent {pid}")


def euler_tree_reference(forest: CircuitForest) -> list[tuple[int, int]]:
    """Recursive reference merger over a circuit forest.

    Walks the root circuit and, before consuming the next edge, descends
    into any unvisited child whose first vertex is the current vertex
    (lowest child id first).  Iterative so deep trees cannot overflow the
    interpreter stack.
    """
    forest.validate()
    children: dict[int, list[int]] = {}
    for cid, (pid, _) in forest.parent.items():
        children.setdefault(pid, []).append(cid)
    for lst in children.values():
        lst.sort()
    visited = {forest.root}
    out: list[tuple[int, int]] = []
    stack: list[tuple[int, int]] = [(forest.root, 0)]
    while stack:
        cid, i = stack[-1]
        seq = forest.circuits[cid]
        if i == len(seq):
            stack.pop()
            continue
        here = seq[i][0]
        child = next(
            (k for k in children.get(cid, ())
             if k not in visited and forest.circuits[k][0][0] == here),
            None)
        if child is not None:
            visited.add(child)
            stack.append((child, 0))
            continue
        out.append(seq[i])
        stack[-1] = (cid, i + 1)
    if len(visited) != len(forest.circuits):
        raise IntegrityFault("reference merge left circuits unvisited")
    return out


@dataclass(frozen=True)
class TourViolation:
    rule: str  # "coverage" or "chaining"
    index: int

    def __str__(self) -> str:
        return f"{self.rule} violation at tour index {self.index}"


def validate_tour(g: AdjacencyGraph, tour: list[tuple[int, int]]) -> Optional[TourViolation]:
    """None if the tour is a closed trail using every edge exactly once."""
    expected = {frozenset(e) for e in g.edges}
    if len(tour) != g.m:
        return TourViolation("coverage", len(tour))
    seen: set[frozenset[int]] = set()
    for i, (u, v) in enumerate(tour):
        pair = frozenset((u, v))
        if pair not in expected or pair in seen:
            return TourViolation("coverage", i)
        seen.add(pair)
        if i > 0 and tour[i - 1][1] != u:
            return TourViolation("chaining", i)
    if tour and tour[-1][1] != tour[0][0]:
        return TourViolation("chaining", len(tour) - 1)
    return None


class GenerationError(ValueError):
    """Generator parameters are infeasible."""


def gen_eulerian(n: int, target_m: int, seed: int) -> tuple[int, list[tuple[int, int]]]:
    """Random Eulerian graph as a union of edge-disjoint random cycles.

    Candidate cycles over random vertex subsets are added whole; any
    candidate that would duplicate an existing edge is skipped, which keeps
    all degrees even.  Attempts are retried (with sub-seeds derived from
    ``seed``) until the edge count lands within 10% of ``target_m`` and the
    positive-degree vertices are connected.  Deterministic per seed; the
    generator is the Mersenne Twister behind ``random.Random``.
    """
    if n < 3 or target_m < 3:
        raise GenerationError(f"need n >= 3 and target_m >= 3, got {n}, {target_m}")
    if target_m > n * (n - 1) // 2:
        raise GenerationError(f"target_m={target_m} exceeds simple-graph capacity")
    lo = max(3, -(-target_m * 9 // 10))  # ceil(0.9 * target)
    hi = target_m * 11 // 10
    for attempt in range(200):
        rng = random.Random(seed * 1_000_003 + attempt)
        edges: set[frozenset[int]] = set()
        order: list[tuple[int, int]] = []
        labels = {}

        def find(v):
            while labels.get(v, v) != v:
                labels[v] = labels.get(labels[v], labels[v])
                v = labels[v]
            return v

        stall = 0
        while len(order) < lo and stall < 60 * target_m:
            stall += 1
            width = min(n, 12)
            room = hi - len(order)
            if room < 3:
                break
            length = rng.randint(3, min(width, room))
            verts = rng.sample(range(1, n + 1), length)
            cycle = [(verts[i], verts[(i + 1) % length]) for i in range(length)]
            if any(frozenset(e) in edges for e in cycle):
                continue
            for u, v in cycle:
                edges.add(frozenset((u, v)))
                order.append((u, v))
                ru, rv = find(u), find(v)
                if ru != rv:
                    labels[ru] = rv
        if not (lo <= len(order) <= hi):
            continue
        active = {v for e in order for v in e}
        if len({find(v) for v in active}) != 1:
            continue
        rng.shuffle(order)
        return n, order
    raise GenerationError(
        f"could not generate a connected instance for n={n}, m={target_m}, seed={seed}")


def perturb(n: int, edges: list[tuple[int, int]], mode: str) -> tuple[int, list[tuple[int, int]]]:
    """Break an Eulerian graph in a named way.

    ``odd`` hangs one pendant edge off the lowest active vertex, creating
    two odd degrees without disconnecting anything.  ``disconnected`` adds a
    separate triangle on three fresh vertices, keeping all degrees even.
    """
    if mode == PERTURB_ODD:
        anchor = min((v for e in edges for v in e), default=1)
        return n + 1, edges + [(anchor, n + 1)]
    if mode == PERTURB_DISCONNECTED:
        a, b, c = n + 1, n + 2, n + 3
        return n + 3, edges + [(a, b), (b, c), (c, a)]
    raise ValueError(f"unknown perturbation {mode!r}")
