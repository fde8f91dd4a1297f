"""Phase 1: one streaming pass that splits the edge stream into circuits.

The pass buffers at most ``n`` undirected edges.  Whenever the buffer is
full a circuit is extracted (a full buffer always contains one, because any
subgraph on at most ``n`` vertices with ``n`` edges has a cycle), annotated
graph edges are emitted, and an in-memory connectivity tree over circuit
ids is maintained.  At end of stream the leftover buffer is drained the
same way; if it is non-empty and acyclic some vertex has odd degree and the
graph is rejected.  Finally the tree is rooted at the first circuit and the
stored tree edges are emitted as info edges carrying parent depths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .stream_core import (
    DISCONNECTED,
    GraphEdge,
    InfoEdge,
    IntegrityFault,
    NotEulerianError,
    ODD_DEGREE,
    Processor,
    Stream,
    StreamItem,
    StreamPipeline,
)


@dataclass
class Circuit:
    """A closed trail stored as directed (tail, head) pairs."""

    id: int
    edges: list[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.edges)

    def vertices_in_order(self) -> list[int]:
        """Distinct vertices in first-visit order along the trail."""
        seen: set[int] = set()
        out = []
        for tail, _ in self.edges:
            if tail not in seen:
                seen.add(tail)
                out.append(tail)
        return out

    def rotate_to(self, vertex: int) -> None:
        """Cyclically shift the trail so it starts at ``vertex``."""
        for i, (tail, _) in enumerate(self.edges):
            if tail == vertex:
                self.edges = self.edges[i:] + self.edges[:i]
                return
        raise IntegrityFault(f"vertex {vertex} not on circuit {self.id}")

    def check_chained(self) -> None:
        for i, (_, head) in enumerate(self.edges):
            nxt = self.edges[(i + 1) % len(self.edges)]
            if head != nxt[0]:
                raise IntegrityFault(f"circuit {self.id} breaks at position {i + 1}")


class EdgeBuffer:
    """Adjacency view over the undirected edges currently held in memory."""

    def __init__(self) -> None:
        self.adj: dict[int, set[int]] = {}
        self.edge_count = 0

    def add(self, u: int, v: int) -> None:
        if v in self.adj.get(u, ()):  # ingestion already rejects duplicates
            raise IntegrityFault(f"edge ({u}, {v}) buffered twice")
        self.adj.setdefault(u, set()).add(v)
        self.adj.setdefault(v, set()).add(u)
        self.edge_count += 1

    def remove(self, u: int, v: int) -> None:
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        if not self.adj[u]:
            del self.adj[u]
        if not self.adj[v]:
            del self.adj[v]
        self.edge_count -= 1


def extract_circuit(buffer: EdgeBuffer) -> Optional[Circuit]:
    """Remove and return one edge-simple cycle, or None if the buffer is acyclic.

    Deterministic walk: depth-first from the lowest-numbered vertex with
    positive degree, always stepping to the lowest-numbered neighbor whose
    edge is still unused in this attempt.  The first edge that lands on a
    vertex of the active path closes the cycle; abandoned branches stay
    consumed for the remainder of the attempt.
    """
    consumed: set[frozenset[int]] = set()
    for start in sorted(buffer.adj):
        path = [start]
        on_path = {start: 0}
        stack: list[tuple[int, list[int]]] = [(start, sorted(buffer.adj[start]))]
        cursor = [0]
        while stack:
            v, nbrs = stack[-1]
            i = cursor[-1]
            step = None
            while i < len(nbrs):
                w = nbrs[i]
                i += 1
                if frozenset((v, w)) not in consumed:
                    step = w
                    break
            cursor[-1] = i
            if step is None:
                stack.pop()
                cursor.pop()
                del on_path[path[-1]]
                path.pop()
                continue
            consumed.add(frozenset((v, step)))
            if step in on_path:
                cut = on_path[step]
                cycle = [(path[k], path[k + 1]) for k in range(cut, len(path) - 1)]
                cycle.append((path[-1], step))
                for a, b in cycle:
                    buffer.remove(a, b)
                return Circuit(0, cycle)
            on_path[step] = len(path)
            path.append(step)
            stack.append((step, sorted(buffer.adj[step])))
            cursor.append(0)
    return None


class LabelUnion:
    """Union-find over sparse integer labels with directed merges."""

    def __init__(self) -> None:
        self.parent: dict[int, int] = {}

    def find(self, label: int) -> int:
        if label == 0:
            return 0
        root = label
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(label, label) != label:
            self.parent[label], label = root, self.parent[label]
        return root

    def union_into(self, label: int, target: int) -> None:
        a, b = self.find(label), self.find(target)
        if a != b:
            self.parent[a] = b

    def __len__(self) -> int:
        return len(self.parent)


@dataclass
class TreeRecord:
    """A connectivity-tree edge held until rooting decides its orientation."""

    a: int  # circuit that created the edge
    b: int  # previously existing circuit
    cvertex: int


@dataclass
class Phase1State:
    """All in-memory state of the phase-1 pass.

    ``com`` tracks the connected component label of each vertex in the graph
    formed by the circuits emitted so far (0 means unseen); ``pre`` records
    the first circuit that used a vertex.  The connectivity tree keeps one
    vertex per circuit that either introduced a new graph vertex or joined
    existing components, and one ``TreeRecord`` per tree edge.
    """

    n: int
    fidelity_relabel: bool = False
    com: list[int] = field(default_factory=list)
    pre: list[int] = field(default_factory=list)
    cir: int = 0
    buffer: EdgeBuffer = field(default_factory=EdgeBuffer)
    labels: LabelUnion = field(default_factory=LabelUnion)
    tree_vertices: set[int] = field(default_factory=set)
    tree_records: list[TreeRecord] = field(default_factory=list)
    tree_forest: LabelUnion = field(default_factory=LabelUnion)
    flag1_parents: list[int] = field(default_factory=list)
    # per-circuit flags, reset after each emission
    s: bool = False
    s_edge: int = 0
    s_vert: int = 0
    s_comp: set[int] = field(default_factory=lambda: {0})
    com_star: int = 0

    def __post_init__(self) -> None:
        if not self.com:
            self.com = [0] * (self.n + 1)
        if not self.pre:
            self.pre = [0] * (self.n + 1)

    def component(self, v: int) -> int:
        if self.fidelity_relabel:
            return self.com[v]
        return self.labels.find(self.com[v])

    def add_tree_vertex(self, cid: int) -> None:
        self.tree_vertices.add(cid)

    def add_tree_edge(self, cid: int, other: int, cvertex: int) -> None:
        if other not in self.tree_vertices:
            raise IntegrityFault(f"tree edge to unknown circuit {other}")
        if self.tree_forest.find(cid) == self.tree_forest.find(other):
            raise IntegrityFault(
                f"circuit tree would close a cycle between {cid} and {other}")
        self.tree_forest.union_into(cid, other)
        self.tree_records.append(TreeRecord(cid, other, cvertex))

    def reset_circuit_flags(self) -> None:
        self.s = False
        self.s_edge = 0
        self.s_vert = 0
        self.s_comp = {0}
        self.com_star = 0

    def live_words(self) -> int:
        # com + pre arrays, two words per buffered edge, one per tree vertex,
        # three per stored tree record, one per pending flag-1 parent, the
        # label union table, and a handful of scalars.
        return (
            2 * self.n
            + 2 * self.buffer.edge_count
            + len(self.tree_vertices)
            + 3 * len(self.tree_records)
            + len(self.flag1_parents)
            + len(self.labels)
            + len(self.s_comp)
            + 8
        )


def new_test(circuit: Circuit, state: Phase1State) -> None:
    """Record first-time vertices and, if any, give the circuit a tree vertex.

    The first previously-seen vertex along the trail (if any) fixes the
    candidate tree edge and the shared vertex for later emission.
    """
    for v in circuit.vertices_in_order():
        if state.pre[v] == 0:
            state.s = True
            state.pre[v] = state.cir
        elif state.s_edge == 0:
            state.s_edge = state.pre[v]
            state.s_vert = v
            state.s_comp.add(state.component(v))
            state.com_star = state.component(v)
    if state.s:
        state.add_tree_vertex(state.cir)
        if state.s_edge != 0:
            state.add_tree_edge(state.cir, state.s_edge, state.s_vert)
        else:
            # circuit of entirely new vertices founds its own component
            for v in circuit.vertices_in_order():
                state.com[v] = state.cir


def comp_test(circuit: Circuit, state: Phase1State) -> None:
    """Join all previously-seen components the circuit touches.

    Each component other than the one of the first-seen vertex contributes
    one tree edge to its founding circuit.  Afterwards every touched label
    collapses to ``com_star`` and the circuit's own vertices adopt it; label
    0 (unseen) never triggers a merge.
    """
    if state.com_star == 0:
        return
    for v in circuit.vertices_in_order():
        cv = state.component(v)
        if cv != state.com_star:
            if not state.s:
                state.s = True
                state.add_tree_vertex(state.cir)
                state.add_tree_edge(state.cir, state.s_edge, state.s_vert)
            if cv not in state.s_comp:
                state.add_tree_edge(state.cir, state.pre[v], v)
                state.s_comp.add(cv)
    touched = state.s_comp - {0, state.com_star}
    if state.fidelity_relabel:
        # the O(n) relabel sweep, kept for fidelity runs
        for k in range(1, state.n + 1):
            if state.com[k] in touched:
                state.com[k] = state.com_star
    else:
        for label in touched:
            state.labels.union_into(label, state.com_star)
    for v in circuit.vertices_in_order():
        state.com[v] = state.com_star


def root_and_flush(state: Phase1State) -> tuple[list[InfoEdge], dict[int, int], int]:
    """Root the connectivity tree at circuit 1 and orient the stored records.

    Returns the oriented info edges (in record creation order), the depth of
    every tree vertex, and the overall tree height including circuits that
    only appear as flag-1 leaves.
    """
    if not state.tree_vertices:
        return [], {}, 0
    if 1 not in state.tree_vertices:
        raise IntegrityFault("first circuit missing from the connectivity tree")
    adj: dict[int, list[int]] = {v: [] for v in state.tree_vertices}
    for rec in state.tree_records:
        adj[rec.a].append(rec.b)
        adj[rec.b].append(rec.a)
    depth = {1: 0}
    frontier = [1]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in depth:
                    depth[w] = depth[v] + 1
                    nxt.append(w)
        frontier = nxt
    if len(depth) != len(state.tree_vertices):
        raise IntegrityFault("connectivity tree is not connected after rooting")
    edges = []
    for rec in state.tree_records:
        da, db = depth[rec.a], depth[rec.b]
        if abs(da - db) != 1:
            raise IntegrityFault("connectivity tree record skips a level")
        parent, child = (rec.a, rec.b) if da < db else (rec.b, rec.a)
        edges.append(InfoEdge(parent, child, depth[parent], rec.cvertex, 0))
    height = max(depth.values())
    for p in state.flag1_parents:
        if p not in depth:
            raise IntegrityFault(f"flag-1 parent {p} not in the connectivity tree")
        height = max(height, depth[p] + 1)
    return edges, depth, height


class CircuitFinder(Processor):
    """The phase-1 pass processor; consumes raw edges, emits annotated records."""

    label = "circuit-find"

    def __init__(self, n: int, fidelity_relabel: bool = False,
                 on_circuit: Optional[Callable[[Circuit], None]] = None):
        self.state = Phase1State(n=n, fidelity_relabel=fidelity_relabel)
        self.on_circuit = on_circuit
        self.height = 0
        self.depths: dict[int, int] = {}

    def on_item(self, item: StreamItem, emit) -> None:
        if not isinstance(item, GraphEdge):
            raise IntegrityFault("phase 1 expects a stream of raw graph edges")
        self.state.buffer.add(item.tail, item.head)
        if self.state.buffer.edge_count >= self.state.n:
            if not self._emit_one(emit):
                # a full buffer on <= n vertices always holds a cycle
                raise IntegrityFault("no circuit found in a full edge buffer")

    def on_end(self, emit) -> None:
        state = self.state
        while state.buffer.edge_count:
            if not self._emit_one(emit):
                raise NotEulerianError(ODD_DEGREE)
        labels = {state.component(v) for v in range(1, state.n + 1) if state.pre[v]}
        if len(labels) > 1:
            raise NotEulerianError(DISCONNECTED)
        info_edges, self.depths, self.height = root_and_flush(state)
        for edge in info_edges:
            emit(edge)

    def _emit_one(self, emit) -> bool:
        state = self.state
        circuit = extract_circuit(state.buffer)
        if circuit is None:
            return False
        state.cir += 1
        circuit.id = state.cir
        new_test(circuit, state)
        comp_test(circuit, state)
        if not state.s:
            # no tree vertex: record the leaf inline and pre-rotate the
            # circuit so its first edge leaves the shared vertex
            emit(InfoEdge(state.s_edge, state.cir, 0, state.s_vert, 1))
            state.flag1_parents.append(state.s_edge)
            circuit.rotate_to(state.s_vert)
        if self.on_circuit is not None:
            self.on_circuit(circuit)
        for pos, (tail, head) in enumerate(circuit.edges, start=1):
            emit(GraphEdge(tail, head, state.cir, pos, 0, 0))
        state.reset_circuit_flags()
        return True

    def live_records(self) -> int:
        return self.state.buffer.edge_count

    def live_words(self) -> int:
        return self.state.live_words()


def initial_stream(n: int, edges: Iterable[tuple[int, int]]):
    """Raw input items: one unannotated graph edge per validated input edge."""
    from .stream_core import validate_edges
    for u, v in validate_edges(n, edges):
        yield GraphEdge(u, v, 0, 0, 0, 0)


def find_circuits(pipeline: StreamPipeline, n: int, source: Stream,
                  fidelity_relabel: bool = False,
                  on_circuit: Optional[Callable[[Circuit], None]] = None,
                  ) -> tuple[Stream, int, CircuitFinder]:
    """Run the phase-1 pass over a materialized edge stream.

    Returns the annotated stream, the rooted tree height, and the finished
    processor (which exposes the tree depths for tracing).
    """
    finder = CircuitFinder(n, fidelity_relabel=fidelity_relabel, on_circuit=on_circuit)
    out = pipeline.run_streaming_pass(finder, source, phase="phase1")
    pipeline.stats.circuits_found = finder.state.cir
    pipeline.stats.tree_height = finder.height
    return out, finder.height, finder
