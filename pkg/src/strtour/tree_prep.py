"""Constant-pass preparation between the decomposition and the merge loop.

Two jobs remain after phase 1.  Circuits that own a tree vertex were written
before their parent was known, so they must be rotated to start at the
vertex they share with the parent.  Info edges written inline (flag 1) were
emitted before the tree was rooted, so their parent depth is missing.  Both
fixes move information around with the usual trick: a sort puts the record
that needs a value next to the record that has it, then a streaming pass
with a handful of live records carries the value over.

The pipeline entry point ``prepare`` fuses the flag swap of the depth fix
and the odd-depth normalization of the merge loop into these passes, for a
total of exactly six (three sorts, three streams).
"""

from __future__ import annotations

from typing import Optional

from .stream_core import (
    GraphEdge,
    InfoEdge,
    IntegrityFault,
    Processor,
    Stream,
    StreamItem,
    StreamPipeline,
)


def circuit_grouping_key(item: StreamItem) -> tuple:
    """Graph edges by (circuit, position); each info edge just before the
    circuit it points to, flag-0 parent edges first."""
    if isinstance(item, InfoEdge):
        return (item.succ, 0, item.f5) + item.fields()
    return (item.f3, 1, item.f4) + item.fields()


def depth_grouping_key(item: StreamItem) -> tuple:
    """All info edges up front, grouped by their second field then flag, so a
    swapped leaf edge follows the parent edge holding its missing depth."""
    if isinstance(item, InfoEdge):
        return (0, item.succ, item.f5) + item.fields()
    return (1, item.f3, item.f4) + item.fields()


class RotationAnnotator(Processor):
    """First rotation stream: measure each parented circuit.

    Holds the pending parent info edge and the circuit's first graph edge,
    counts the circuit length, and finds the pivot position (lowest position
    whose tail is the shared vertex).  Length and pivot ride out in the
    first edge's two spare fields.  Optionally swaps flag-1 info edges
    (pred and succ exchanged) so the later depth pass can group them behind
    their parent's own info edge.
    """

    label = "rotate-annotate"

    def __init__(self, swap_flag_edges: bool = False):
        self.swap_flag_edges = swap_flag_edges
        self.pending: Optional[InfoEdge] = None
        self.first_edge: Optional[GraphEdge] = None
        self.length = 0
        self.pivot = 0

    def _flush(self, emit) -> None:
        if self.pending is not None and self.first_edge is not None:
            if self.pivot == 0:
                raise IntegrityFault(
                    f"circuit {self.first_edge.f3} has no edge leaving "
                    f"vertex {self.pending.cvertex}")
            emit(self.pending)
            emit(GraphEdge(self.first_edge.tail, self.first_edge.head,
                           self.first_edge.f3, self.first_edge.f4,
                           self.length, self.pivot))
        elif self.pending is not None:
            raise IntegrityFault(
                f"parent info edge for circuit {self.pending.succ} "
                "has no circuit edges")
        self.pending = None
        self.first_edge = None
        self.length = 0
        self.pivot = 0

    def on_item(self, item, emit) -> None:
        if isinstance(item, InfoEdge):
            self._flush(emit)
            if item.f5 == 1:
                if self.swap_flag_edges:
                    emit(InfoEdge(item.succ, item.pred, item.depth, item.cvertex, 1))
                else:
                    emit(item)
            else:
                self.pending = item
            return
        if self.pending is not None and self.first_edge is None:
            if item.f3 != self.pending.succ:
                raise IntegrityFault(
                    f"parent info edge for circuit {self.pending.succ} "
                    f"is followed by circuit {item.f3}")
            self.first_edge = item
            self.length = 1
            if item.tail == self.pending.cvertex:
                self.pivot = item.f4
            return
        if self.pending is not None and item.f3 == self.pending.succ:
            self.length += 1
            if self.pivot == 0 and item.tail == self.pending.cvertex:
                self.pivot = item.f4
            emit(item)
            return
        self._flush(emit)
        emit(item)

    def on_end(self, emit) -> None:
        self._flush(emit)

    def live_records(self) -> int:
        return (self.pending is not None) + (self.first_edge is not None)

    def scalar_words(self) -> int:
        return 2


class RotationApplier(Processor):
    """Second rotation stream: renumber positions using the annotations."""

    label = "rotate-apply"

    def __init__(self):
        self.circuit = 0
        self.length = 0
        self.pivot = 0

    def _renumber(self, position: int) -> int:
        return ((position - self.pivot) % self.length) + 1

    def on_item(self, item, emit) -> None:
        if isinstance(item, InfoEdge):
            emit(item)
            return
        if item.f5 > 0:
            # annotated first edge carries (length, pivot)
            self.circuit, self.length, self.pivot = item.f3, item.f5, item.f6
            emit(GraphEdge(item.tail, item.head, item.f3,
                           self._renumber(item.f4), 0, 0))
            return
        if self.circuit == item.f3:
            emit(GraphEdge(item.tail, item.head, item.f3,
                           self._renumber(item.f4), 0, 0))
            return
        self.circuit = 0
        emit(item)

    def scalar_words(self) -> int:
        return 3


class FlagEdgeSwapper(Processor):
    """Exchange pred and succ on flag-1 info edges, keeping the flag set."""

    label = "flag-swap"

    def on_item(self, item, emit) -> None:
        if isinstance(item, InfoEdge) and item.f5 == 1:
            emit(InfoEdge(item.succ, item.pred, item.depth, item.cvertex, 1))
        else:
            emit(item)


class DepthCompleter(Processor):
    """Fill missing parent depths into swapped flag-1 info edges.

    After the depth grouping sort, the flag-0 parent edge of circuit ``i``
    (if any) directly precedes every swapped leaf edge whose stored parent is
    ``i``.  A leaf whose parent has no own parent edge sits under the root
    and gets depth 0.  With ``swap_odd_for_merge`` the pass also emits every
    info edge whose final parent depth is odd in reversed, flagged form, the
    shape the merge loop consumes.
    """

    label = "depth-complete"

    def __init__(self, swap_odd_for_merge: bool = False):
        self.swap_odd_for_merge = swap_odd_for_merge
        self.known_succ = 0
        self.known_depth = 0
        self.info_out = 0
        self.max_pred_depth = -1

    def _emit_info(self, pred: int, succ: int, depth: int, cvertex: int, emit) -> None:
        self.info_out += 1
        self.max_pred_depth = max(self.max_pred_depth, depth)
        if self.swap_odd_for_merge and depth % 2 == 1:
            emit(InfoEdge(succ, pred, depth, cvertex, 1))
        else:
            emit(InfoEdge(pred, succ, depth, cvertex, 0))

    def on_item(self, item, emit) -> None:
        if isinstance(item, GraphEdge):
            emit(item)
            return
        if item.f5 == 0:
            if self.known_succ == item.succ:
                raise IntegrityFault(
                    f"circuit {item.succ} has more than one parent edge")
            self.known_succ = item.succ
            self.known_depth = item.depth
            self._emit_info(item.pred, item.succ, item.depth, item.cvertex, emit)
            return
        # swapped leaf edge (succ, pred, 0, v, 1): restore and fill the depth
        pred, succ = item.succ, item.pred
        depth = self.known_depth + 1 if self.known_succ == pred else 0
        self._emit_info(pred, succ, depth, item.cvertex, emit)

    def scalar_words(self) -> int:
        return 4

    @property
    def observed_height(self) -> int:
        return self.max_pred_depth + 1 if self.info_out else 0


def rotate_member_circuits(pipeline: StreamPipeline, stream: Stream,
                           swap_flag_edges: bool = False, phase: str = "prep") -> Stream:
    """Rotate every parented circuit to start at its shared vertex.

    Two sorts and two streams; flag-1 circuits arrive pre-rotated and the
    root has no parent, so both pass through untouched.
    """
    s = pipeline.run_sorting_pass(circuit_grouping_key, stream, phase, "sort-circuits")
    s = pipeline.run_streaming_pass(RotationAnnotator(swap_flag_edges), s, phase)
    s = pipeline.run_sorting_pass(circuit_grouping_key, s, phase, "sort-circuits")
    return pipeline.run_streaming_pass(RotationApplier(), s, phase)


def complete_depths(pipeline: StreamPipeline, stream: Stream,
                    phase: str = "prep") -> tuple[Stream, DepthCompleter]:
    """Resolve the parent depth of every flag-1 info edge.

    Two streams and one sort: swap the flag-1 edges, group them behind the
    parent's own info edge, then carry the depth over.
    """
    s = pipeline.run_streaming_pass(FlagEdgeSwapper(), stream, phase)
    s = pipeline.run_sorting_pass(depth_grouping_key, s, phase, "sort-depths")
    completer = DepthCompleter(swap_odd_for_merge=False)
    s = pipeline.run_streaming_pass(completer, s, phase)
    return s, completer


def prepare(pipeline: StreamPipeline, stream: Stream) -> tuple[Stream, DepthCompleter]:
    """Full preparation in six passes, output normalized for the merge loop.

    The flag swap rides inside the rotation's first stream and the odd-depth
    reversal of the merge loop rides inside the depth stream, so no extra
    passes are spent on either.
    """
    s = rotate_member_circuits(pipeline, stream, swap_flag_edges=True)
    s = pipeline.run_sorting_pass(depth_grouping_key, s, "prep", "sort-depths")
    completer = DepthCompleter(swap_odd_for_merge=True)
    s = pipeline.run_streaming_pass(completer, s, "prep")
    return s, completer
