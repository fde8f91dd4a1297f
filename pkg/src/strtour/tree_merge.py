"""The merge loop: splice child circuits into their parents, halving the tree.

Each iteration merges every circuit at odd depth into its even-depth parent
and rewires the remaining info edges to the grandparent, so the out-tree
height drops from h to floor(h / 2).  An iteration is exactly four sorts
and four streams over a normalized stream, where normalized means info
edges whose parent depth is odd arrive reversed with flag 1 (the previous
iteration, or the preparation step, leaves them that way):

  1. sort info edges in front, grouped by their second field; a stream then
     rewires each reversed edge to the grandparent found in the group head,
  2. sort each surviving even-depth info edge behind the last parent edge
     whose head is the shared vertex; a stream records that position as the
     insertion slot,
  3. sort each instruction in front of its child circuit; a stream rewrites
     the child's edges to (tail, head, host, slot, orig circuit, orig pos),
  4. sort graph edges by those four labels, which interleaves children after
     their splice points; a stream renumbers each merged circuit 1..L,
     halves the surviving depths, and reverses next round's odd edges.

When no info edges remain the single surviving circuit is the tour, read
off with one final sort by position.
"""

from __future__ import annotations

from dataclasses import dataclass
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


def iteration_bound(height: int) -> int:
    """Max merge iterations for a tree of the given height: ceil(log2(h+1))."""
    return height.bit_length()


def regroup_key(item: StreamItem) -> tuple:
    """Info edges first, grouped by second field; within a group the flag-0
    parent edge precedes the reversed edges that need its first field."""
    if isinstance(item, InfoEdge):
        return (0, item.succ, item.f5, item.pred) + item.fields()
    return (1, item.f3, item.f4) + item.fields()


def slot_search_key(item: StreamItem) -> tuple:
    """Graph edges by (circuit, head, position); each even-depth info edge
    right after the host edges whose head equals its shared vertex; odd
    (rewired) info edges parked at the end."""
    if isinstance(item, GraphEdge):
        return (0, item.f3, item.head, 0, item.f4) + item.fields()
    if item.depth % 2 == 0:
        return (0, item.pred, item.cvertex, 1, item.succ) + item.fields()
    return (1, item.pred, item.succ) + item.fields()


def instruction_key(item: StreamItem) -> tuple:
    """Each info edge directly in front of its successor circuit's edges."""
    if isinstance(item, InfoEdge):
        return (item.succ, 0) + item.fields()
    return (item.f3, 1, item.f4) + item.fields()


def splice_key(item: StreamItem) -> tuple:
    """Info edges in front; graph edges by their four trailing labels, which
    places every child block right after its splice edge."""
    if isinstance(item, InfoEdge):
        return (0,) + item.fields()
    return (1, item.f3, item.f4, item.f5, item.f6) + item.fields()


class GrandparentRewire(Processor):
    """Point each reversed (odd-parent) info edge at its grandparent."""

    label = "merge-rewire"

    def __init__(self):
        self.group = 0
        self.parent = 0

    def on_item(self, item, emit) -> None:
        if isinstance(item, GraphEdge):
            emit(item)
            return
        if item.f5 == 0:
            self.group, self.parent = item.succ, item.pred
            emit(item)
            return
        # reversed edge (child, odd-parent, depth, v, 1): the group head told
        # us who the odd parent's own parent is
        if self.group != item.succ:
            raise IntegrityFault(
                f"no parent edge found for odd-depth circuit {item.succ}")
        emit(InfoEdge(self.parent, item.pred, item.depth, item.cvertex, 0))

    def scalar_words(self) -> int:
        return 2


class SlotRecorder(Processor):
    """Stamp each merge instruction with its splice position."""

    label = "merge-slots"

    def __init__(self):
        self.last: Optional[GraphEdge] = None

    def on_item(self, item, emit) -> None:
        if isinstance(item, GraphEdge):
            self.last = item
            emit(item)
            return
        if item.depth % 2 == 1:
            emit(item)
            return
        if (self.last is None or self.last.f3 != item.pred
                or self.last.head != item.cvertex):
            raise IntegrityFault(
                f"no edge of circuit {item.pred} has head {item.cvertex}")
        emit(InfoEdge(item.pred, item.succ, item.depth, item.cvertex, self.last.f4))

    def live_records(self) -> int:
        return 1 if self.last is not None else 0


class ChildRewriter(Processor):
    """Relabel each child circuit's edges for the splice sort."""

    label = "merge-rewrite"

    def __init__(self):
        self.instruction: Optional[InfoEdge] = None
        self.consumed = True

    def _check_consumed(self) -> None:
        if self.instruction is not None and not self.consumed:
            raise IntegrityFault(
                f"merge instruction for circuit {self.instruction.succ} "
                "matched no graph edges")

    def on_item(self, item, emit) -> None:
        if isinstance(item, InfoEdge):
            self._check_consumed()
            if item.depth % 2 == 1:
                self.instruction = None
                emit(item)
                return
            self.instruction = item  # f5 holds the slot here
            self.consumed = False
            return
        ins = self.instruction
        if ins is not None and item.f3 == ins.succ:
            self.consumed = True
            emit(GraphEdge(item.tail, item.head, ins.pred, ins.f5,
                           item.f3, item.f4))
            return
        self._check_consumed()
        self.instruction = None
        emit(item)

    def on_end(self, emit) -> None:
        self._check_consumed()

    def live_records(self) -> int:
        return 1 if self.instruction is not None else 0


class SpliceRenumberer(Processor):
    """Renumber merged circuits and normalize depths for the next round."""

    label = "merge-renumber"

    def __init__(self):
        self.circuit = 0
        self.counter = 0
        self.seen_graph = False
        self.info_out = 0
        self.max_pred_depth = -1
        self.circuits_out = 0

    def on_item(self, item, emit) -> None:
        if isinstance(item, InfoEdge):
            if self.seen_graph:
                raise IntegrityFault("info edge sorted behind graph edges")
            if item.f5 != 0 or item.depth % 2 != 1:
                raise IntegrityFault(
                    f"unexpected surviving info edge {item.fields()}")
            depth = (item.depth - 1) // 2
            self.info_out += 1
            self.max_pred_depth = max(self.max_pred_depth, depth)
            if depth % 2 == 1:
                emit(InfoEdge(item.succ, item.pred, depth, item.cvertex, 1))
            else:
                emit(InfoEdge(item.pred, item.succ, depth, item.cvertex, 0))
            return
        self.seen_graph = True
        if item.f3 != self.circuit:
            if item.f5 != 0 or item.f6 != 0:
                raise IntegrityFault(
                    f"merged circuit {item.f3} does not start with a host edge")
            self.circuit = item.f3
            self.counter = 1
            self.circuits_out += 1
        else:
            self.counter += 1
        emit(GraphEdge(item.tail, item.head, item.f3, self.counter, 0, 0))

    def scalar_words(self) -> int:
        return 5

    @property
    def observed_height(self) -> int:
        return self.max_pred_depth + 1 if self.info_out else 0


class OddDepthNormalizer(Processor):
    """Reverse and flag info edges with odd parent depth.

    The pipeline fuses this step into the preceding pass; it exists on its
    own for driving the merge loop from hand-built streams.
    """

    label = "odd-normalize"

    def on_item(self, item, emit) -> None:
        if isinstance(item, InfoEdge) and item.f5 == 0 and item.depth % 2 == 1:
            emit(InfoEdge(item.succ, item.pred, item.depth, item.cvertex, 1))
        else:
            emit(item)


@dataclass
class MergeIterationReport:
    index: int
    circuits_before: int
    circuits_after: int
    height_before: int
    height_after: int
    info_edges_after: int
    passes_used: int
    peak_live_records: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def merge_iteration(pipeline: StreamPipeline, stream: Stream, *,
                    index: int = 1, circuits_before: int = 0,
                    height_before: int = 0) -> tuple[Stream, MergeIterationReport]:
    """One normalized merge round: four sorts, four streams."""
    first_pass = len(pipeline.stats.passes)
    s = pipeline.run_sorting_pass(regroup_key, stream, "merge", "sort-groups")
    s = pipeline.run_streaming_pass(GrandparentRewire(), s, "merge")
    s = pipeline.run_sorting_pass(slot_search_key, s, "merge", "sort-slots")
    s = pipeline.run_streaming_pass(SlotRecorder(), s, "merge")
    s = pipeline.run_sorting_pass(instruction_key, s, "merge", "sort-instructions")
    s = pipeline.run_streaming_pass(ChildRewriter(), s, "merge")
    s = pipeline.run_sorting_pass(splice_key, s, "merge", "sort-splice")
    renumberer = SpliceRenumberer()
    s = pipeline.run_streaming_pass(renumberer, s, "merge")
    records = pipeline.stats.passes[first_pass:]
    report = MergeIterationReport(
        index=index,
        circuits_before=circuits_before,
        circuits_after=renumberer.circuits_out,
        height_before=height_before,
        height_after=renumberer.observed_height,
        info_edges_after=renumberer.info_out,
        passes_used=len(records),
        peak_live_records=max(r.peak_live_records for r in records),
    )
    return s, report


def run_merges(pipeline: StreamPipeline, stream: Stream, height: int,
               info_edges: int, circuits: int) -> tuple[Stream, list[MergeIterationReport]]:
    """Iterate merge rounds until a single circuit remains.

    The input must be prepared (rotated, depths complete, odd parent depths
    reversed).  The round count may not exceed ceil(log2(h + 1)) and every
    round must halve the height exactly, otherwise the run aborts.
    """
    bound = iteration_bound(height)
    reports: list[MergeIterationReport] = []
    while info_edges > 0:
        if len(reports) >= bound:
            raise IntegrityFault(
                f"merge loop exceeded {bound} iterations for height {height}")
        stream, report = merge_iteration(
            pipeline, stream, index=len(reports) + 1,
            circuits_before=circuits, height_before=height)
        if report.height_after != report.height_before // 2:
            raise IntegrityFault(
                f"iteration {report.index} took height {report.height_before} "
                f"to {report.height_after}, expected {report.height_before // 2}")
        reports.append(report)
        pipeline.stats.merge_iterations += 1
        height = report.height_after
        info_edges = report.info_edges_after
        circuits = report.circuits_after
    return stream, reports


def tour_position_key(item: StreamItem) -> tuple:
    if isinstance(item, GraphEdge):
        return (0, item.f4) + item.fields()
    return (1,) + item.fields()


def emit_tour(pipeline: StreamPipeline, stream: Stream, m: int) -> list[tuple[int, int]]:
    """Final sort by position, then read the tour off the stream.

    The read validates that exactly one circuit with positions 1..m remains
    and that consecutive edges chain into a closed trail.
    """
    s = pipeline.run_sorting_pass(tour_position_key, stream, "emit", "sort-tour")
    tour: list[tuple[int, int]] = []
    circuit = None
    for item in s.iter_items():
        if isinstance(item, InfoEdge):
            raise IntegrityFault("info edge left in the final stream")
        if circuit is None:
            circuit = item.f3
        elif item.f3 != circuit:
            raise IntegrityFault(
                f"final stream holds circuits {circuit} and {item.f3}")
        if item.f4 != len(tour) + 1:
            raise IntegrityFault(
                f"tour position {item.f4} where {len(tour) + 1} was expected")
        if tour and tour[-1][1] != item.tail:
            raise IntegrityFault(f"tour breaks before position {item.f4}")
        tour.append((item.tail, item.head))
    if len(tour) != m:
        raise IntegrityFault(f"tour has {len(tour)} edges, expected {m}")
    if tour and tour[-1][1] != tour[0][0]:
        raise IntegrityFault("tour does not close")
    return tour
