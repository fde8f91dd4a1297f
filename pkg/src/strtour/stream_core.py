"""Streaming substrate: stream records, on-disk streams, and metered passes.

A pipeline run alternates two kinds of passes over a stream of records that
is materialized on disk between passes.  A streaming pass reads its input
once, front to back, through a small processor and writes a new stream.  A
sorting pass reorders the stream under a total order and is treated as a
primitive: its internal working memory is not charged against the streaming
meter.  Every pass and every inter-pass stream length is accounted in
``PassStats`` so budget assertions can be checked after a run.
"""

from __future__ import annotations

import heapq
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Union

ODD_DEGREE = "odd degree"
DISCONNECTED = "disconnected"

GRAPH_EDGE_WORDS = 6
INFO_EDGE_WORDS = 5


class ParseError(ValueError):
    """A malformed input line (stream, graph, or tour file)."""


class IntegrityFault(RuntimeError):
    """An internal pipeline invariant was violated; signals corruption."""


class NotEulerianError(Exception):
    """The input graph admits no Euler tour."""

    def __init__(self, reason: str):
        super().__init__(f"not eulerian: {reason}")
        self.reason = reason


@dataclass(frozen=True)
class GraphEdge:
    """A directed edge of the input graph, annotated for circuit bookkeeping.

    In steady state ``f3`` is the circuit id and ``f4`` the 1-based position
    of the edge within its circuit; ``f5`` and ``f6`` are zero.  While a
    merge is in flight, ``f3`` holds the host circuit, ``f4`` the insertion
    slot, and ``f5``/``f6`` the original circuit id and position.
    """

    tail: int
    head: int
    f3: int = 0
    f4: int = 0
    f5: int = 0
    f6: int = 0

    def fields(self) -> tuple[int, ...]:
        return (self.tail, self.head, self.f3, self.f4, self.f5, self.f6)


@dataclass(frozen=True)
class InfoEdge:
    """A tree edge between two circuits.

    ``pred`` is the parent circuit, ``succ`` the child, ``depth`` the depth
    of the parent in the rooted circuit tree, and ``cvertex`` a vertex the
    two circuits share.  ``f5`` is a 0/1 flag outside merge-internal passes;
    mid-merge it temporarily carries the insertion slot.
    """

    pred: int
    succ: int
    depth: int
    cvertex: int
    f5: int = 0

    def fields(self) -> tuple[int, ...]:
        return (self.pred, self.succ, self.depth, self.cvertex, self.f5)


StreamItem = Union[GraphEdge, InfoEdge]


def item_words(item: StreamItem) -> int:
    return GRAPH_EDGE_WORDS if isinstance(item, GraphEdge) else INFO_EDGE_WORDS


def encode_item(item: StreamItem) -> str:
    if isinstance(item, GraphEdge):
        return "G %d %d %d %d %d %d" % item.fields()
    return "I %d %d %d %d %d" % item.fields()


def decode_item(line: str) -> StreamItem:
    parts = line.split()
    if not parts:
        raise ParseError("empty line")
    tag = parts[0]
    try:
        values = [int(p) for p in parts[1:]]
    except ValueError:
        raise ParseError(f"non-integer field in {line!r}") from None
    if values and min(values) < 0:
        raise ParseError(f"negative field in {line!r}")
    if tag == "G":
        if len(values) != 6:
            raise ParseError(f"graph edge needs 6 fields, got {len(values)}")
        return GraphEdge(*values)
    if tag == "I":
        if len(values) != 5:
            raise ParseError(f"info edge needs 5 fields, got {len(values)}")
        return InfoEdge(*values)
    raise ParseError(f"unknown record tag {tag!r}")


@dataclass
class Stream:
    """A materialized stream: one encoded item per line of ``path``."""

    path: str
    items: int = 0
    graph_items: int = 0
    info_items: int = 0

    def iter_items(self) -> Iterator[StreamItem]:
        with open(self.path, "r", encoding="ascii") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    yield decode_item(line)
                except ParseError as exc:
                    raise ParseError(f"line {lineno}: {exc}") from None

    def read_all(self) -> list[StreamItem]:
        return list(self.iter_items())


class StreamWriter:
    """Appends items to a stream file, keeping per-kind counts."""

    def __init__(self, path: str):
        self.stream = Stream(path)
        self._fh = open(path, "w", encoding="ascii")

    def write(self, item: StreamItem) -> None:
        self._fh.write(encode_item(item))
        self._fh.write("\n")
        self.stream.items += 1
        if isinstance(item, GraphEdge):
            self.stream.graph_items += 1
        else:
            self.stream.info_items += 1

    def write_line(self, line: str) -> None:
        """Append an already-encoded line without re-decoding it."""
        self._fh.write(line)
        self._fh.write("\n")
        self.stream.items += 1
        if line[0] == "G":
            self.stream.graph_items += 1
        else:
            self.stream.info_items += 1

    def close(self) -> Stream:
        self._fh.close()
        return self.stream


@dataclass
class PassRecord:
    """Per-pass accounting entry in the order the passes ran."""

    index: int
    kind: str  # "source", "stream", or "sort"
    label: str
    phase: str
    items_in: int
    items_out: int
    peak_live_records: int
    peak_live_words: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class PassStats:
    """Global counters for one pipeline run; all are monotone during a run."""

    streaming_passes: int = 0
    sorting_passes: int = 0
    peak_live_words: int = 0
    peak_live_records: int = 0
    peak_stream_items: int = 0
    merge_iterations: int = 0
    circuits_found: int = 0
    tree_height: int = 0
    passes: list[PassRecord] = field(default_factory=list)

    def note_boundary(self, items: int) -> None:
        self.peak_stream_items = max(self.peak_stream_items, items)

    def core_dict(self) -> dict:
        return {
            "streaming_passes": self.streaming_passes,
            "sorting_passes": self.sorting_passes,
            "peak_live_words": self.peak_live_words,
            "peak_live_records": self.peak_live_records,
            "peak_stream_items": self.peak_stream_items,
            "merge_iterations": self.merge_iterations,
            "circuits_found": self.circuits_found,
            "tree_height": self.tree_height,
        }

    def phase_passes(self, phase: str) -> list[PassRecord]:
        return [rec for rec in self.passes if rec.phase == phase]


@dataclass(frozen=True)
class BudgetViolation:
    pass_index: int
    items: int
    limit: int


def assert_stream_budget(stats: PassStats, m: int) -> Optional[BudgetViolation]:
    """Check that no inter-pass stream exceeded 2*m + 4 items.

    Returns ``None`` when the budget held, else the first offending pass.
    """
    limit = 2 * m + 4
    for rec in stats.passes:
        if rec.items_out > limit:
            return BudgetViolation(rec.index, rec.items_out, limit)
    return None


class Processor:
    """Base class for streaming-pass processors.

    Subclasses override the three callbacks and report their retained state
    through ``live_records`` and ``live_words`` so the harness can meter
    peaks.  A processor reads each input item exactly once and must not
    look ahead.
    """

    label = "processor"

    def on_start(self, emit: Callable[[StreamItem], None]) -> None:
        pass

    def on_item(self, item: StreamItem, emit: Callable[[StreamItem], None]) -> None:
        raise NotImplementedError

    def on_end(self, emit: Callable[[StreamItem], None]) -> None:
        pass

    def live_records(self) -> int:
        return 0

    def scalar_words(self) -> int:
        return 0

    def live_words(self) -> int:
        return GRAPH_EDGE_WORDS * self.live_records() + self.scalar_words()


class IdentityProcessor(Processor):
    label = "identity"

    def on_item(self, item, emit):
        emit(item)


class StreamPipeline:
    """Executes metered passes, materializing every stream between passes.

    Intermediate files live in a private working directory (honoring
    ``STRTOUR_TMPDIR`` when set) and are deleted as soon as they are
    consumed unless a trace directory is given, in which case every
    inter-pass stream is kept there with its pass index in the name.
    """

    def __init__(self, stats: PassStats, tmpdir: Optional[str] = None,
                 trace_dir: Optional[str] = None, sort_chunk: int = 1 << 16):
        base = tmpdir or os.environ.get("STRTOUR_TMPDIR") or None
        self.workdir = tempfile.mkdtemp(prefix="strtour-", dir=base)
        self.stats = stats
        self.trace_dir = trace_dir
        self.sort_chunk = sort_chunk
        self._counter = 0
        if trace_dir:
            os.makedirs(trace_dir, exist_ok=True)

    # -- bookkeeping -------------------------------------------------------

    def _new_path(self, label: str) -> str:
        self._counter += 1
        return os.path.join(self.workdir, f"pass_{self._counter:03d}_{label}.txt")

    def _finish(self, kind: str, label: str, phase: str, items_in: int,
                stream: Stream, peak_records: int = 0, peak_words: int = 0) -> Stream:
        rec = PassRecord(
            index=len(self.stats.passes),
            kind=kind,
            label=label,
            phase=phase,
            items_in=items_in,
            items_out=stream.items,
            peak_live_records=peak_records,
            peak_live_words=peak_words,
        )
        self.stats.passes.append(rec)
        self.stats.note_boundary(stream.items)
        self.stats.peak_live_records = max(self.stats.peak_live_records, peak_records)
        self.stats.peak_live_words = max(self.stats.peak_live_words, peak_words)
        if self.trace_dir:
            shutil.copy(stream.path, os.path.join(
                self.trace_dir, f"pass_{rec.index:03d}_{label}.txt"))
        return stream

    def _consume(self, stream: Stream) -> None:
        if os.path.exists(stream.path):
            os.unlink(stream.path)

    # -- passes ------------------------------------------------------------

    def materialize(self, items: Iterable[StreamItem], label: str = "source") -> Stream:
        writer = StreamWriter(self._new_path(label))
        for item in items:
            writer.write(item)
        return self._finish("source", label, "source", 0, writer.close())

    def run_streaming_pass(self, processor: Processor, stream: Stream,
                           phase: str, label: Optional[str] = None) -> Stream:
        label = label or processor.label
        writer = StreamWriter(self._new_path(label))
        peak_records = 0
        peak_words = 0

        def poll(inflight_records: int, inflight_words: int) -> None:
            nonlocal peak_records, peak_words
            peak_records = max(peak_records, processor.live_records() + inflight_records)
            peak_words = max(peak_words, processor.live_words() + inflight_words)

        try:
            processor.on_start(writer.write)
            poll(0, 0)
            for item in stream.iter_items():
                processor.on_item(item, writer.write)
                poll(1, item_words(item))
            processor.on_end(writer.write)
            poll(0, 0)
        except BaseException:
            writer.close()
            raise

        self.stats.streaming_passes += 1
        out = self._finish("stream", label, phase, stream.items,
                           writer.close(), peak_records, peak_words)
        self._consume(stream)
        return out

    def run_sorting_pass(self, key: Callable[[StreamItem], tuple], stream: Stream,
                         phase: str, label: str) -> Stream:
        """Stable sort of the stream under ``key``.

        The sorter is a primitive of the model, so it carries no live-state
        meter.  Internally it spills fixed-size sorted chunks and merges
        them, which keeps memory bounded for streams larger than one chunk.
        """
        chunk_paths: list[str] = []
        chunk: list[tuple[tuple, int, str]] = []
        seq = 0

        def dump_chunk() -> None:
            chunk.sort(key=lambda entry: (entry[0], entry[1]))
            fd, path = tempfile.mkstemp(prefix="chunk-", dir=self.workdir)
            with os.fdopen(fd, "w", encoding="ascii") as fh:
                for k, s, line in chunk:
                    fh.write("%s|%d|%s\n" % (" ".join(map(str, k)), s, line))
            chunk_paths.append(path)

        for item in stream.iter_items():
            chunk.append((key(item), seq, encode_item(item)))
            seq += 1
            if len(chunk) >= self.sort_chunk:
                dump_chunk()
                chunk = []

        writer = StreamWriter(self._new_path(label))
        if not chunk_paths:
            chunk.sort(key=lambda entry: (entry[0], entry[1]))
            for _, _, line in chunk:
                writer.write_line(line)
        else:
            if chunk:
                dump_chunk()

            def read_chunk(path: str) -> Iterator[tuple[tuple, int, str]]:
                with open(path, "r", encoding="ascii") as fh:
                    for raw in fh:
                        kpart, spart, line = raw.rstrip("\n").split("|", 2)
                        yield (tuple(int(x) for x in kpart.split()), int(spart), line)

            for _, _, line in heapq.merge(*(read_chunk(p) for p in chunk_paths)):
                writer.write_line(line)
            for path in chunk_paths:
                os.unlink(path)

        self.stats.sorting_passes += 1
        out = self._finish("sort", label, phase, stream.items, writer.close())
        self._consume(stream)
        return out

    def cleanup(self) -> None:
        shutil.rmtree(self.workdir, ignore_errors=True)


# -- graph and tour files ---------------------------------------------------

def validate_edges(n: int, edges: Iterable[tuple[int, int]]) -> Iterator[tuple[int, int]]:
    """Yield edges after range, self-loop, and duplicate checks.

    Duplicate detection needs memory across the whole stream, so it happens
    here at ingestion rather than inside the metered pass.
    """
    seen: set[frozenset[int]] = set()
    for idx, (u, v) in enumerate(edges, start=1):
        if not (1 <= u <= n and 1 <= v <= n):
            raise ParseError(f"edge {idx}: endpoint outside 1..{n}: ({u}, {v})")
        if u == v:
            raise ParseError(f"edge {idx}: self-loop at vertex {u}")
        key = frozenset((u, v))
        if key in seen:
            raise ParseError(f"edge {idx}: duplicate edge ({u}, {v})")
        seen.add(key)
        yield u, v


def read_graph_file(path: str) -> tuple[int, list[tuple[int, int]]]:
    """Parse a graph file: first line ``n m``, then m lines ``u v``."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ParseError("empty graph file")
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError("line 1: expected 'n m'")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError("line 1: expected integers 'n m'") from None
    if n < 1 or m < 0:
        raise ParseError(f"line 1: bad sizes n={n} m={m}")
    if len(lines) - 1 != m:
        raise ParseError(f"expected {m} edge lines, found {len(lines) - 1}")
    raw = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected 'u v'")
        try:
            raw.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParseError(f"line {lineno}: expected integers 'u v'") from None
    return n, list(validate_edges(n, raw))


def write_graph_file(path: str, n: int, edges: list[tuple[int, int]]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{n} {len(edges)}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")


def write_tour_file(path: str, tour: list[tuple[int, int]]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for u, v in tour:
            fh.write(f"{u} {v}\n")


def read_tour_file(path: str) -> list[tuple[int, int]]:
    tour = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, ln in enumerate(fh, start=1):
            ln = ln.strip()
            if not ln:
                continue
            parts = ln.split()
            if len(parts) != 2:
                raise ParseError(f"line {lineno}: expected 'u v'")
            try:
                tour.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ParseError(f"line {lineno}: expected integers 'u v'") from None
    return tour
