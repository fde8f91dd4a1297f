"""Substrate tests: codec, passes, sorting, metering, and budgets."""

import random

import pytest

from strtour import (
    BudgetViolation,
    GraphEdge,
    InfoEdge,
    ParseError,
    PassStats,
    Processor,
    assert_stream_budget,
    decode_item,
    encode_item,
    read_graph_file,
    write_graph_file,
)
from strtour.stream_core import PassRecord

from conftest import make_pipeline


# -- codec -------------------------------------------------------------------

def test_encode_graph_edge():
    assert encode_item(GraphEdge(1, 2, 1, 1, 0, 0)) == "G 1 2 1 1 0 0"


def test_encode_info_edge():
    assert encode_item(InfoEdge(3, 5, 0, 2, 1)) == "I 3 5 0 2 1"


@pytest.mark.parametrize("item", [
    GraphEdge(1, 2, 1, 1, 0, 0),
    GraphEdge(7, 3, 12, 99, 4, 18),
    InfoEdge(3, 5, 0, 2, 1),
    InfoEdge(1, 4, 0, 5, 0),
])
def test_codec_round_trip(item):
    assert decode_item(encode_item(item)) == item


def test_codec_round_trip_random():
    rng = random.Random(7)
    for _ in range(200):
        if rng.random() < 0.5:
            item = GraphEdge(*(rng.randrange(0, 1000) for _ in range(6)))
        else:
            item = InfoEdge(*(rng.randrange(0, 1000) for _ in range(5)))
        assert decode_item(encode_item(item)) == item


@pytest.mark.parametrize("line", [
    "G 1 2",            # arity
    "G 1 2 3 4 5",      # arity
    "I 1 2 3 4",        # arity
    "X 1 2 3 4 5",      # tag
    "G 1 2 3 4 5 x",    # non-integer
    "G 1 2 3 4 5 -1",   # negative
    "",
])
def test_decode_rejects(line):
    with pytest.raises(ParseError):
        decode_item(line)


def test_stream_parse_error_names_line(tmp_path):
    pl, _ = make_pipeline(tmp_path)
    stream = pl.materialize([GraphEdge(1, 2), GraphEdge(2, 3)])
    with open(stream.path, "a") as fh:
        fh.write("G 9 9\n")
    with pytest.raises(ParseError, match="line 3"):
        list(stream.iter_items())
    pl.cleanup()


# -- streaming passes ---------------------------------------------------------

class Identity(Processor):
    def on_item(self, item, emit):
        emit(item)


class Counting(Processor):
    """Rewrites each graph edge's position with a running count."""

    def __init__(self):
        self.count = 0

    def on_item(self, item, emit):
        self.count += 1
        emit(GraphEdge(item.tail, item.head, item.f3, self.count, 0, 0))

    def scalar_words(self):
        return 1


class EndOnly(Processor):
    def on_item(self, item, emit):
        pass

    def on_end(self, emit):
        emit(InfoEdge(1, 2, 0, 3, 0))
        emit(InfoEdge(1, 4, 0, 5, 0))


def test_identity_pass(tmp_path):
    pl, stats = make_pipeline(tmp_path)
    items = [GraphEdge(i, i + 1, 1, i) for i in range(1, 6)]
    stream = pl.materialize(items)
    out = pl.run_streaming_pass(Identity(), stream, "test")
    assert out.read_all() == items
    assert stats.streaming_passes == 1
    pl.cleanup()


def test_empty_stream_emits_end_only(tmp_path):
    pl, _ = make_pipeline(tmp_path)
    out = pl.run_streaming_pass(EndOnly(), pl.materialize([]), "test")
    assert out.read_all() == [InfoEdge(1, 2, 0, 3, 0), InfoEdge(1, 4, 0, 5, 0)]
    pl.cleanup()


def test_counting_processor_meter(tmp_path):
    pl, stats = make_pipeline(tmp_path)
    stream = pl.materialize([GraphEdge(1, 2), GraphEdge(2, 3), GraphEdge(3, 1)])
    out = pl.run_streaming_pass(Counting(), stream, "test")
    assert [it.f4 for it in out.read_all()] == [1, 2, 3]
    # the processor retains nothing, so the only live record is the one in flight
    assert stats.passes[-1].peak_live_records == 1
    pl.cleanup()


class Holder(Processor):
    """Retains a window of the last k items; for metering soundness checks."""

    def __init__(self, k):
        self.k = k
        self.held = []

    def on_item(self, item, emit):
        self.held.append(item)
        if len(self.held) > self.k:
            emit(self.held.pop(0))

    def on_end(self, emit):
        for item in self.held:
            emit(item)
        self.held = []

    def live_records(self):
        return len(self.held)


def test_metering_reports_at_least_true_holdings(tmp_path):
    pl, stats = make_pipeline(tmp_path)
    stream = pl.materialize([GraphEdge(i, i + 1) for i in range(1, 10)])
    pl.run_streaming_pass(Holder(4), stream, "test")
    assert stats.passes[-1].peak_live_records >= 4
    pl.cleanup()


def test_pass_composition_matches_record_replay(tmp_path):
    """P1;P2 through files equals replaying P1's emissions straight into P2."""
    items = [GraphEdge(i, i + 1, 1, i) for i in range(1, 8)]

    pl, _ = make_pipeline(tmp_path)
    out = pl.run_streaming_pass(Counting(), pl.materialize(items), "test")
    via_files = pl.run_streaming_pass(Holder(3), out, "test").read_all()
    pl.cleanup()

    emitted = []
    p1 = Counting()
    p1.on_start(emitted.append)
    for item in items:
        p1.on_item(item, emitted.append)
    p1.on_end(emitted.append)
    replayed = []
    p2 = Holder(3)
    p2.on_start(replayed.append)
    for item in emitted:
        p2.on_item(item, replayed.append)
    p2.on_end(replayed.append)
    assert via_files == replayed


def test_stats_monotone_across_passes(tmp_path):
    pl, stats = make_pipeline(tmp_path)
    stream = pl.materialize([GraphEdge(i, i + 1) for i in range(1, 6)])
    snapshots = [dict(stats.core_dict())]
    stream = pl.run_streaming_pass(Identity(), stream, "test")
    snapshots.append(dict(stats.core_dict()))
    stream = pl.run_sorting_pass(lambda it: it.fields(), stream, "test", "sort")
    snapshots.append(dict(stats.core_dict()))
    for before, after in zip(snapshots, snapshots[1:]):
        for key in before:
            assert after[key] >= before[key]
    pl.cleanup()


# -- sorting passes -----------------------------------------------------------

def head_key(item):
    return (item.head,)


def test_sort_already_sorted_identity(tmp_path):
    pl, stats = make_pipeline(tmp_path)
    items = [GraphEdge(1, h, 1, i) for i, h in enumerate([2, 3, 5, 8], start=1)]
    out = pl.run_sorting_pass(head_key, pl.materialize(items), "test", "sort")
    assert out.read_all() == items
    assert stats.sorting_passes == 1
    pl.cleanup()


def test_sort_reversed(tmp_path):
    pl, _ = make_pipeline(tmp_path)
    items = [GraphEdge(1, h, 1, i) for i, h in enumerate([9, 7, 4, 2], start=1)]
    out = pl.run_sorting_pass(head_key, pl.materialize(items), "test", "sort")
    assert [it.head for it in out.read_all()] == [2, 4, 7, 9]
    pl.cleanup()


def test_sort_stability_against_indexed_reference(tmp_path):
    rng = random.Random(11)
    items = [GraphEdge(rng.randrange(1, 4), rng.randrange(1, 4), 1, i)
             for i in range(1, 60)]
    # reference: python's stable sort over (key, original index)
    expected = [it for _, it in sorted(
        enumerate(items), key=lambda pair: (head_key(pair[1]), pair[0]))]
    pl, _ = make_pipeline(tmp_path)
    out = pl.run_sorting_pass(head_key, pl.materialize(items), "test", "sort")
    assert out.read_all() == expected
    pl.cleanup()


def test_sort_multi_chunk_matches_single_chunk(tmp_path):
    rng = random.Random(13)
    items = [GraphEdge(rng.randrange(1, 9), rng.randrange(1, 9), rng.randrange(1, 5), i)
             for i in range(1, 101)]
    small, _ = make_pipeline(tmp_path / "a")
    small.sort_chunk = 7  # force the external merge path
    big, _ = make_pipeline(tmp_path / "b")
    key = lambda it: (it.f3, it.head)
    got_small = small.run_sorting_pass(key, small.materialize(items), "t", "s").read_all()
    got_big = big.run_sorting_pass(key, big.materialize(items), "t", "s").read_all()
    assert got_small == got_big
    small.cleanup()
    big.cleanup()


def test_sort_is_permutation(tmp_path):
    rng = random.Random(17)
    items = [GraphEdge(rng.randrange(1, 50), rng.randrange(1, 50)) for _ in range(80)]
    pl, _ = make_pipeline(tmp_path)
    out = pl.run_sorting_pass(head_key, pl.materialize(items), "test", "sort")
    assert sorted(it.fields() for it in out.read_all()) == sorted(it.fields() for it in items)
    pl.cleanup()


# -- budgets ------------------------------------------------------------------

def fabricated_stats(peaks):
    stats = PassStats()
    for i, items in enumerate(peaks):
        stats.passes.append(PassRecord(i, "stream", "x", "test", items, items, 0, 0))
        stats.note_boundary(items)
    return stats


def test_budget_ok_at_180_of_200():
    assert assert_stream_budget(fabricated_stats([150, 180, 120]), 100) is None


def test_budget_violation_at_300():
    violation = assert_stream_budget(fabricated_stats([150, 300, 120]), 100)
    assert violation == BudgetViolation(pass_index=1, items=300, limit=204)


# -- graph files --------------------------------------------------------------

def test_graph_file_round_trip(tmp_path):
    path = str(tmp_path / "g.txt")
    edges = [(1, 2), (2, 3), (3, 1)]
    write_graph_file(path, 3, edges)
    assert read_graph_file(path) == (3, edges)


@pytest.mark.parametrize("content", [
    "",                       # empty
    "3\n1 2\n",               # bad header
    "3 2\n1 2\n",             # wrong edge count
    "3 1\n1 1\n",             # self-loop
    "3 2\n1 2\n1 2\n",        # duplicate
    "3 1\n1 4\n",             # out of range
    "3 1\n1 x\n",             # non-integer
])
def test_graph_file_rejects(tmp_path, content):
    path = tmp_path / "bad.txt"
    path.write_text(content)
    with pytest.raises(ParseError):
        read_graph_file(str(path))
