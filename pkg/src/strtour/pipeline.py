"""End-to-end driver: decomposition, preparation, merges, tour emission."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .circuit_find import find_circuits, initial_stream
from .stream_core import (
    IntegrityFault,
    PassStats,
    StreamItem,
    StreamPipeline,
    assert_stream_budget,
    read_graph_file,
    write_tour_file,
)
from .tree_merge import MergeIterationReport, emit_tour, run_merges
from .tree_prep import prepare


@dataclass
class SolveResult:
    tour: list[tuple[int, int]]
    stats: PassStats
    tree_height: int
    circuits: int
    iteration_reports: list[MergeIterationReport] = field(default_factory=list)
    phase1_items: Optional[list[StreamItem]] = None

    def stats_dict(self) -> dict:
        out = self.stats.core_dict()
        out["passes"] = [rec.as_dict() for rec in self.stats.passes]
        out["iterations"] = [rep.as_dict() for rep in self.iteration_reports]
        return out


def solve(n: int, edges: list[tuple[int, int]], *, tmpdir: Optional[str] = None,
          trace_dir: Optional[str] = None, fidelity_relabel: bool = False,
          keep_phase1: bool = False) -> SolveResult:
    """Run the full streaming pipeline over an in-memory edge list.

    Raises ``NotEulerianError`` for graphs without a tour, ``ParseError``
    for malformed input, and ``IntegrityFault`` if any internal invariant
    or budget breaks.
    """
    m = len(edges)
    stats = PassStats()
    pipeline = StreamPipeline(stats, tmpdir=tmpdir, trace_dir=trace_dir)
    try:
        source = pipeline.materialize(initial_stream(n, edges), "input")
        stream, height, finder = find_circuits(
            pipeline, n, source, fidelity_relabel=fidelity_relabel)
        phase1_items = stream.read_all() if keep_phase1 else None
        if trace_dir:
            _dump_tree(trace_dir, finder)

        stream, completer = prepare(pipeline, stream)
        if completer.observed_height != height:
            raise IntegrityFault(
                f"prepared stream encodes height {completer.observed_height}, "
                f"phase 1 reported {height}")

        stream, reports = run_merges(
            pipeline, stream, height, completer.info_out, finder.state.cir)
        tour = emit_tour(pipeline, stream, m)

        violation = assert_stream_budget(stats, m)
        if violation is not None:
            raise IntegrityFault(
                f"stream budget exceeded at pass {violation.pass_index}: "
                f"{violation.items} items > {violation.limit}")
        return SolveResult(
            tour=tour,
            stats=stats,
            tree_height=height,
            circuits=finder.state.cir,
            iteration_reports=reports,
            phase1_items=phase1_items,
        )
    finally:
        pipeline.cleanup()


def _dump_tree(trace_dir: str, finder) -> None:
    depths = finder.depths
    path = os.path.join(trace_dir, "connectivity_tree.txt")
    with open(path, "w", encoding="ascii") as fh:
        for rec in finder.state.tree_records:
            parent, child = ((rec.a, rec.b) if depths[rec.a] < depths[rec.b]
                             else (rec.b, rec.a))
            fh.write(f"T {parent} {child} {rec.cvertex}\n")


def solve_file(graph_path: str, tour_path: Optional[str] = None,
               stats_path: Optional[str] = None, **kwargs) -> SolveResult:
    n, edges = read_graph_file(graph_path)
    result = solve(n, edges, **kwargs)
    if tour_path:
        write_tour_file(tour_path, result.tour)
    if stats_path:
        write_stats_file(stats_path, result)
    return result


def write_stats_file(path: str, result: SolveResult) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(result.stats_dict(), fh, indent=2)
        fh.write("\n")
