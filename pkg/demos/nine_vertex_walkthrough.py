"""Walk the worked nine-vertex example through every stage of the pipeline.

The edge order below forces the decomposition into five known circuits: two
triangles sharing vertex 7, a four-cycle founding a second component, a
triangle joining the two components, and a final triangle that gets no tree
vertex of its own (its info edge is emitted inline with flag 1).

Run with:  python demos/nine_vertex_walkthrough.py
"""

from strtour import (
    AdjacencyGraph,
    CircuitForest,
    PassStats,
    StreamPipeline,
    encode_item,
    euler_tree_reference,
    find_circuits,
    initial_stream,
    prepare,
    run_merges,
    emit_tour,
    validate_tour,
)

N = 9
EDGES = [
    (5, 7), (7, 8), (5, 8),
    (6, 7), (7, 9),
    (1, 2), (2, 3), (3, 4),
    (1, 5),
    (6, 9), (2, 8), (8, 9),
    (1, 4), (3, 5), (2, 9),
    (1, 3),
]

stats = PassStats()
pipeline = StreamPipeline(stats)
try:
    print("phase 1: single-pass circuit decomposition")
    source = pipeline.materialize(initial_stream(N, EDGES), "input")
    stream, height, finder = find_circuits(pipeline, N, source)
    phase1 = stream.read_all()
    for item in phase1:
        print("  " + encode_item(item))
    print(f"  tree height {height}, depths {finder.depths}")

    # the recursive reference merger works straight off this decomposition
    forest = CircuitForest.from_stream_items(phase1)
    reference = euler_tree_reference(forest)
    ok = validate_tour(AdjacencyGraph.from_edges(N, EDGES), reference) is None
    print(f"\nreference merger tour valid: {ok}")

    print("\npreparation: rotate parented circuits, complete missing depths")
    stream, completer = prepare(pipeline, stream)
    for item in stream.read_all():
        print("  " + encode_item(item))

    print("\nmerge rounds (each halves the tree height)")
    stream, reports = run_merges(pipeline, stream, height,
                                 completer.info_out, finder.state.cir)
    for report in reports:
        print(f"  round {report.index}: height {report.height_before} -> "
              f"{report.height_after}, circuits {report.circuits_before} -> "
              f"{report.circuits_after}")

    tour = emit_tour(pipeline, stream, len(EDGES))
    print("\nfinal tour:")
    print("  " + " -> ".join(str(u) for u, _ in tour) + f" -> {tour[0][0]}")
    ok = validate_tour(AdjacencyGraph.from_edges(N, EDGES), tour) is None
    print(f"tour valid: {ok}")
    print(f"\npasses: {stats.streaming_passes} streaming + "
          f"{stats.sorting_passes} sorting, peak stream {stats.peak_stream_items} "
          f"items (budget {2 * len(EDGES) + 4})")
finally:
    pipeline.cleanup()
