"""Task-construct graph engine: python bindings over the C++ core."""

from _termgraph import (
    battery,
    cluster,
    hypergraph_metrics,
    js_divergence,
    mock_embed,
    mutual_reachability,
    parse_query,
    principal_components,
    query_tasks,
    run_pipeline,
    run_stage,
    task_distance,
)

__all__ = [
    "battery",
    "cluster",
    "hypergraph_metrics",
    "js_divergence",
    "mock_embed",
    "mutual_reachability",
    "parse_query",
    "principal_components",
    "query_tasks",
    "run_pipeline",
    "run_stage",
    "task_distance",
]
