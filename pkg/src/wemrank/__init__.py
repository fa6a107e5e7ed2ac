"""Node importance in weighted networks via possible-world degree tails."""

from .graph import (
    GraphStats,
    WeightedGraph,
    graph_stats,
    largest_connected_component,
    parse_edge_list,
    read_edge_list,
)
from .ranking import ImportanceRanking
from .wem import CorrelationMode, normalize_weights, wem_rank_all, wem_scores

__all__ = [
    "CorrelationMode",
    "GraphStats",
    "ImportanceRanking",
    "WeightedGraph",
    "graph_stats",
    "largest_connected_component",
    "normalize_weights",
    "parse_edge_list",
    "read_edge_list",
    "wem_rank_all",
    "wem_scores",
]
__version__ = "0.1.0"
