"""In-process property-graph engine on partitioned collections."""

from .algorithms import (PregelProgram, PregelResult, coarsen, connected_components, out_degrees,
                         page_rank, pregel, senior_neighbor_count)
from .collection import Collection
from .context import Context, EngineConfig, default_context, set_default_context
from .errors import AccessViolation, ConfigError, CorruptBlockError, DataError, GrapheneError, UDFError
from .graph import Graph, PropertyGraph, Triplet, VertexCollection, build_graph, from_edge_list
from .io import load_edges, load_titles
from .meter import CommMeter, export_metrics
from .partition import EdgeKind, EdgePartitioner, HashPartitioner
from .plan import BOTH, DST_ONLY, NEITHER, SRC_ONLY, AccessSpec, Direction, ScanStrategy, reads

__version__ = "0.1.0"

__all__ = [
    "AccessSpec", "AccessViolation", "BOTH", "Collection", "CommMeter", "ConfigError", "Context",
    "CorruptBlockError", "DST_ONLY", "DataError", "Direction", "EdgeKind", "EdgePartitioner",
    "EngineConfig", "Graph", "GrapheneError", "HashPartitioner", "NEITHER", "PregelProgram",
    "PregelResult", "PropertyGraph", "SRC_ONLY", "ScanStrategy", "Triplet", "UDFError",
    "VertexCollection", "build_graph", "coarsen", "connected_components", "default_context",
    "export_metrics", "from_edge_list", "load_edges", "load_titles", "out_degrees", "page_rank",
    "pregel", "reads", "senior_neighbor_count", "set_default_context",
]
