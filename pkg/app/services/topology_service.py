"""Temporally dynamic participant graphs."""

from typing import Iterator, List, Optional, Sequence, Set

import networkx as nx
import numpy as np

from app.models.topology import Adjacency, Edge, TopologySchedule
from app.utils.errors import DataValidationError, TopologyError
from app.utils.logging import StructuredLogger
from app.utils.rng import derive_seed, make_rng
from app.utils.validators import validate_histogram

logger = StructuredLogger("topology_service")


def distribution_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """One minus the total-variation distance between two label histograms."""
    ha = validate_histogram(a, "a")
    hb = validate_histogram(b, "b")
    if ha.shape != hb.shape:
        raise DataValidationError(
            f"Histogram lengths differ ({ha.size} vs {hb.size})", field_name="histogram"
        )
    distance = 0.5 * float(np.abs(ha - hb).sum())
    return min(1.0, max(0.0, 1.0 - distance))


def _base_random_graph(n: int, schedule: TopologySchedule) -> nx.Graph:
    return nx.gnp_random_graph(n, schedule.edge_probability,
                               seed=derive_seed(schedule.seed, "base") % 2**32)


def _rewired(base: nx.Graph, schedule: TopologySchedule, t: int) -> nx.Graph:
    edges = sorted(tuple(sorted(e)) for e in base.edges())
    count = int(round(schedule.rewire_fraction * len(edges)))
    if count == 0:
        return base
    rng = make_rng(schedule.seed, t, "rewire")
    candidates = sorted(tuple(sorted(e)) for e in nx.non_edges(base))
    count = min(count, len(candidates))
    if count == 0:
        return base
    dropped = rng.choice(len(edges), size=count, replace=False)
    added = rng.choice(len(candidates), size=count, replace=False)

    graph = nx.Graph()
    graph.add_nodes_from(base.nodes())
    removed = {edges[i] for i in dropped}
    graph.add_edges_from(e for e in edges if e not in removed)
    graph.add_edges_from(candidates[i] for i in added)
    return graph


def adjacency_at(schedule: TopologySchedule, t: int,
                 histograms: Sequence[Sequence[float]],
                 node_ids: Optional[Sequence[int]] = None) -> Adjacency:
    """Edge set at round t; a pure function of the schedule, t and the node set."""
    if t < 0:
        raise TopologyError(f"Round index must be non-negative, got {t}", kind=schedule.kind)
    n = len(histograms)
    nodes = list(node_ids) if node_ids is not None else list(range(n))
    if len(nodes) != n:
        raise TopologyError("One histogram is required per node", kind=schedule.kind)

    edges: List[Edge] = []
    if schedule.kind == "static-complete":
        graph = nx.complete_graph(n)
        edges = [Edge(nodes[a], nodes[b]) for a, b in graph.edges()]
    elif schedule.kind == "static-random":
        graph = _base_random_graph(n, schedule)
        edges = [Edge(nodes[a], nodes[b]) for a, b in graph.edges()]
    elif schedule.kind == "rewire-per-round":
        graph = _rewired(_base_random_graph(n, schedule), schedule, t)
        edges = [Edge(nodes[a], nodes[b]) for a, b in graph.edges()]
    elif schedule.kind == "similarity-threshold":
        for a in range(n):
            for b in range(a + 1, n):
                similarity = distribution_similarity(histograms[a], histograms[b])
                if similarity >= schedule.similarity_threshold:
                    edges.append(Edge(nodes[a], nodes[b], similarity))
    else:
        raise TopologyError(f"Unknown topology kind {schedule.kind!r}", kind=str(schedule.kind))

    adjacency = Adjacency(tuple(nodes), tuple(edges))
    logger.debug("🕸️ Adjacency computed", fl_round=t, kind=schedule.kind, edge_count=len(edges))
    return adjacency


def neighbors(adj: Adjacency, x: int) -> Set[int]:
    """Nodes sharing an edge with x (never x itself)."""
    return set(adj.neighbor_set(x))


def export_edges(t: int, adj: Adjacency) -> Iterator[str]:
    """`t,node_a,node_b,weight` lines for offline graph analysis."""
    for edge in adj.edges:
        yield f"{t},{edge.a},{edge.b},{edge.weight!r}"
