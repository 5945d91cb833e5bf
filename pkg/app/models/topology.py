"""Participant graph schedule and per-round adjacency snapshots."""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Literal, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field

from app.utils.errors import TopologyError

TopologyKind = Literal["static-complete", "static-random", "rewire-per-round", "similarity-threshold"]


class TopologySchedule(BaseModel):
    """How the edge set evolves over FL rounds."""

    model_config = ConfigDict(frozen=True)

    kind: TopologyKind = Field(default="similarity-threshold", description="Schedule kind")
    edge_probability: float = Field(
        default=0.5, ge=0.0, le=1.0, description="G(n, p) edge probability for random bases"
    )
    rewire_fraction: float = Field(
        default=0.2, ge=0.0, le=1.0, description="Share of base edges rewired each round"
    )
    similarity_threshold: float = Field(
        default=0.0, ge=0.0, le=1.0, description="Minimum label-distribution similarity tau"
    )
    seed: int = Field(default=0, ge=0, lt=2**64, description="Graph seed")


@dataclass(frozen=True, order=True)
class Edge:
    """Undirected weighted edge with a < b."""

    a: int
    b: int
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise TopologyError("Self-loops are not allowed", node=self.a)
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        if not 0.0 <= self.weight <= 1.0:
            raise TopologyError(f"Edge weight {self.weight} outside [0, 1]")


@dataclass(frozen=True)
class Adjacency:
    """Immutable edge set over a fixed node set."""

    node_ids: Tuple[int, ...]
    edges: Tuple[Edge, ...]
    _index: Dict[int, FrozenSet[int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        nodes = tuple(sorted(int(n) for n in self.node_ids))
        edges = tuple(sorted(self.edges))
        known = set(nodes)
        index: Dict[int, set] = {n: set() for n in nodes}
        for edge in edges:
            if edge.a not in known or edge.b not in known:
                raise TopologyError("Edge endpoint outside node set", node=(edge.a, edge.b))
            index[edge.a].add(edge.b)
            index[edge.b].add(edge.a)
        object.__setattr__(self, "node_ids", nodes)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "_index", {n: frozenset(v) for n, v in index.items()})

    def neighbor_set(self, x: int) -> FrozenSet[int]:
        try:
            return self._index[x]
        except KeyError:
            raise TopologyError(f"Unknown node id {x}", node=x) from None

    def to_graph(self) -> nx.Graph:
        """Frozen networkx view of this snapshot."""
        graph = nx.Graph()
        graph.add_nodes_from(self.node_ids)
        graph.add_weighted_edges_from((e.a, e.b, e.weight) for e in self.edges)
        return nx.freeze(graph)
