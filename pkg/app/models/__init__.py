"""Data models for the pFedGame simulator."""

from .dataset import Dataset, NodeData, PartitionMode
from .game import GameConfig, GameState, GameStep, PeerSet
from .learner import Model, ModelSpec, ParamVector, TrainConfig
from .simulation import (
    AveragedMetrics,
    CsvSource,
    NodeMetrics,
    RoundMetrics,
    SimConfig,
    SimulationResult,
    SimulationState,
    SyntheticSource,
    TraceRecord,
)
from .topology import Adjacency, Edge, TopologySchedule
