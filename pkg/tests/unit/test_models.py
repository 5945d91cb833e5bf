"""Unit tests for data models."""

import numpy as np
import pytest
from pydantic import ValidationError

from app.models.dataset import Dataset, PartitionMode
from app.models.game import GameConfig, PeerSet
from app.models.learner import Model, ModelSpec, ParamVector, TrainConfig
from app.models.simulation import (
    CsvSource,
    NodeMetrics,
    RoundMetrics,
    SimConfig,
    SyntheticSource,
)
from app.models.topology import Adjacency, Edge
from app.utils.errors import ConfigurationError, DataValidationError, ModelShapeError, TopologyError


class TestModelSpec:
    """Test ModelSpec model."""

    def test_softmax_layout(self):
        spec = ModelSpec(kind="softmax-regression", input_dim=3, num_classes=4)
        assert spec.layout() == (("W", (3, 4)), ("b", (4,)))
        assert spec.param_count() == 16

    def test_mlp_layout(self):
        spec = ModelSpec(kind="mlp-1hidden", input_dim=3, hidden_dim=5, num_classes=2)
        assert spec.param_count() == 3 * 5 + 5 + 5 * 2 + 2

    def test_softmax_ignores_hidden_dim(self):
        a = ModelSpec(kind="softmax-regression", input_dim=3, num_classes=4, hidden_dim=32)
        b = ModelSpec(kind="softmax-regression", input_dim=3, num_classes=4)
        assert a == b

    def test_mlp_requires_hidden_dim(self):
        with pytest.raises(ValidationError):
            ModelSpec(kind="mlp-1hidden", input_dim=3, num_classes=2)

    def test_spec_is_frozen(self):
        spec = ModelSpec(input_dim=3, num_classes=2)
        with pytest.raises(ValidationError):
            spec.input_dim = 4


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.epochs, cfg.learning_rate, cfg.batch_size) == (1, 0.1, 32)

    @pytest.mark.parametrize("field, value", [("epochs", 0), ("learning_rate", 0.0), ("batch_size", 0)])
    def test_rejects_non_positive(self, field, value):
        with pytest.raises(ValidationError):
            TrainConfig(**{field: value})


class TestParamVector:
    """Test flat parameter containers."""

    def test_values_are_read_only_copies(self):
        source = np.arange(16, dtype=np.float64)
        params = ParamVector(source, (("W", (3, 4)), ("b", (4,))))
        source[0] = 99.0
        assert params.values[0] == 0.0
        with pytest.raises(ValueError):
            params.values[0] = 1.0

    def test_size_must_match_layout(self):
        with pytest.raises(ModelShapeError):
            ParamVector(np.zeros(5), (("W", (2, 2)),))

    def test_tensors(self):
        params = ParamVector(np.arange(6.0), (("W", (2, 2)), ("b", (2,))))
        tensors = params.tensors()
        np.testing.assert_array_equal(tensors["W"], [[0.0, 1.0], [2.0, 3.0]])
        np.testing.assert_array_equal(tensors["b"], [4.0, 5.0])

    def test_equality_by_value(self):
        layout = (("b", (2,)),)
        assert ParamVector(np.array([1.0, 2.0]), layout) == ParamVector([1.0, 2.0], layout)
        assert ParamVector(np.array([1.0, 2.0]), layout) != ParamVector([1.0, 3.0], layout)

    def test_model_rejects_foreign_layout(self, softmax_spec):
        with pytest.raises(ModelShapeError):
            Model(softmax_spec, ParamVector(np.zeros(4), (("b", (4,)),)))


class TestDataset:
    def test_validates_labels(self):
        with pytest.raises(DataValidationError):
            Dataset(np.zeros((2, 2)), np.array([0, 3]), 3)

    def test_row_count_mismatch(self):
        with pytest.raises(DataValidationError):
            Dataset(np.zeros((2, 2)), np.array([0]), 2)

    def test_subset(self, synthetic_data):
        part = synthetic_data.subset(np.array([0, 1, 2]))
        assert part.n == 3
        assert part.num_classes == synthetic_data.num_classes


class TestPartitionMode:
    """Pinned participant counts per regime."""

    @pytest.mark.parametrize("mode, k", [("extreme", 5), ("severe", 10), ("homogeneous", 10), ("modest", 10)])
    def test_default_k(self, mode, k):
        assert PartitionMode(mode=mode).k == k

    def test_pinned_k_enforced(self):
        with pytest.raises(ValidationError):
            PartitionMode(mode="extreme", k=4)

    def test_custom_k_override(self):
        assert PartitionMode(mode="extreme", k=4, allow_custom_k=True).k == 4

    def test_modest_k_free(self):
        assert PartitionMode(mode="modest", k=3).k == 3


class TestGameConfig:
    def test_budget_boundary_accepted(self):
        GameConfig(delta=0.1, rounds=10)

    def test_budget_exceeded(self):
        with pytest.raises(ValidationError):
            GameConfig(delta=0.2, rounds=10)

    def test_peer_set(self):
        peers = PeerSet(frozenset({3, 1}))
        assert len(peers) == 2
        assert 1 in peers
        assert peers.sorted() == [1, 3]


class TestTopologyTypes:
    def test_edge_normalized(self):
        edge = Edge(4, 2, 0.5)
        assert (edge.a, edge.b) == (2, 4)

    def test_self_loop_rejected(self):
        with pytest.raises(TopologyError):
            Edge(1, 1)

    def test_weight_range(self):
        with pytest.raises(TopologyError):
            Edge(0, 1, 1.5)

    def test_adjacency_neighbors(self):
        adj = Adjacency((0, 1, 2), (Edge(0, 1), Edge(1, 2)))
        assert adj.neighbor_set(1) == frozenset({0, 2})
        assert adj.neighbor_set(0) == frozenset({1})
        assert all(edge.weight == 1.0 for edge in adj.edges)

    def test_adjacency_unknown_node(self):
        adj = Adjacency((0, 1), (Edge(0, 1),))
        with pytest.raises(TopologyError):
            adj.neighbor_set(5)

    def test_to_graph(self):
        graph = Adjacency((0, 1, 2), (Edge(0, 2, 0.25),)).to_graph()
        assert sorted(graph.nodes) == [0, 1, 2]
        assert graph[0][2]["weight"] == 0.25


class TestSimConfig:
    """Flat schema conversion."""

    def test_from_flat_requires_dataset(self):
        with pytest.raises(ConfigurationError) as exc:
            SimConfig.from_flat({"rounds": 3})
        assert exc.value.details["field"] == "dataset"

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            SimConfig.from_flat({"dataset": "synthetic", "learning_rat": 0.1})

    def test_budget_error_names_field(self):
        with pytest.raises(ConfigurationError) as exc:
            SimConfig.from_flat({"dataset": "synthetic", "delta": 0.2, "game_rounds": 10})
        assert exc.value.details["field"].startswith("game")

    def test_csv_source(self):
        cfg = SimConfig.from_flat({"dataset": "data/train.csv", "num_classes": 3})
        assert isinstance(cfg.dataset, CsvSource)
        assert cfg.dataset.num_classes == 3

    @pytest.mark.parametrize(
        "flat",
        [
            {"dataset": "synthetic"},
            {"dataset": "synthetic", "partition": "modest", "k": 7, "majority_fraction": 0.6,
             "topology": "rewire-per-round", "edge_probability": 0.3, "model": "mlp-1hidden",
             "hidden_dim": 8, "early_exit_game": True, "workers": 2, "dataset_seed": 9},
            {"dataset": "points.csv", "seed": 4, "algorithm": "local-only"},
        ],
    )
    def test_round_trip(self, flat):
        cfg = SimConfig.from_flat(flat)
        assert SimConfig.from_flat(cfg.to_flat()) == cfg

    def test_defaults(self):
        cfg = SimConfig(dataset=SyntheticSource())
        assert cfg.rounds == 20
        assert cfg.game.rounds == 10
        assert cfg.game.delta == 0.1


class TestRoundMetrics:
    def test_from_nodes_sorts_and_averages(self):
        nodes = [
            NodeMetrics(node=1, accuracy=0.5, peers=1, psi_x=0.0),
            NodeMetrics(node=0, accuracy=1.0, peers=2, psi_x=0.1),
        ]
        metrics = RoundMetrics.from_nodes(0, nodes)
        assert [m.node for m in metrics.nodes] == [0, 1]
        assert metrics.mean_accuracy == 0.75

    def test_inconsistent_mean_rejected(self):
        with pytest.raises(ValidationError):
            RoundMetrics(
                fl_round=0,
                nodes=[NodeMetrics(node=0, accuracy=0.5, peers=0, psi_x=1.0)],
                mean_accuracy=0.6,
            )

    def test_accuracy_range(self):
        with pytest.raises(ValidationError):
            NodeMetrics(node=0, accuracy=1.2, peers=0, psi_x=0.0)
