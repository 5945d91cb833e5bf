"""Pytest configuration and common fixtures for the pFedGame simulator tests."""

import logging
from typing import Any, Callable, Dict, Iterator

import numpy as np
import pytest

from app.config import get_settings
from app.models.dataset import Dataset, NodeData, PartitionMode
from app.models.game import GameConfig
from app.models.learner import Model, ModelSpec, ParamVector
from app.models.simulation import SimConfig, SyntheticSource
from app.services.data_service import generate_synthetic, train_test_split


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    """Isolate every test from the caller's environment and the settings cache."""
    for name in ("PFEDGAME_LOG", "PFEDGAME_LOG_LEVEL", "PFEDGAME_WORKERS", "PFEDGAME_OUTPUT_ROOT"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def synthetic_data() -> Dataset:
    """Four well-separated classes in five dimensions."""
    return generate_synthetic(num_classes=4, dim=5, per_class=30, separation=4.0, seed=7)


@pytest.fixture
def node_data(synthetic_data: Dataset) -> NodeData:
    return train_test_split(synthetic_data, 0.8, seed=3)


@pytest.fixture
def softmax_spec() -> ModelSpec:
    return ModelSpec(kind="softmax-regression", input_dim=5, num_classes=4)


@pytest.fixture
def mlp_spec() -> ModelSpec:
    return ModelSpec(kind="mlp-1hidden", input_dim=5, hidden_dim=6, num_classes=4)


@pytest.fixture
def constant_model() -> Callable[[ModelSpec, float], Model]:
    """Build a model whose parameters all equal one value."""

    def build(spec: ModelSpec, fill: float) -> Model:
        return Model(spec, ParamVector(np.full(spec.param_count(), fill), spec.layout()))

    return build


@pytest.fixture
def game_config() -> GameConfig:
    return GameConfig(theta=0.5, beta=0.001, delta=0.1, rounds=10)


@pytest.fixture
def small_flat() -> Dict[str, Any]:
    """Flat config for a quick four-node run; theta 0 so every neighbor plays the game."""
    return {
        "dataset": "synthetic",
        "num_classes": 4,
        "dim": 5,
        "per_class": 40,
        "separation": 4.0,
        "partition": "homogeneous",
        "k": 4,
        "allow_custom_k": True,
        "rounds": 3,
        "seed": 11,
        "topology": "static-complete",
        "theta": 0.0,
        "game_rounds": 5,
        "delta": 0.2,
    }


@pytest.fixture
def small_config(small_flat: Dict[str, Any]) -> SimConfig:
    return SimConfig.from_flat(small_flat)


@pytest.fixture
def extreme_config() -> SimConfig:
    """Two classes per node across four nodes."""
    return SimConfig(
        rounds=3,
        master_seed=5,
        dataset=SyntheticSource(num_classes=8, dim=6, per_class=30),
        partition=PartitionMode(mode="extreme", k=4, allow_custom_k=True),
    )


@pytest.fixture
def quiet_logs(caplog: pytest.LogCaptureFixture) -> pytest.LogCaptureFixture:
    caplog.set_level(logging.WARNING)
    return caplog
