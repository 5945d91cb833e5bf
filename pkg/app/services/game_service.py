"""Peer selection, the pFedGame aggregation game and the comparison baselines."""

import threading
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from app.models.dataset import Dataset, NodeData
from app.models.game import BUDGET_TOLERANCE, GameConfig, GameState, GameStep, PeerSet
from app.models.learner import Model, ModelSpec, ParamVector, TrainConfig
from app.services.training_service import aggregate, evaluate_accuracy, fedavg_weights, train_local
from app.utils.errors import AggregationError, EmptyDatasetError, GameError, PeerSelectionError
from app.utils.logging import StructuredLogger

logger = StructuredLogger("game_service")

AccuracyFn = Callable[[Model, Dataset], float]


class CountingEvaluator:
    """Accuracy function wrapper that counts accuracy evaluations."""

    def __init__(self, evaluator: AccuracyFn = evaluate_accuracy):
        self._evaluator = evaluator
        self._lock = threading.Lock()
        self.count = 0

    def __call__(self, model: Model, data: Dataset) -> float:
        with self._lock:
            self.count += 1
        return self._evaluator(model, data)

    def reset(self) -> int:
        with self._lock:
            previous, self.count = self.count, 0
        return previous


def peer_selection(x: int, candidates: Iterable[int], models: Mapping[int, Model],
                   dx: Dataset, theta: float,
                   evaluator: AccuracyFn = evaluate_accuracy) -> PeerSet:
    """Keep the neighbors (and x itself) whose models reach theta on x's data.

    Exactly |P| + 1 accuracy evaluations are made.
    """
    pool = sorted(set(candidates))
    if x in pool:
        raise PeerSelectionError("Candidate set must not contain the selecting node", node=x)
    if dx.n == 0:
        raise EmptyDatasetError(f"Node {x} has no local test data for peer selection")
    missing = [c for c in pool + [x] if c not in models]
    if missing:
        raise PeerSelectionError(f"No model available for node(s) {missing}", node=x)

    accuracies: Dict[int, float] = {}
    for c in pool + [x]:
        accuracies[c] = evaluator(models[c], dx)

    members = frozenset(c for c, acc in accuracies.items() if acc >= theta)
    logger.debug("🤝 Peers selected", node=x, candidates=len(pool), selected=len(members))
    return PeerSet(members=members, accuracies=accuracies)


def pfedgame_aggregate(x: int, cx: PeerSet, models: Mapping[int, Model], dx: NodeData,
                       cfg: GameConfig,
                       evaluator: AccuracyFn = evaluate_accuracy) -> Tuple[Model, GameState]:
    """Two-player constant-sum game between M(x) and the uniform peer aggregate M(alpha).

    Each round proposes moving delta of weight to M(x) and keeps the move only if
    accuracy on x's test split changes by at least beta and does not drop.
    """
    if len(cx) == 0:
        raise GameError("Peer set is empty; nothing to aggregate", node=x)
    if cfg.delta * cfg.rounds > 1.0 + BUDGET_TOLERANCE:
        raise GameError(f"delta * rounds = {cfg.delta * cfg.rounds:g} exceeds 1", node=x)
    if x not in models:
        raise GameError("Missing self model", node=x)
    missing = [c for c in cx.sorted() if c not in models]
    if missing:
        raise GameError(f"No model available for peer(s) {missing}", node=x)
    test = dx.test

    m_x = models[x]
    members = cx.sorted()
    m_alpha = aggregate([models[c] for c in members], [1.0 / len(members)] * len(members))

    state = GameState(gamma=aggregate([m_x, m_alpha], [0.0, 1.0]))
    state.accuracy = evaluator(state.gamma, test)
    state.initial_accuracy = state.accuracy
    state.evaluations = 1

    for game_round in range(1, cfg.rounds + 1):
        psi_x = min(1.0, (state.steps + 1) * cfg.delta)
        psi_alpha = 1.0 - psi_x
        candidate = aggregate([m_x, m_alpha], [psi_x, psi_alpha])
        candidate_accuracy = evaluator(candidate, test)
        state.evaluations += 1

        accepted = (abs(state.accuracy - candidate_accuracy) >= cfg.beta
                    and state.accuracy <= candidate_accuracy)
        if accepted:
            state.steps += 1
            state.psi_x, state.psi_alpha = psi_x, psi_alpha
            state.gamma = candidate
            state.accuracy = candidate_accuracy

        state.trace.append(GameStep(
            game_round=game_round,
            psi_x=state.psi_x,
            psi_alpha=state.psi_alpha,
            candidate_accuracy=candidate_accuracy,
            accepted=accepted,
        ))
        if not accepted and cfg.early_exit:
            break

    logger.debug(
        "🎲 Game finished",
        node=x,
        peers=len(members),
        psi_x=state.psi_x,
        accuracy=state.accuracy,
        accepted=state.steps,
    )
    return state.gamma, state


def fedavg_baseline_round(models: Mapping[int, Model], train_sizes: Mapping[int, int]) -> Model:
    """Global model weighted by training-data share."""
    if not models:
        raise AggregationError("At least one model is required")
    nodes = sorted(models)
    missing = [n for n in nodes if n not in train_sizes]
    if missing:
        raise AggregationError(f"No training size for node(s) {missing}")
    weights = fedavg_weights([train_sizes[n] for n in nodes])
    return aggregate([models[n] for n in nodes], weights)


def local_only_baseline(model: Model, dx: NodeData, tc: TrainConfig) -> Model:
    """Train on the local shard with no communication."""
    return train_local(model, dx.train, tc)


# Landscape harness: drives the real game with an injected accuracy surface.

_HARNESS_SPEC = ModelSpec(kind="softmax-regression", input_dim=1, num_classes=2)
_HARNESS_DATA = NodeData(
    train=Dataset(np.zeros((1, 1)), np.zeros(1, dtype=np.int64), 2),
    test=Dataset(np.zeros((1, 1)), np.zeros(1, dtype=np.int64), 2),
)


def _harness_model(fill: float) -> Model:
    layout = _HARNESS_SPEC.layout()
    return Model(_HARNESS_SPEC, ParamVector(np.full(_HARNESS_SPEC.param_count(), fill), layout))


def landscape_game(landscape: Sequence[float], cfg: GameConfig) -> GameState:
    """Play the game where accuracy at psi_x = i*delta is landscape[i].

    The self model is all ones and the single peer all zeros, so every mixture's
    parameters equal its psi_x and the accuracy lookup is exact. The returned
    state's `evaluations` counts the lookups made.
    """
    if len(landscape) < cfg.rounds + 1:
        raise GameError(f"Landscape needs {cfg.rounds + 1} points, got {len(landscape)}")
    values = [float(v) for v in landscape]

    def lookup(model: Model, _data: Dataset) -> float:
        return values[int(round(float(model.params.values[0]) / cfg.delta))]

    counter = CountingEvaluator(lookup)
    models = {0: _harness_model(1.0), 1: _harness_model(0.0)}
    _, state = pfedgame_aggregate(0, PeerSet(frozenset({1})), models, _HARNESS_DATA, cfg, counter)
    if counter.count != state.evaluations:
        raise GameError(f"Game reported {state.evaluations} evaluations, made {counter.count}")
    return state


def reference_game_trace(landscape: Sequence[float], cfg: GameConfig) -> List[bool]:
    """Accept/reject flags of the game evaluated directly on step indices."""
    steps = 0
    current = float(landscape[0])
    flags: List[bool] = []
    for _ in range(cfg.rounds):
        proposed = float(landscape[steps + 1])
        accepted = abs(current - proposed) >= cfg.beta and current <= proposed
        if accepted:
            steps += 1
            current = proposed
        flags.append(accepted)
        if not accepted and cfg.early_exit:
            break
    return flags


class GridOptimumReport(BaseModel):
    """How often greedy play reaches the best mixing weight on the grid."""

    landscapes: int
    optimal: int
    hit_rate: float
    mean_regret: float
    max_regret: float
    trace_mismatches: int


def grid_optimum_report(landscapes: Sequence[Sequence[float]], cfg: GameConfig) -> GridOptimumReport:
    """Compare final game accuracy with the grid maximum over {0, delta, ..., r*delta}."""
    optimal = 0
    mismatches = 0
    regrets: List[float] = []
    for landscape in landscapes:
        state = landscape_game(landscape, cfg)
        best = max(float(v) for v in landscape[:cfg.rounds + 1])
        regret = best - state.accuracy
        regrets.append(regret)
        if regret <= 0.0:
            optimal += 1
        if [step.accepted for step in state.trace] != reference_game_trace(landscape, cfg):
            mismatches += 1

    total = len(regrets)
    return GridOptimumReport(
        landscapes=total,
        optimal=optimal,
        hit_rate=optimal / total if total else 0.0,
        mean_regret=float(np.mean(regrets)) if regrets else 0.0,
        max_regret=float(np.max(regrets)) if regrets else 0.0,
        trace_mismatches=mismatches,
    )


def random_landscapes(count: int, cfg: GameConfig, seed: int) -> List[List[float]]:
    """Accuracy surfaces quantized to 1/1000, like a 1000-row test split."""
    rng = np.random.default_rng(seed)
    return [
        (np.round(rng.uniform(0.0, 1.0, size=cfg.rounds + 1) * 1000) / 1000).tolist()
        for _ in range(count)
    ]
