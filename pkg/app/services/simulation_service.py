"""Round-synchronous federated learning over a dynamic participant graph.

Each round runs as bulk phases separated by barriers: local training, an
immutable snapshot of the trained models, the round's adjacency, then per-node
peer selection and aggregation against that snapshot. Per-node work can be
spread over a thread pool; every random stream is derived from
(master seed, node, round), so the result does not depend on the pool width.
"""

from concurrent.futures import ThreadPoolExecutor
from types import MappingProxyType
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, TypeVar

import numpy as np

from app.config import get_settings
from app.models.dataset import NodeData
from app.models.learner import Model, ModelSpec, TrainConfig
from app.models.simulation import (
    AveragedMetrics,
    NodeMetrics,
    NodeRoundSummary,
    RoundMetrics,
    RoundSummary,
    SimConfig,
    SimulationResult,
    SimulationState,
    TraceRecord,
    validated,
)
from app.services.data_service import dataset_fingerprint, label_histogram, load_source, partition
from app.services.game_service import (
    AccuracyFn,
    fedavg_baseline_round,
    local_only_baseline,
    peer_selection,
    pfedgame_aggregate,
)
from app.services.topology_service import adjacency_at, neighbors
from app.services.training_service import evaluate_accuracy, init_model, train_local
from app.utils.errors import ConfigurationError
from app.utils.logging import StructuredLogger, timed_operation
from app.utils.rng import derive_seed

logger = StructuredLogger("simulation_service")

T = TypeVar("T")
R = TypeVar("R")


def _map_nodes(fn: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    """Apply fn to every item, results in input order."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _train_config(cfg: SimConfig, node: int, t: int) -> TrainConfig:
    return cfg.train.model_copy(
        update={"seed": derive_seed(cfg.master_seed, cfg.train.seed, node, t, "train")}
    )


def _resolve_workers(cfg: SimConfig, workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    if cfg.workers is not None:
        return cfg.workers
    return get_settings().workers


def init_state(cfg: SimConfig) -> SimulationState:
    """Load and partition the data and give every node the same initial model."""
    data = load_source(cfg.dataset, cfg.master_seed)
    logger.debug("📦 Dataset loaded", rows=data.n, classes=data.num_classes,
                 fingerprint=dataset_fingerprint(data))
    spec = validated(ModelSpec, {
        "kind": cfg.model,
        "input_dim": data.dim,
        "num_classes": data.num_classes,
        "hidden_dim": cfg.hidden_dim,
    })
    shards = partition(data, cfg.partition, derive_seed(cfg.master_seed, "partition"))
    initial = init_model(spec, derive_seed(cfg.master_seed, "init"))
    schedule = cfg.topology.model_copy(
        update={"seed": derive_seed(cfg.master_seed, cfg.topology.seed, "topology")}
    )

    node_data: Dict[int, NodeData] = dict(enumerate(shards))
    return SimulationState(
        models={node: initial for node in node_data},
        data=node_data,
        histograms={node: label_histogram(nd.train) for node, nd in node_data.items()},
        schedule=schedule,
    )


def _pfedgame_phase(state: SimulationState, snapshot: Mapping[int, Model], t: int,
                    cfg: SimConfig, evaluator: AccuracyFn,
                    workers: int) -> Tuple[Dict[int, Model], List[NodeMetrics], List[TraceRecord]]:
    nodes = state.node_ids
    adjacency = adjacency_at(state.schedule, t, [state.histograms[n] for n in nodes], nodes)
    state.adjacency = adjacency

    def play(x: int) -> Tuple[Model, NodeMetrics, List[TraceRecord]]:
        dx = state.data[x]
        cx = peer_selection(x, neighbors(adjacency, x), snapshot, dx.test, cfg.game.theta, evaluator)
        if len(cx) == 0:
            logger.info("⏭️ No aggregation: empty peer set", node=x, fl_round=t)
            metrics = NodeMetrics(node=x, accuracy=0.0, peers=0, psi_x=1.0, skipped=True)
            return snapshot[x], metrics, []

        gamma, game = pfedgame_aggregate(x, cx, snapshot, dx, cfg.game, evaluator)
        records = [
            TraceRecord(
                fl_round=t,
                node=x,
                game_round=step.game_round,
                psi_x=step.psi_x,
                candidate_acc=step.candidate_accuracy,
                accepted=step.accepted,
            )
            for step in game.trace
        ]
        metrics = NodeMetrics(node=x, accuracy=0.0, peers=len(cx), psi_x=game.psi_x)
        return gamma, metrics, records

    outcomes = _map_nodes(play, nodes, workers)
    models = {x: outcome[0] for x, outcome in zip(nodes, outcomes)}
    metrics = [outcome[1] for outcome in outcomes]
    traces = [record for outcome in outcomes for record in outcome[2]]
    return models, metrics, traces


def run_round(state: SimulationState, t: int, cfg: SimConfig,
              evaluator: Optional[AccuracyFn] = None,
              workers: Optional[int] = None) -> Tuple[SimulationState, RoundMetrics]:
    """Advance every node by one FL round."""
    if t < 0 or t >= cfg.rounds:
        raise ConfigurationError(f"Round {t} outside [0, {cfg.rounds})", config_key="rounds")
    accuracy_fn = evaluator or evaluate_accuracy
    width = _resolve_workers(cfg, workers)
    nodes = state.node_ids
    new_state = SimulationState(
        models=dict(state.models), data=state.data, histograms=state.histograms,
        schedule=state.schedule,
    )

    # Phase 1: local training from each node's current model.
    if cfg.algorithm == "local-only":
        trained = _map_nodes(
            lambda x: local_only_baseline(state.models[x], state.data[x], _train_config(cfg, x, t)),
            nodes, width,
        )
    else:
        trained = _map_nodes(
            lambda x: train_local(state.models[x], state.data[x].train, _train_config(cfg, x, t)),
            nodes, width,
        )

    # Phase 2: read-only snapshot; aggregation never sees this round's outputs.
    snapshot: Mapping[int, Model] = MappingProxyType(dict(zip(nodes, trained)))

    node_metrics: List[NodeMetrics]
    if cfg.algorithm == "pfedgame":
        models, node_metrics, traces = _pfedgame_phase(new_state, snapshot, t, cfg, accuracy_fn, width)
        new_state.models = models
        new_state.traces = traces
    elif cfg.algorithm == "fedavg-central":
        sizes = {x: state.data[x].train.n for x in nodes}
        global_model = fedavg_baseline_round(snapshot, sizes)
        total = sum(sizes.values())
        new_state.models = {x: global_model for x in nodes}
        node_metrics = [
            NodeMetrics(node=x, accuracy=0.0, peers=len(nodes), psi_x=sizes[x] / total)
            for x in nodes
        ]
    else:
        new_state.models = dict(snapshot)
        node_metrics = [NodeMetrics(node=x, accuracy=0.0, peers=0, psi_x=1.0) for x in nodes]

    # Metrics on local test shards after replacement.
    accuracies = _map_nodes(
        lambda x: evaluate_accuracy(new_state.models[x], state.data[x].test), nodes, width
    )
    scored = [
        m.model_copy(update={"accuracy": acc}) for m, acc in zip(node_metrics, accuracies)
    ]
    return new_state, RoundMetrics.from_nodes(t, scored)


def run_simulation(cfg: SimConfig, evaluator: Optional[AccuracyFn] = None,
                   workers: Optional[int] = None) -> SimulationResult:
    """Execute cfg.rounds rounds and return metrics, final models, traces and graphs."""
    with timed_operation("run_simulation", algorithm=cfg.algorithm, seed=cfg.master_seed):
        state = init_state(cfg)
        result = SimulationResult(config=cfg)
        logger.info(
            "🚀 Simulation started",
            algorithm=cfg.algorithm,
            nodes=len(state.models),
            fl_rounds=cfg.rounds,
            seed=cfg.master_seed,
        )

        for t in range(cfg.rounds):
            state, metrics = run_round(state, t, cfg, evaluator, workers)
            result.metrics.append(metrics)
            result.traces.extend(state.traces)
            if state.adjacency is not None:
                result.adjacencies[t] = state.adjacency
            logger.info(
                f"📈 Round {t} mean accuracy {metrics.mean_accuracy:.4f}",
                fl_round=t,
                mean_accuracy=metrics.mean_accuracy,
                skipped=sum(1 for m in metrics.nodes if m.skipped),
            )

        result.models = dict(state.models)
        final = result.metrics[-1].mean_accuracy if result.metrics else None
        logger.info("✅ Simulation finished", algorithm=cfg.algorithm, final_mean_accuracy=final)
    return result


def repeat_and_average(cfg: SimConfig, repeats: int, evaluator: Optional[AccuracyFn] = None,
                       workers: Optional[int] = None) -> AveragedMetrics:
    """Run with master seeds seed, seed+1, ... and take element-wise mean and std."""
    if repeats < 1:
        raise ConfigurationError("repeats must be at least 1", config_key="repeats",
                                 config_value=repeats)
    seeds = [cfg.master_seed + i for i in range(repeats)]
    runs = [
        run_simulation(cfg.model_copy(update={"master_seed": seed}), evaluator, workers)
        for seed in seeds
    ]

    rounds: List[RoundSummary] = []
    nodes: List[NodeRoundSummary] = []
    for t in range(cfg.rounds):
        means = np.array([run.metrics[t].mean_accuracy for run in runs])
        rounds.append(RoundSummary(fl_round=t, mean=float(means.mean()), std=float(means.std())))
        per_run = [{m.node: m for m in run.metrics[t].nodes} for run in runs]
        for node in sorted(per_run[0]):
            entries = [by_node[node] for by_node in per_run]
            acc = np.array([e.accuracy for e in entries])
            nodes.append(NodeRoundSummary(
                fl_round=t,
                node=node,
                accuracy=float(acc.mean()),
                accuracy_std=float(acc.std()),
                peers=float(np.mean([e.peers for e in entries])),
                psi_x=float(np.mean([e.psi_x for e in entries])),
                skipped=any(e.skipped for e in entries),
            ))

    return AveragedMetrics(seeds=seeds, rounds=rounds, nodes=nodes, runs=runs)
