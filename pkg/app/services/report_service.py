"""Run outputs: metric/trace/edge CSVs, JSON summaries, checkpoints and comparison tables."""

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

from app.models.simulation import AveragedMetrics, SimulationResult
from app.services.topology_service import export_edges
from app.services.training_service import save_checkpoint
from app.utils.errors import OutputError
from app.utils.logging import StructuredLogger

logger = StructuredLogger("report_service")

METRICS_HEADER = ["fl_round", "node", "acc", "peers", "psi_x", "skipped"]
TRACES_HEADER = ["fl_round", "node", "game_round", "psi_x", "candidate_acc", "accepted"]
EDGES_HEADER = ["t", "node_a", "node_b", "weight"]

PathLike = Union[str, Path]


def ensure_writable(directory: PathLike) -> Path:
    """Create the directory and prove a file can be written there."""
    target = Path(directory)
    try:
        target.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=target, prefix=".probe-", delete=True):
            pass
    except OSError as e:
        raise OutputError(f"Output directory is not writable: {e}", path=str(target)) from e
    return target


def write_atomic(path: PathLike, text: str) -> Path:
    """Write to a sibling temp file, then rename over the target."""
    target = Path(path)
    tmp_name: Optional[str] = None
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except OSError as e:
        if tmp_name is not None and os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise OutputError(f"Failed to write {target.name}: {e}", path=str(target)) from e
    return target


def _csv_text(header: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(header), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def _flag(value: bool) -> str:
    return "true" if value else "false"


def metrics_rows(result: SimulationResult) -> List[Dict[str, Any]]:
    return [
        {
            "fl_round": rm.fl_round,
            "node": m.node,
            "acc": repr(m.accuracy),
            "peers": m.peers,
            "psi_x": repr(m.psi_x),
            "skipped": _flag(m.skipped),
        }
        for rm in result.metrics
        for m in rm.nodes
    ]


def averaged_metrics_rows(averaged: AveragedMetrics) -> List[Dict[str, Any]]:
    return [
        {
            "fl_round": s.fl_round,
            "node": s.node,
            "acc": repr(s.accuracy),
            "peers": repr(s.peers),
            "psi_x": repr(s.psi_x),
            "skipped": _flag(s.skipped),
        }
        for s in averaged.nodes
    ]


def write_metrics(path: PathLike, rows: Iterable[Mapping[str, Any]]) -> Path:
    """`fl_round,node,acc,peers,psi_x,skipped`, one row per (round, node)."""
    return write_atomic(path, _csv_text(METRICS_HEADER, rows))


def write_traces(path: PathLike, result: SimulationResult) -> Path:
    rows = (
        {
            "fl_round": r.fl_round,
            "node": r.node,
            "game_round": r.game_round,
            "psi_x": repr(r.psi_x),
            "candidate_acc": repr(r.candidate_acc),
            "accepted": _flag(r.accepted),
        }
        for r in result.traces
    )
    return write_atomic(path, _csv_text(TRACES_HEADER, rows))


def write_edges(path: PathLike, result: SimulationResult) -> Path:
    lines = [",".join(EDGES_HEADER)]
    for t in sorted(result.adjacencies):
        lines.extend(export_edges(t, result.adjacencies[t]))
    return write_atomic(path, "\n".join(lines) + "\n")


def build_summary(config: Mapping[str, Any], rounds: Sequence[Mapping[str, Any]],
                  wall_time: Optional[float], repeats: int = 1) -> Dict[str, Any]:
    return {
        "config": dict(config),
        "repeats": repeats,
        "rounds": [dict(r) for r in rounds],
        "final_mean_accuracy": rounds[-1]["mean"] if rounds else None,
        "wall_time_seconds": wall_time,
    }


def summary_for_run(result: SimulationResult, wall_time: Optional[float]) -> Dict[str, Any]:
    rounds = [{"fl_round": m.fl_round, "mean": m.mean_accuracy, "std": 0.0} for m in result.metrics]
    return build_summary(result.config.to_flat(), rounds, wall_time)


def summary_for_repeats(averaged: AveragedMetrics, config: Mapping[str, Any],
                        wall_time: Optional[float]) -> Dict[str, Any]:
    summary = build_summary(config, [r.model_dump() for r in averaged.rounds], wall_time,
                            averaged.repeats)
    summary["seeds"] = list(averaged.seeds)
    return summary


def write_summary(path: PathLike, summary: Mapping[str, Any]) -> Path:
    return write_atomic(path, json.dumps(summary, indent=2, sort_keys=False) + "\n")


def write_checkpoints(directory: PathLike, result: SimulationResult) -> List[Path]:
    """One `node_<id>.pvec` per node."""
    target = Path(directory)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputError(f"Cannot create checkpoint directory: {e}", path=str(target)) from e
    paths = []
    for node in sorted(result.models):
        path = target / f"node_{node}.pvec"
        save_checkpoint(result.models[node], path)
        paths.append(path)
    return paths


def write_run_outputs(output_dir: PathLike, result: SimulationResult,
                      averaged: Optional[AveragedMetrics] = None,
                      wall_time: Optional[float] = None) -> Dict[str, Path]:
    """Everything `pfedgame run` leaves behind.

    With repeats, metrics and summary are averaged; traces, edges and checkpoints
    come from the first repeat.
    """
    directory = ensure_writable(output_dir)
    if averaged is not None and averaged.repeats > 1:
        metrics = averaged_metrics_rows(averaged)
        summary = summary_for_repeats(averaged, result.config.to_flat(), wall_time)
    else:
        metrics = metrics_rows(result)
        summary = summary_for_run(result, wall_time)

    written = {
        "metrics": write_metrics(directory / "metrics.csv", metrics),
        "summary": write_summary(directory / "summary.json", summary),
        "traces": write_traces(directory / "traces.csv", result),
        "edges": write_edges(directory / "edges.csv", result),
    }
    write_checkpoints(directory / "checkpoints", result)
    written["checkpoints"] = directory / "checkpoints"
    logger.info("💾 Run outputs written", output_dir=str(directory), files=len(written))
    return written


def format_table(rows: Mapping[str, Mapping[str, float]], columns: Sequence[str],
                 with_average: bool = True) -> str:
    """Aligned text table: one row per algorithm, one column per regime."""
    header = ["algorithm", *columns] + (["average"] if with_average else [])
    body: List[List[str]] = []
    for name, cells in rows.items():
        values = [cells[c] for c in columns]
        line = [name] + [f"{v:.4f}" for v in values]
        if with_average:
            line.append(f"{sum(values) / len(values):.4f}" if values else "")
        body.append(line)

    widths = [max(len(r[i]) for r in [header, *body]) for i in range(len(header))]

    def render(cells: List[str]) -> str:
        first = cells[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(cells[1:], widths[1:])]
        return "  ".join([first, *rest])

    return "\n".join([render(header), "  ".join("-" * w for w in widths), *map(render, body)])


def write_comparison(path: PathLike, rows: Mapping[str, Mapping[str, float]],
                     columns: Sequence[str]) -> Path:
    """`algorithm,<regime>...,average` with final-round mean accuracies."""
    header = ["algorithm", *columns, "average"]
    records = []
    for name, cells in rows.items():
        values = [cells[c] for c in columns]
        record: Dict[str, Any] = {"algorithm": name, **{c: repr(cells[c]) for c in columns}}
        record["average"] = repr(sum(values) / len(values)) if values else ""
        records.append(record)
    return write_atomic(path, _csv_text(header, records))
