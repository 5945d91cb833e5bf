"""Tests for run outputs and comparison tables."""

import csv
import json
import os

import pytest

from app.services.report_service import (
    EDGES_HEADER,
    METRICS_HEADER,
    TRACES_HEADER,
    ensure_writable,
    format_table,
    write_atomic,
    write_comparison,
    write_run_outputs,
)
from app.services.simulation_service import repeat_and_average, run_simulation
from app.services.training_service import load_checkpoint
from app.utils.errors import OutputError


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


@pytest.fixture
def small_result(small_config):
    return run_simulation(small_config)


class TestEnsureWritable:
    def test_creates_directory(self, tmp_path):
        target = ensure_writable(tmp_path / "a" / "b")
        assert target.is_dir()
        assert list(target.iterdir()) == []

    def test_path_is_a_file(self, tmp_path):
        blocker = tmp_path / "taken"
        blocker.write_text("x")
        with pytest.raises(OutputError):
            ensure_writable(blocker / "run")

    @pytest.mark.skipif(os.name != "posix" or os.geteuid() == 0, reason="needs POSIX permissions")
    def test_read_only_directory(self, tmp_path):
        locked = tmp_path / "locked"
        locked.mkdir()
        locked.chmod(0o500)
        try:
            with pytest.raises(OutputError):
                ensure_writable(locked)
        finally:
            locked.chmod(0o700)


class TestWriteAtomic:
    def test_replaces_content(self, tmp_path):
        path = tmp_path / "out.txt"
        write_atomic(path, "one\n")
        write_atomic(path, "two\n")
        assert path.read_text() == "two\n"
        assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]

    def test_failure_leaves_nothing(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OutputError):
            write_atomic(blocker / "out.txt", "data")


class TestRunOutputs:
    """Files written by a single run."""

    def test_files_present(self, tmp_path, small_result):
        written = write_run_outputs(tmp_path, small_result, wall_time=1.5)
        assert set(written) == {"metrics", "summary", "traces", "edges", "checkpoints"}
        assert sorted(p.name for p in (tmp_path / "checkpoints").iterdir()) == [
            f"node_{i}.pvec" for i in range(4)
        ]

    def test_metrics_csv(self, tmp_path, small_result):
        write_run_outputs(tmp_path, small_result)
        rows = read_rows(tmp_path / "metrics.csv")
        assert list(rows[0]) == METRICS_HEADER
        assert len(rows) == 3 * 4
        assert {r["skipped"] for r in rows} <= {"true", "false"}
        first = small_result.metrics[0].nodes[0]
        assert float(rows[0]["acc"]) == first.accuracy

    def test_summary_json(self, tmp_path, small_result):
        write_run_outputs(tmp_path, small_result, wall_time=2.0)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["config"] == small_result.config.to_flat()
        assert summary["repeats"] == 1
        assert summary["wall_time_seconds"] == 2.0
        assert summary["final_mean_accuracy"] == small_result.metrics[-1].mean_accuracy
        assert [r["fl_round"] for r in summary["rounds"]] == [0, 1, 2]

    def test_traces_and_edges(self, tmp_path, small_result):
        write_run_outputs(tmp_path, small_result)
        traces = read_rows(tmp_path / "traces.csv")
        # three rounds, four nodes, five game rounds each
        assert len(traces) == len(small_result.traces) == 3 * 4 * 5
        assert list(traces[0]) == TRACES_HEADER
        edges = (tmp_path / "edges.csv").read_text().splitlines()
        assert edges[0] == ",".join(EDGES_HEADER)
        assert len(edges) == 1 + 3 * 6

    def test_checkpoints_round_trip(self, tmp_path, small_result):
        write_run_outputs(tmp_path, small_result)
        assert load_checkpoint(tmp_path / "checkpoints" / "node_2.pvec") == small_result.models[2]

    def test_averaged_outputs(self, tmp_path, small_config):
        averaged = repeat_and_average(small_config, 2)
        write_run_outputs(tmp_path, averaged.runs[0], averaged)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["repeats"] == 2
        assert summary["seeds"] == [11, 12]
        assert summary["final_mean_accuracy"] == averaged.rounds[-1].mean
        rows = read_rows(tmp_path / "metrics.csv")
        assert float(rows[0]["acc"]) == averaged.nodes[0].accuracy


class TestComparisonTable:
    ROWS = {"pfedgame": {"extreme": 0.9, "severe": 0.8}, "local-only": {"extreme": 0.7, "severe": 0.6}}

    def test_format(self):
        lines = format_table(self.ROWS, ["extreme", "severe"]).splitlines()
        assert lines[0].split() == ["algorithm", "extreme", "severe", "average"]
        assert set(lines[1].replace(" ", "")) == {"-"}
        assert lines[2].split() == ["pfedgame", "0.9000", "0.8000", "0.8500"]
        assert lines[3].split() == ["local-only", "0.7000", "0.6000", "0.6500"]

    def test_columns_aligned(self):
        lines = format_table(self.ROWS, ["extreme", "severe"]).splitlines()
        assert len({len(line) for line in lines}) == 1

    def test_without_average(self):
        header = format_table(self.ROWS, ["extreme"], with_average=False).splitlines()[0]
        assert header.split() == ["algorithm", "extreme"]

    def test_csv(self, tmp_path):
        path = write_comparison(tmp_path / "compare.csv", self.ROWS, ["extreme", "severe"])
        rows = read_rows(path)
        assert list(rows[0]) == ["algorithm", "extreme", "severe", "average"]
        assert rows[1]["algorithm"] == "local-only"
        assert float(rows[1]["average"]) == pytest.approx(0.65)
