"""CSV emitter tests against hand-built metrics."""

import csv
from pathlib import Path

import pytest

from coutile.models.channel import TraceRecord
from coutile.models.enums import ChannelEvent, ClientClass, Mode
from coutile.models.metrics import RequestRecord, RunMetrics, SweepRow
from coutile.services.figures import (
    FIG1_HEADER,
    FIG4_HEADER,
    ITERATIONS_HEADER,
    RATE_HEADER,
    TRACE_HEADER,
    emit_goodness_vs_reputation,
    emit_iterations,
    emit_rate_vs_reputation,
    emit_run,
    emit_sweep,
    emit_trace,
)
from tests.helpers import make_pseudonyms

# (iteration, client, correct)
REQUESTS = [(1, 0, True), (1, 2, False), (2, 0, False), (3, 2, True), (3, 1, True)]


def _read(path: Path) -> list[dict[str, str]]:
    with path.open(encoding="utf-8", newline="") as handle:
        return list(csv.DictReader(handle))


@pytest.fixture(name="metrics")
def metrics_fixture() -> RunMetrics:
    records = [
        RequestRecord(
            iteration=iteration,
            client=client,
            client_reputation=0.25,
            output_correct=correct,
        )
        for iteration, client, correct in REQUESTS
    ]
    return RunMetrics(
        mode=Mode.RATIONAL,
        seed=1,
        malicious_frac=0.25,
        iterations=3,
        goodness=[1.0, 1.0, 0.0, 1.0],
        final_reputation=[0.4, 0.3, 0.1, 0.2],
        records=records,
    )


class TestRunFiles:
    def test_fig1_has_one_row_per_peer(self, metrics: RunMetrics, tmp_path: Path):
        path = emit_goodness_vs_reputation(metrics, tmp_path / "fig1.csv")
        rows = _read(path)
        assert list(rows[0]) == FIG1_HEADER
        assert [row["goodness"] for row in rows] == ["1.0", "1.0", "0.0", "1.0"]
        assert rows[2]["final_reputation"] == "0.1"

    def test_fig2_rates(self, metrics: RunMetrics, tmp_path: Path):
        rows = _read(emit_rate_vs_reputation(metrics, tmp_path / "fig2.csv"))
        assert list(rows[0]) == RATE_HEADER
        by_peer = {row["peer_index"]: row for row in rows}
        assert set(by_peer) == {"0", "1", "2"}
        assert by_peer["0"]["rate"] == "0.5"
        assert by_peer["1"]["requests"] == "1"
        assert by_peer["1"]["rate"] == "1.0"

    def test_fig3_window(self, metrics: RunMetrics, tmp_path: Path):
        rows = _read(emit_rate_vs_reputation(metrics, tmp_path / "fig3.csv", 2))
        by_peer = {row["peer_index"]: row for row in rows}
        assert by_peer["0"]["correct"] == "0"
        assert by_peer["2"]["rate"] == "1.0"

    def test_iterations_booleans(self, metrics: RunMetrics, tmp_path: Path):
        rows = _read(emit_iterations(metrics, tmp_path / "iterations.csv"))
        assert list(rows[0]) == ITERATIONS_HEADER
        assert [row["output_correct"] for row in rows] == [
            "true",
            "false",
            "false",
            "true",
            "true",
        ]

    def test_line_endings(self, metrics: RunMetrics, tmp_path: Path):
        path = emit_iterations(metrics, tmp_path / "iterations.csv")
        data = path.read_bytes()
        assert b"\r\n" not in data
        assert data.endswith(b"\n")
        assert data.splitlines()[0] == ",".join(ITERATIONS_HEADER).encode()

    def test_emit_run_writes_five_files(self, metrics: RunMetrics, tmp_path: Path):
        paths = emit_run(metrics, tmp_path / "out")
        assert sorted(path.name for path in paths) == [
            "fig1.csv",
            "fig2.csv",
            "fig3.csv",
            "iterations.csv",
            "reputation.csv",
        ]
        assert all(path.exists() for path in paths)


class TestSweepFile:
    def test_rows(self, tmp_path: Path):
        rows = [
            SweepRow(
                malicious_frac=0.2,
                mode=Mode.BASELINE,
                client_class=ClientClass.GOOD,
                rate=0.75,
            ),
        ]
        written = _read(emit_sweep(rows, tmp_path / "fig4.csv"))
        assert list(written[0]) == FIG4_HEADER
        assert written == [
            {
                "malicious_frac": "0.2",
                "mode": "baseline",
                "client_class": "good",
                "rate": "0.75",
            }
        ]


class TestTraceFile:
    def test_short_pseudonyms_and_no_message_ids(self, tmp_path: Path):
        carrier, dest = make_pseudonyms(2)
        record = TraceRecord(
            iteration=4,
            event=ChannelEvent.HOP,
            carrier=carrier,
            dest=dest,
            hop_index=1,
            message_id=77,
        )
        rows = _read(emit_trace([record], tmp_path / "trace.csv"))
        assert list(rows[0]) == TRACE_HEADER
        assert rows[0] == {
            "iter": "4",
            "event": "hop",
            "carrier": carrier.short,
            "dest": dest.short,
            "hop_index": "1",
        }
