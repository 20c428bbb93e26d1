"""
CSV emitters for the figure data and the run dumps.

Every file is UTF-8 with LF line endings and a fixed header; numbers are
written with ``repr`` so equal runs produce byte-identical files.
"""

import csv
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any

from coutile.models.channel import TraceRecord
from coutile.models.metrics import RunMetrics, SweepRow
from coutile.utils.logger import logger

FIG1_HEADER = ["peer_index", "goodness", "final_reputation"]
RATE_HEADER = ["peer_index", "final_reputation", "requests", "correct", "rate"]
FIG4_HEADER = ["malicious_frac", "mode", "client_class", "rate"]
REPUTATION_HEADER = ["peer_index", "goodness", "global_reputation"]
ITERATIONS_HEADER = ["iteration", "client_index", "client_reputation", "output_correct"]
TRACE_HEADER = ["iter", "event", "carrier", "dest", "hop_index"]


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    path: Path, header: Sequence[str], rows: Iterable[Mapping[str, Any]]
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(header), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(value) for key, value in row.items()})
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def emit_goodness_vs_reputation(metrics: RunMetrics, path: Path) -> Path:
    """fig1.csv: one row per peer."""
    return write_csv(
        path,
        FIG1_HEADER,
        (
            {
                "peer_index": peer,
                "goodness": goodness,
                "final_reputation": metrics.final_reputation[peer],
            }
            for peer, goodness in enumerate(metrics.goodness)
        ),
    )


def emit_rate_vs_reputation(
    metrics: RunMetrics, path: Path, window: int | None = None
) -> Path:
    """
    fig2.csv (whole run) or fig3.csv (last ``window`` iterations).

    Peers without requests in the window are omitted.
    """
    return write_csv(
        path,
        RATE_HEADER,
        (
            {
                "peer_index": rate.peer_index,
                "final_reputation": rate.final_reputation,
                "requests": rate.requests,
                "correct": rate.correct,
                "rate": rate.rate,
            }
            for rate in metrics.peer_rates(window)
        ),
    )


def emit_sweep(rows: Iterable[SweepRow], path: Path) -> Path:
    """fig4.csv: one row per (malicious_frac, mode, client class) with requests."""
    return write_csv(
        path,
        FIG4_HEADER,
        (
            {
                "malicious_frac": row.malicious_frac,
                "mode": row.mode.value,
                "client_class": row.client_class.value,
                "rate": row.rate,
            }
            for row in rows
        ),
    )


def emit_reputation(metrics: RunMetrics, path: Path) -> Path:
    return write_csv(
        path,
        REPUTATION_HEADER,
        (
            {
                "peer_index": peer,
                "goodness": goodness,
                "global_reputation": metrics.final_reputation[peer],
            }
            for peer, goodness in enumerate(metrics.goodness)
        ),
    )


def emit_iterations(metrics: RunMetrics, path: Path) -> Path:
    return write_csv(
        path,
        ITERATIONS_HEADER,
        (
            {
                "iteration": record.iteration,
                "client_index": record.client,
                "client_reputation": record.client_reputation,
                "output_correct": record.output_correct,
            }
            for record in metrics.records
        ),
    )


def emit_trace(records: Iterable[TraceRecord], path: Path) -> Path:
    """trace.csv; pseudonyms appear as their short hex form, message ids never."""
    return write_csv(
        path,
        TRACE_HEADER,
        (
            {
                "iter": record.iteration,
                "event": record.event.value,
                "carrier": record.carrier.short,
                "dest": record.dest.short,
                "hop_index": record.hop_index,
            }
            for record in records
        ),
    )


def emit_run(
    metrics: RunMetrics, output_dir: Path, window: int = 100
) -> list[Path]:
    """All single-run files: fig1-3, reputation.csv and iterations.csv."""
    return [
        emit_goodness_vs_reputation(metrics, output_dir / "fig1.csv"),
        emit_rate_vs_reputation(metrics, output_dir / "fig2.csv"),
        emit_rate_vs_reputation(metrics, output_dir / "fig3.csv", window),
        emit_reputation(metrics, output_dir / "reputation.csv"),
        emit_iterations(metrics, output_dir / "iterations.csv"),
    ]
