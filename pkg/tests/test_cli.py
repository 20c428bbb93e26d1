"""End-to-end tests of the ``coutile`` command line."""

import csv
from pathlib import Path

import pytest

import coutile.main as cli
from coutile.core.error_handlers import EXIT_FAILURE, EXIT_OK, EXIT_USAGE
from coutile.exceptions import ProtocolError
from coutile.main import build_parser, main

SMALL_RUN = [
    "--peers",
    "12",
    "--clients",
    "4",
    "--kappa-max",
    "6",
    "--iterations",
    "3",
    "--malicious-frac",
    "0.25",
    "--seed",
    "7",
]
RUN_FILES = ["fig1.csv", "fig2.csv", "fig3.csv", "iterations.csv", "reputation.csv"]


def _dump(capsys: pytest.CaptureFixture[str], *argv: str) -> dict[str, str]:
    assert main(["dump-config", *argv]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    return dict(line.split("=", 1) for line in lines)


class TestDumpConfig:
    def test_defaults(self, capsys):
        values = _dump(capsys)
        assert values["peers"] == "100"
        assert values["mode"] == "rational"
        assert values["p_forward"] == "0.67"
        assert values["publish_output"] == "false"
        assert list(values)[:3] == ["peers", "clients", "redundancy"]

    def test_flags(self, capsys):
        flags = ["--peers", "20", "--mode", "baseline", "--computation", "tally"]
        values = _dump(capsys, *flags, "--publish-output")
        assert values["peers"] == "20"
        assert values["mode"] == "baseline"
        assert values["publish_output"] == "true"

    def test_reputation_dynamics_flags(self, capsys):
        values = _dump(
            capsys,
            "--kappa-min",
            "20",
            "--punishment",
            "decrement",
            "--opinion-prior",
            "0",
            "--band-below",
            "1.5",
            "--distributed-reputation",
            "--malicious-managers",
        )
        assert values["kappa_min"] == "20"
        assert values["punishment"] == "decrement"
        assert values["band_below"] == "1.5"
        assert values["malicious_managers"] == "true"

    def test_flag_beats_config_file(self, capsys, tmp_path: Path):
        config = tmp_path / "run.conf"
        config.write_text("peers=30\nclients=5\np-forward=0.5\n")
        values = _dump(capsys, "--config", str(config), "--clients", "6")
        assert values["peers"] == "30"
        assert values["clients"] == "6"
        assert values["p_forward"] == "0.5"

    def test_env_is_lowest(self, capsys, monkeypatch):
        monkeypatch.setenv("COUTILE_SEED", "42")
        assert _dump(capsys)["seed"] == "42"
        assert _dump(capsys, "--seed", "3")["seed"] == "3"


class TestUsageErrors:
    def test_constraint_violation_exits_2(self):
        assert main(["dump-config", "--clients", "3"]) == EXIT_USAGE

    def test_missing_config_file_exits_2(self, tmp_path: Path):
        missing = tmp_path / "nope.conf"
        assert main(["dump-config", "--config", str(missing)]) == EXIT_USAGE

    def test_unknown_mode_is_rejected_by_argparse(self):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--mode", "paranoid"])
        assert exc.value.code == 2

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_sweep_workers_must_be_positive(self, tmp_path: Path):
        argv = ["sweep", *SMALL_RUN, "--out", str(tmp_path), "--workers", "0"]
        assert main(argv) == EXIT_USAGE

    def test_bad_fraction_list(self):
        with pytest.raises(SystemExit):
            main(["sweep", "--fracs", "0.1,lots"])


class TestRun:
    def test_writes_run_files(self, tmp_path: Path):
        assert main(["run", *SMALL_RUN, "--out", str(tmp_path)]) == EXIT_OK
        for name in RUN_FILES:
            assert (tmp_path / name).is_file()
        assert not (tmp_path / "trace.csv").exists()
        with (tmp_path / "iterations.csv").open(newline="") as handle:
            assert len(list(csv.DictReader(handle))) == 3 * 4

    def test_runs_are_byte_identical(self, tmp_path: Path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert main(["run", *SMALL_RUN, "--out", str(first)]) == EXIT_OK
        assert main(["run", *SMALL_RUN, "--out", str(second)]) == EXIT_OK
        for name in RUN_FILES:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_trace_switch(self, tmp_path: Path):
        assert main(["run", *SMALL_RUN, "--out", str(tmp_path), "--trace"]) == EXIT_OK
        assert (tmp_path / "trace.csv").is_file()


class TestTraceCommand:
    def test_audit_passes(self, tmp_path: Path):
        assert main(["trace", *SMALL_RUN, "--out", str(tmp_path)]) == EXIT_OK
        with (tmp_path / "trace.csv").open(newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert rows
        assert {row["event"] for row in rows} >= {"hop", "submit"}


class TestSweep:
    def test_writes_fig4(self, tmp_path: Path):
        argv = [
            "sweep",
            *SMALL_RUN,
            "--out",
            str(tmp_path),
            "--fracs",
            "0.0,0.25",
            "--modes",
            "rational,baseline",
            "--seeds",
            "7,8",
        ]
        assert main(argv) == EXIT_OK
        with (tmp_path / "fig4.csv").open(newline="") as handle:
            rows = list(csv.DictReader(handle))
        assert {row["mode"] for row in rows} == {"rational", "baseline"}
        assert {row["malicious_frac"] for row in rows} == {"0.0", "0.25"}
        assert all(0.0 <= float(row["rate"]) <= 1.0 for row in rows)


def test_failures_map_to_exit_1(monkeypatch, tmp_path: Path):
    def broken(*args, **kwargs):
        raise ProtocolError("reverse path broke")

    monkeypatch.setattr(cli, "run_simulation", broken)
    assert main(["run", *SMALL_RUN, "--out", str(tmp_path)]) == EXIT_FAILURE
