"""Command-line surface: exit codes, printed values, and artifact files."""

import json
from pathlib import Path

import pytest

from thermohaptic.cli import main
from thermohaptic.experiments.metrics import write_manip_csv, write_thermal_csv
from thermohaptic.experiments.sessions import ManipTrialRecord, ThermalTrialRecord

FORCE_FIXTURE = str(Path(__file__).resolve().parent.parent / "paper_force.csv")


def test_help_exits_zero() -> None:
    with pytest.raises(SystemExit) as wrapper:
        main(["--help"])
    assert wrapper.value.code == 0


def test_usage_problems_exit_one(capsys) -> None:
    assert main([]) == 1
    assert main(["simulate-force", "--warp"]) == 1
    assert main(["simulate-thermal", "--contact", "perhaps"]) == 1
    assert main(["experiment-thermal"]) == 1  # experiments require --seed
    assert main(["experiment-manip", "--seed", "3", "--condition", "XX"]) == 1
    err = capsys.readouterr().err
    assert "usage error" in err


def test_runtime_problems_exit_two(capsys) -> None:
    assert main(["simulate-force", "--config", "/nonexistent.cfg"]) == 2
    assert main(["fit-force", "--input", "/nonexistent.csv"]) == 2
    assert "error:" in capsys.readouterr().err


def test_fit_force_reproduces_the_bench_pad(tmp_path, capsys) -> None:
    rc = main(
        ["fit-force", "--input", FORCE_FIXTURE, "--out-dir", str(tmp_path)]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "force at 50 kPa = 8.930 N" in out
    fit = json.loads((tmp_path / "force_fit.json").read_text(encoding="utf-8"))
    assert fit["clearance_grid"] == [0.0, 1.0, 2.0, 3.0]
    assert fit["slope_per_clearance"][0] == pytest.approx(0.1786, abs=1e-9)
    assert fit["force_at_50_kpa"]["3"] == pytest.approx(6.6, abs=1e-6)


def test_simulate_force_prints_anchors_and_ratio(tmp_path, capsys) -> None:
    rc = main(["simulate-force", "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "8.930" in out
    assert "force ratio 2 mm / 0 mm = 0.8623" in out
    header = (
        (tmp_path / "force_curves.csv").read_text(encoding="utf-8").splitlines()[0]
    )
    assert header == "pressure_kpa,force_n,clearance_mm"


def test_simulate_thermal_writes_trace_and_features(tmp_path, capsys) -> None:
    rc = main(
        [
            "simulate-thermal",
            "--contact",
            "false",
            "--out-dir",
            str(tmp_path),
            "--format",
            "json",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    for name in (
        "time_to_target_s",
        "avg_heating_rate_c_per_s",
        "peak_heating_rate_c_per_s",
        "cooling_time_to_baseline_s",
        "max_cooling_rate_c_per_s",
    ):
        assert f"{name}=" in out
    feats = json.loads(
        (tmp_path / "thermal_features.json").read_text(encoding="utf-8")
    )
    assert 7.0 <= feats["time_to_target"] <= 9.6
    trace_lines = (
        (tmp_path / "thermal_trace.csv").read_text(encoding="utf-8").splitlines()
    )
    assert trace_lines[0] == "time_s,temp_c"
    assert len(trace_lines) > 900


def test_simulate_thermal_is_byte_deterministic(tmp_path) -> None:
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    assert main(["simulate-thermal", "--out-dir", str(a)]) == 0
    assert main(["simulate-thermal", "--out-dir", str(b)]) == 0
    assert (a / "thermal_trace.csv").read_bytes() == (
        b / "thermal_trace.csv"
    ).read_bytes()


def test_plot_renders_every_csv_kind(tmp_path, capsys) -> None:
    assert main(["simulate-force", "--out-dir", str(tmp_path)]) == 0

    thermal_rows = [
        ThermalTrialRecord(
            trial=i,
            stimulus=s,
            response=s,
            steady_time_s=10.0,
            delay_s=1.5,
            response_time_s=11.5,
            felt_temp_c=40.0,
        )
        for i, s in enumerate(("cool", "warm", "hot"))
    ]
    write_thermal_csv(tmp_path / "thermal_trials.csv", thermal_rows)

    manip_rows = [
        ManipTrialRecord(
            trial=i,
            condition="haptic",
            status="success",
            duration_s=8.0,
            mean_indentation_mm=5.0 + i,
            indentation_samples=100,
            commanded_depth_mm=6.4,
        )
        for i in range(3)
    ]
    write_manip_csv(tmp_path / "manip_trials.csv", manip_rows)

    trace = tmp_path / "thermal_trace.csv"
    trace.write_text(
        "time_s,temp_c\n0.000000,25.000000\n1.000000,30.000000\n"
        "2.000000,35.000000\n",
        encoding="utf-8",
    )

    rc = main(
        [
            "plot",
            str(trace),
            str(tmp_path / "force_curves.csv"),
            str(tmp_path / "thermal_trials.csv"),
            str(tmp_path / "manip_trials.csv"),
            "--out-dir",
            str(tmp_path),
        ]
    )
    assert rc == 0
    capsys.readouterr()
    for stem in ("thermal_trace", "force_curves", "thermal_trials", "manip_trials"):
        svg = (tmp_path / f"{stem}.svg").read_text(encoding="utf-8")
        assert svg.startswith("<svg") or "<svg" in svg[:200]


def test_plot_rejects_unknown_headers(tmp_path, capsys) -> None:
    weird = tmp_path / "weird.csv"
    weird.write_text("alpha,beta\n1,2\n", encoding="utf-8")
    assert main(["plot", str(weird), "--out-dir", str(tmp_path)]) == 2
    assert "unrecognized" in capsys.readouterr().err


def test_fit_thermal_inputs_must_come_in_pairs(tmp_path, capsys) -> None:
    rc = main(
        ["fit-thermal", "--input-unloaded", FORCE_FIXTURE, "--out-dir", str(tmp_path)]
    )
    assert rc == 1
    assert "usage error" in capsys.readouterr().err


def test_serve_rejects_a_bad_clock(capsys) -> None:
    assert main(["serve", "--clock", "warp"]) == 2
    assert "clock" in capsys.readouterr().err


def test_experiment_thermal_artifacts(tmp_path, capsys) -> None:
    rc = main(
        ["experiment-thermal", "--seed", "5", "--out-dir", str(tmp_path)]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "overall_accuracy=" in out
    trials = (tmp_path / "thermal_trials_seed5.csv").read_text(encoding="utf-8")
    assert trials.splitlines()[0].startswith("trial,stimulus,response")
    assert len(trials.splitlines()) == 19
    summary = json.loads(
        (tmp_path / "thermal_summary_seed5.json").read_text(encoding="utf-8")
    )
    assert summary["trials"] == 18
    assert 0.0 <= summary["overall_accuracy"] <= 1.0


def test_experiment_manip_artifacts(tmp_path, capsys) -> None:
    rc = main(["experiment-manip", "--seed", "5", "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "success_rate=" in out
    summary = json.loads(
        (tmp_path / "manip_summary_seed5_HF.json").read_text(encoding="utf-8")
    )
    assert summary["condition"] == "haptic"
    assert summary["trials"] == 15
    trials = (tmp_path / "manip_trials_seed5_HF.csv").read_text(encoding="utf-8")
    assert len(trials.splitlines()) == 16
