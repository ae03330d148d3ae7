"""CLI contract: files, exit codes, determinism."""

import json

import pytest

from chainform.cli import main
from chainform.scenario import load_scenario, save_scenario, scenario_to_doc


def test_run_baseline_writes_artifacts(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--scenario", "baseline", "--out", str(out)]) == 0
    assert (out / "trajectory.csv").exists()
    assert (out / "metrics.json").exists()
    assert (out / "figures" / "shapes.png").exists()
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["quiescent"] is True
    rows = (out / "trajectory.csv").read_text().splitlines()
    # Final frame pins the driven point exactly on its target.
    assert rows[-1].startswith(f"{metrics['episodes'][0]['drive_frames'] + 1},28,150,60")


def test_run_svg_output(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--scenario", "baseline", "--out", str(out),
                 "--svg", "--frames-every", "25"]) == 0
    assert (out / "final.svg").exists()
    frames = sorted((out / "frames").glob("frame_*.svg"))
    assert frames, "per-frame SVGs expected with --frames-every"


def test_render_from_trajectory(tmp_path):
    out = tmp_path / "out"
    main(["run", "--scenario", "baseline", "--out", str(out)])
    rendered = tmp_path / "rendered"
    assert main(["render", "--trajectory", str(out / "trajectory.csv"),
                 "--out", str(rendered), "--frames-every", "10"]) == 0
    assert (rendered / "final.svg").exists()
    assert list((rendered / "frames").glob("frame_*.svg"))


def test_exit_1_on_invalid_scenario(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "name": "x", "bogus": true}', encoding="utf-8")
    assert main(["run", "--scenario", str(bad), "--out", str(tmp_path / "o")]) == 1


def test_exit_1_on_missing_scenario(tmp_path):
    assert main(["run", "--scenario", "no-such-scenario",
                 "--out", str(tmp_path / "o")]) == 1


def test_exit_2_on_nonconvergence(tmp_path):
    scenario = load_scenario(
        __import__("chainform.cli", fromlist=["bundled_scenario_path"])
        .bundled_scenario_path("baseline")
    )
    from dataclasses import replace

    starved = replace(scenario, solver=replace(scenario.solver, max_sweeps=2))
    path = tmp_path / "starved.json"
    save_scenario(starved, path)
    assert main(["run", "--scenario", str(path), "--out", str(tmp_path / "o")]) == 2


def test_run_determinism_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["run", "--scenario", "waves-near", "--out", str(out1)])
    main(["run", "--scenario", "waves-near", "--out", str(out2)])
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()


def test_sweep_theta(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--scenario", "theta-sweep", "--out", str(out)]) == 0
    report = json.loads((out / "sweep_report.json").read_text())
    assert report["param"] == "theta"
    assert report["ordering"]["holds"] is True
    for value in report["values"]:
        assert (out / f"theta={value:g}" / "trajectory.csv").exists()
    assert (out / "figures" / "sweep.png").exists()


def test_sweep_single_value_matches_run(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--scenario", "k-sweep", "--out", str(out),
                 "--param", "k", "--values", "20e9"]) == 0
    report = json.loads((out / "sweep_report.json").read_text())
    assert len(report["runs"]) == 1
    assert report["runs"][0]["status"] == "ok"
    assert (out / "k=2e+10" / "trajectory.csv").exists()
