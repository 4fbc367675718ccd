"""Command-line behavior: subcommands, artifacts, exit codes."""

import subprocess
import sys

import pytest

from laserberry.cli import main


def test_verify_tables_ok(capsys):
    assert main(["verify-tables"]) == 0
    out = capsys.readouterr().out
    assert "36 derived values audited" in out
    assert "PASS" in out


def test_verify_tables_tight_tolerance_fails(capsys):
    assert main(["verify-tables", "--tolerance", "0.001"]) == 2
    out = capsys.readouterr().out
    assert "FAIL" in out
    assert "pierce-coarse" in out


def test_optimize_spot_fine(capsys):
    assert main(["optimize-spot"]) == 0
    assert "0.9 mm" in capsys.readouterr().out


def test_optimize_spot_coarse_with_range(capsys):
    assert main(["optimize-spot", "--table", "coarse",
                 "--lo", "0.09", "--hi", "3.79"]) == 0
    assert "0.71 mm" in capsys.readouterr().out


def test_optimize_spot_empty_range_exits_2(capsys):
    assert main(["optimize-spot", "--lo", "2.0", "--hi", "3.0"]) == 2
    assert "error:" in capsys.readouterr().err


def test_localize_bundled(capsys):
    assert main(["localize", "--scenario", "demo_11"]) == 0
    out = capsys.readouterr().out
    assert "localized 11 fruit" in out


def test_localize_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "loc"
    assert main(["localize", "--scenario", "demo_11", "--out", str(out)]) == 0
    capsys.readouterr()
    boxes = (out / "boxes.csv").read_text().splitlines()
    assert boxes[0].startswith("rank,centroid_x_m")
    assert len(boxes) == 12
    assert (out / "clusters.pcd").exists()


def test_localize_from_pcd_files(tmp_path, capsys):
    scene_dir = tmp_path / "scene"
    assert main(["gen-scene", "--scenario", "demo_11",
                 "--out", str(scene_dir)]) == 0
    assert main(["localize", "--scenario", "demo_11",
                 "--cloud1", str(scene_dir / "camera1.pcd"),
                 "--cloud2", str(scene_dir / "camera2.pcd")]) == 0
    assert "localized 11 fruit" in capsys.readouterr().out
    # one cloud without the other is a usage error
    assert main(["localize", "--scenario", "demo_11",
                 "--cloud1", str(scene_dir / "camera1.pcd")]) == 2


def test_gen_scene_truth_rows(tmp_path, capsys):
    out = tmp_path / "scene"
    assert main(["gen-scene", "--scenario", "demo_11", "--out", str(out)]) == 0
    capsys.readouterr()
    rows = (out / "truth.csv").read_text().splitlines()
    assert rows[0].startswith("berry_index,")
    assert len(rows) == 12


def test_simulate_writes_deterministic_metrics(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--scenario", "demo_11", "--out", str(out1)]) == 0
    assert main(["simulate", "--scenario", "demo_11", "--out", str(out2)]) == 0
    capsys.readouterr()
    b1 = (out1 / "metrics.csv").read_bytes()
    b2 = (out2 / "metrics.csv").read_bytes()
    assert b1 == b2
    text = b1.decode()
    assert text.count("\n") == 14   # header + 11 rows + 2 footer comments
    assert "# successes=11 attempted=11" in text


def test_simulate_svg(tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["simulate", "--scenario", "demo_11", "--out", str(out),
                 "--svg"]) == 0
    capsys.readouterr()
    svg = (out / "cycle_times.svg").read_text()
    assert svg.startswith("<svg ")
    assert svg.count("<rect") == 12   # background + 11 bars


def test_seed_override_changes_metrics(tmp_path, capsys):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--scenario", "demo_11", "--out", str(out1)]) == 0
    assert main(["simulate", "--scenario", "demo_11", "--seed", "99",
                 "--out", str(out2)]) == 0
    capsys.readouterr()
    assert (out1 / "metrics.csv").read_bytes() != (out2 / "metrics.csv").read_bytes()


def test_missing_scenario_exits_1(capsys):
    assert main(["simulate", "--scenario", "/nonexistent.ini"]) == 1
    assert "error:" in capsys.readouterr().err


def test_broken_scenario_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[scenario]\nseed = 1\nbogus_key = 3\n")
    assert main(["simulate", "--scenario", str(bad)]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_broken_pcd_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.pcd"
    bad.write_text("VERSION 0.7\nnot a header\n")
    assert main(["localize", "--scenario", "demo_11",
                 "--cloud1", str(bad), "--cloud2", str(bad)]) == 1
    assert "error:" in capsys.readouterr().err


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2


def test_console_script_end_to_end():
    proc = subprocess.run([sys.executable, "-m", "laserberry", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "laserberry" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "laserberry", "verify-tables"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout
