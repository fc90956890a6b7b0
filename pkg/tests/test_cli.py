"""Command-line interface: subcommands, overrides, exit codes.

Exit convention: 0 success, 1 configuration error (message is
line-anchored when a config file is at fault), 2 runtime failure.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import MINI_AC, MINI_BURGERS
from ensf.cli import main


def run_truth(cfg_path):
    rc = main(["truth", "--config", str(cfg_path)])
    assert rc == 0
    return rc


class TestTruthCmd:
    def test_writes_trajectory_and_manifest(self, write_cfg, tmp_path, capsys):
        p = write_cfg(MINI_BURGERS)
        assert main(["truth", "--config", str(p)]) == 0
        troot = tmp_path / "run_out" / "truth"
        assert (troot / "manifest.json").is_file()
        assert (troot / "initial.ensf1").is_file()
        out = capsys.readouterr().out
        assert str(troot) in out

    def test_out_override_redirects(self, write_cfg, tmp_path):
        p = write_cfg(MINI_BURGERS)
        alt = tmp_path / "elsewhere"
        assert main(["truth", "--config", str(p), "--out", str(alt)]) == 0
        assert (alt / "truth" / "manifest.json").is_file()
        assert not (tmp_path / "run_out").exists()

    def test_seed_override_changes_noisy_truth(self, write_cfg, tmp_path):
        # AC truth mobility noise is seeded, so the trajectory must move
        p = write_cfg(MINI_AC)
        a = tmp_path / "a"
        b = tmp_path / "b"
        assert main(["truth", "--config", str(p), "--out", str(a)]) == 0
        assert main(["truth", "--config", str(p), "--out", str(b), "--seed", "7"]) == 0
        csv_a = (a / "truth" / "diagnostics.csv").read_bytes()
        csv_b = (b / "truth" / "diagnostics.csv").read_bytes()
        assert csv_a != csv_b


class TestAssimilateCmd:
    def test_both_filters_produce_runs(self, write_cfg, tmp_path):
        p = write_cfg(MINI_BURGERS)
        run_truth(p)
        assert main(["assimilate", "--config", str(p)]) == 0
        assert main(["assimilate", "--config", str(p), "--filter", "letkf"]) == 0
        for method in ("ensf", "letkf"):
            man = json.loads((tmp_path / "run_out" / method / "manifest.json").read_text())
            assert man["method"] == method

    def test_missing_truth_is_runtime_error(self, write_cfg, capsys):
        p = write_cfg(MINI_BURGERS)
        rc = main(["assimilate", "--config", str(p)])
        assert rc == 2
        assert "truth" in capsys.readouterr().err

    def test_truth_flag_points_elsewhere(self, write_cfg, tmp_path):
        p = write_cfg(MINI_BURGERS)
        run_truth(p)
        out2 = tmp_path / "second"
        rc = main([
            "assimilate", "--config", str(p), "--out", str(out2),
            "--truth", str(tmp_path / "run_out" / "truth"),
        ])
        assert rc == 0
        assert (out2 / "ensf" / "diagnostics.csv").is_file()

    def test_obs_fraction_override_triggers_inpainting(self, write_cfg, tmp_path):
        p = write_cfg(MINI_BURGERS)
        run_truth(p)
        rc = main(["assimilate", "--config", str(p), "--obs-fraction", "0.1"])
        assert rc == 0
        man = json.loads((tmp_path / "run_out" / "ensf" / "manifest.json").read_text())
        assert man["inpainted"] is True

    def test_bad_obs_fraction_is_config_error(self, write_cfg, capsys):
        p = write_cfg(MINI_BURGERS)
        rc = main(["assimilate", "--config", str(p), "--obs-fraction", "1.5"])
        assert rc == 1
        assert "fraction" in capsys.readouterr().err


class TestDiagnoseCmd:
    def test_prints_stored_csv(self, write_cfg, tmp_path, capsys):
        p = write_cfg(MINI_BURGERS)
        run_truth(p)
        assert main(["assimilate", "--config", str(p)]) == 0
        capsys.readouterr()
        run_dir = tmp_path / "run_out" / "ensf"
        assert main(["diagnose", str(run_dir)]) == 0
        out = capsys.readouterr().out
        assert out == (run_dir / "diagnostics.csv").read_text()

    def test_missing_run_dir(self, tmp_path, capsys):
        rc = main(["diagnose", str(tmp_path / "nothing_here")])
        assert rc == 2
        assert capsys.readouterr().err != ""


class TestCompareCmd:
    def test_tabulates_two_runs(self, write_cfg, tmp_path, capsys):
        p = write_cfg(MINI_BURGERS)
        run_truth(p)
        assert main(["assimilate", "--config", str(p)]) == 0
        assert main(["assimilate", "--config", str(p), "--filter", "letkf"]) == 0
        capsys.readouterr()
        rc = main([
            "compare",
            str(tmp_path / "run_out" / "ensf"),
            str(tmp_path / "run_out" / "letkf"),
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "ensf" in out and "letkf" in out
        assert "rmse" in out and "final" in out


class TestErrors:
    def test_config_error_is_line_anchored(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text(MINI_BURGERS.replace("kind = burgers", "kind = burgers\nbogus = 1"))
        rc = main(["truth", "--config", str(bad)])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("%s:" % bad)
        # the anchor is path:line:
        rest = err[len(str(bad)) + 1:]
        assert rest.split(":", 1)[0].isdigit()

    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["truth", "--config", str(tmp_path / "absent.cfg")])
        assert rc == 1
        assert capsys.readouterr().err != ""

    def test_unknown_subcommand_exits_via_argparse(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "ensf", "--help"],
        capture_output=True,
        text=True,
        cwd=str(tmp_path),
    )
    assert proc.returncode == 0
    assert "truth" in proc.stdout and "assimilate" in proc.stdout
