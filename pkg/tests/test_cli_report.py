import csv
import filecmp
import json

import pytest

from solitonlab import bryant, cli, report
from solitonlab.report import ConfigError, SuiteConfig


FAST_CONFIG = {
    "r_max": 20.0,
    "level_max": 15.0,
    "level_count": 40,
    "mesh_sigma": 24,
    "mesh_theta": 12,
    "pick_jmax": 4,
}


@pytest.fixture(scope="module")
def fast_config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "fast.json"
    path.write_text(json.dumps(FAST_CONFIG))
    return str(path)


@pytest.fixture(scope="module")
def profile_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("prof") / "profile.json"
    assert cli.main(["bryant", "--rmax", "20", "--out", str(path)]) == 0
    return str(path)


class TestSuiteConfig:
    def test_defaults_valid(self):
        SuiteConfig()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config keys"):
            SuiteConfig.from_json({"r_maximum": 50.0})

    def test_bad_values_rejected(self):
        for bad in ({"r_max": 5.0}, {"tol": 1e-2}, {"eps": 0.5},
                    {"rhat": 1.5}, {"mesh_sigma": 2},
                    {"window": [100.0, 50.0]}):
            with pytest.raises(ConfigError):
                SuiteConfig.from_json(bad)

    def test_window_coerced_to_tuple(self):
        cfg = SuiteConfig.from_json({"window": [10.0, 40.0]})
        assert cfg.window == (10.0, 40.0)


class TestBryantCommand:
    def test_profile_loadable(self, profile_path):
        prof = bryant.SolitonProfile.load(profile_path)
        assert prof.r_max == 20.0
        assert prof.drift <= 1e-9

    def test_seed_radius_flag(self, tmp_path):
        out = tmp_path / "p.json"
        code = cli.main(["bryant", "--rmax", "15", "--eps-seed", "5e-4",
                         "--out", str(out)])
        assert code == 0
        assert out.exists()


class TestLevelsCommand:
    def test_csv_schema(self, profile_path, tmp_path):
        out = tmp_path / "levels.csv"
        code = cli.main(["levels", "--profile", profile_path, "--min", "1",
                         "--max", "15", "--count", "10", "--out", str(out)])
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["lambda", "r", "area", "diameter", "grad_norm",
                           "detII_int", "km_int", "volume", "R",
                           "R_times_lambda"]
        assert len(rows) == 11
        assert float(rows[1][0]) == pytest.approx(1.0)

    def test_log_spacing(self, profile_path, tmp_path):
        out = tmp_path / "levels.csv"
        code = cli.main(["levels", "--profile", profile_path, "--min", "1",
                         "--max", "10", "--count", "5", "--spacing", "log",
                         "--out", str(out)])
        assert code == 0
        with open(out, newline="") as fh:
            lams = [float(r[0]) for r in list(csv.reader(fh))[1:]]
        ratios = [b / a for a, b in zip(lams, lams[1:])]
        assert ratios[0] == pytest.approx(ratios[-1], rel=1e-6)


class TestVerifyCommand:
    def test_list_check_ids(self, capsys):
        assert cli.main(["verify", "--list"]) == 0
        out = capsys.readouterr().out.split()
        assert "conserved-drift" in out
        assert len(out) == len(report.check_ids())

    def test_passing_subset_exit_zero(self, capsys):
        code = cli.main(["verify", "cylinder-slices", "potential-family"])
        assert code == 0
        out = capsys.readouterr().out
        assert "[PASS] cylinder-slices" in out
        assert "[PASS] potential-family" in out

    def test_failing_check_exit_one(self, capsys):
        code = cli.main(["verify", "diameter-ratio-terminal"])
        assert code == 1
        assert "[FAIL] diameter-ratio-terminal" in capsys.readouterr().out

    def test_unknown_check_id_exit_two(self, capsys):
        assert cli.main(["verify", "no-such-check"]) == 2
        assert "config error" in capsys.readouterr().err

    def test_short_run_degrades_to_measured_only(self, fast_config_path,
                                                 capsys):
        code = cli.main(["verify", "--config", fast_config_path])
        assert code == 0
        out = capsys.readouterr().out
        assert "[MEAS]" in out
        assert "[FAIL]" not in out


class TestConfigErrors:
    def test_missing_config_file(self, capsys):
        assert cli.main(["verify", "--config", "/no/such/file.json"]) == 2

    def test_malformed_json(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert cli.main(["verify", "--config", str(bad)]) == 2

    def test_unknown_key(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"bogus": 1}))
        assert cli.main(["verify", "--config", str(bad)]) == 2

    def test_cli_override_invalid(self, capsys):
        assert cli.main(["verify", "--rmax", "3"]) == 2


@pytest.fixture(scope="module")
def outdirs(fast_config_path, tmp_path_factory):
    dirs = []
    for name in ("run1", "run2"):
        out = tmp_path_factory.mktemp("rep") / name
        code = cli.main(["report", "--config", fast_config_path,
                         "--out", str(out)])
        assert code == 0
        dirs.append(out)
    return dirs


class TestReportCommand:
    def test_artifacts_written(self, outdirs):
        out = outdirs[0]
        names = {p.name for p in out.iterdir()}
        expected = {"report.json"} | {
            f"{stem}.{ext}"
            for stem in ("levels", "growth", "angles", "slices", "pick")
            for ext in ("csv", "png")}
        assert expected <= names

    def test_report_json_schema(self, outdirs):
        data = json.loads((outdirs[0] / "report.json").read_text())
        assert set(data) == {"config", "checks", "summary"}
        assert data["summary"]["total"] == len(data["checks"])
        assert data["summary"]["failed"] == 0
        for chk in data["checks"]:
            assert chk["runtime_ms"] == 0
            assert chk["status"] in {"pass", "fail", "measured-only"}

    def test_runs_byte_identical(self, outdirs):
        run1, run2 = outdirs
        for name in ("report.json", "levels.csv", "growth.csv", "angles.csv",
                     "slices.csv", "pick.csv"):
            assert filecmp.cmp(run1 / name, run2 / name, shallow=False), name

    def test_full_default_report_flags_failure(self, tmp_path):
        # default window reaches level 200 where the terminal diameter
        # ratio check honestly fails, so the exit code is 1
        code = cli.main(["report", "--out", str(tmp_path / "full")])
        assert code == 1
        data = json.loads((tmp_path / "full" / "report.json").read_text())
        failed = [c["check_id"] for c in data["checks"]
                  if c["status"] == "fail"]
        assert failed == ["diameter-ratio-terminal"]
