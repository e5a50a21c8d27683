"""
End-to-end tests for the command-line interface: outputs, exit codes and plot scripts.
"""

import json
import math

import pandas as pd
import pytest

import main
from generators.experiment_recipes import ExperimentRecipes
from generators.plot_script_generator import PlotScriptGenerator
from utils.errors import ValidationError


def run_cli(*argv) -> int:
    return main.main(list(argv) + ["--quiet"])


def summary_of(out_dir):
    lines = (out_dir / "summary.txt").read_text(encoding="utf-8").splitlines()
    return dict(line.split("=", 1) for line in lines)


class TestExperimentCommands:

    def test_fem_attenuation(self, tmp_path):
        assert run_cli("fem-attenuation", "--out", str(tmp_path)) == 0
        table = pd.read_csv(tmp_path / "fem_attenuation.csv")
        assert table["distance_m"].iloc[0] == 0.0
        assert table["displacement_nm"].iloc[0] == pytest.approx(145.5)
        assert table["displacement_nm"].iloc[-1] == pytest.approx(131.2, rel=0.005)
        summary = summary_of(tmp_path)
        assert summary["recipe"] == "fem-attenuation"
        assert float(summary["seawater_to_steel.reflection"]) > 0.9
        wavenumber = float(summary["seawater.wavenumber_rad_per_m"])
        assert wavenumber == pytest.approx(2 * math.pi * 5100.0 / 1500.0, rel=1e-6)
        assert (tmp_path / "fem_attenuation.gp").exists()

    def test_db_latency(self, tmp_path):
        assert run_cli("db-latency", "--out", str(tmp_path)) == 0
        table = pd.read_csv(tmp_path / "db_latency.csv").set_index("delta_spl_db")
        assert table.loc[38.0, "nodes_3"] == pytest.approx(1.927)
        assert pd.isna(table.loc[40.0, "nodes_3"])
        assert table.loc[0.0, "nodes_7"] == 1.0
        assert "'db_latency.csv' using 'delta_spl_db':'nodes_5'" in (tmp_path / "db_latency.gp").read_text()

    def test_sweep_flags_resonant_bands(self, tmp_path):
        assert run_cli("sweep", "--out", str(tmp_path), "--trials", "1") == 0
        summary = summary_of(tmp_path)
        assert summary["flagged_bands_hz"] == "1900-2100;3600-3800;5100-5300;8800-9000"
        table = pd.read_csv(tmp_path / "sweep.csv")
        assert len(table) == 120

    def test_hdfs_cascade(self, tmp_path):
        assert run_cli("hdfs-cascade", "--out", str(tmp_path)) == 0
        summary = summary_of(tmp_path)
        assert summary["cascade"] == "blocked,drop,live,blocked,drop,removed"
        for name in ("events.csv", "metrics.csv", "liveness.csv", "liveness.gp"):
            assert (tmp_path / name).exists()
        events = pd.read_csv(tmp_path / "events.csv")
        assert list(events.columns) == ["time_s", "kind", "subject", "description"]

    def test_run_is_byte_identical_across_invocations(self, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        assert run_cli("run", "--out", str(first)) == 0
        assert run_cli("run", "--out", str(second)) == 0
        for name in ("metrics.csv", "events.csv", "throughput.csv", "summary.txt"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_seed_override_is_reported(self, tmp_path):
        assert run_cli("fem-attenuation", "--out", str(tmp_path), "--seed", "99") == 0
        assert summary_of(tmp_path)["seed"] == "99"

    def test_detect_eval_meets_detection_targets(self, tmp_path):
        assert run_cli("detect-eval", "--out", str(tmp_path)) == 0
        summary = summary_of(tmp_path)
        assert summary["pool_size"] == "100"
        assert summary["combinations"] == "1000"
        for volume in (26, 28, 30):
            assert float(summary[f"tpr_at_{volume}db"]) >= 0.95
            assert float(summary[f"fpr_at_{volume}db"]) <= 0.01
        table = pd.read_csv(tmp_path / "detect_eval.csv")
        assert (table["n_combinations"] == 1000).all()


class TestExitCodes:

    def test_invalid_scenario_is_a_configuration_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"name": "bad", "horizn_s": 5}), encoding="utf-8")
        assert run_cli("run", "--scenario", str(bad), "--out", str(tmp_path / "out")) == main.EXIT_CONFIG_ERROR

    def test_missing_calibration_is_a_configuration_error(self, tmp_path):
        code = run_cli("db-latency", "--calibration", str(tmp_path / "none.json"), "--out", str(tmp_path))
        assert code == main.EXIT_CONFIG_ERROR

    def test_runtime_failure(self, tmp_path, monkeypatch):
        def explode(self, name):
            raise RuntimeError("boom")

        monkeypatch.setattr(ExperimentRecipes, "execute", explode)
        assert run_cli("db-latency", "--out", str(tmp_path)) == main.EXIT_RUNTIME_ERROR

    def test_unknown_command_exits_through_argparse(self):
        with pytest.raises(SystemExit):
            main.main(["no-such-command"])


class TestInitConfig:

    def test_writes_preset(self, tmp_path):
        target = tmp_path / "cfg.json"
        assert run_cli("init-config", "--preset", "quick", "--output", str(target)) == 0
        assert json.loads(target.read_text(encoding="utf-8"))["detector"]["profiling_trials"] == 20

    def test_config_disables_plots(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        assert run_cli("init-config", "--preset", "quick", "--output", str(cfg)) == 0
        out = tmp_path / "out"
        assert run_cli("fem-attenuation", "--config", str(cfg), "--out", str(out)) == 0
        assert not list(out.glob("*.gp"))


class TestPlotScripts:

    def test_missing_column_is_reported(self, tmp_path):
        (tmp_path / "volume_curve.csv").write_text("delta_spl_db,throughput\n26,0.8\n", encoding="utf-8")
        with pytest.raises(ValidationError, match="normalized_throughput"):
            PlotScriptGenerator(str(tmp_path)).emit_plots("volume-curve", [str(tmp_path / "volume_curve.csv")])

    def test_only_written_csvs_get_scripts(self, tmp_path):
        (tmp_path / "volume_curve.csv").write_text("delta_spl_db,normalized_throughput\n26,0.8\n",
                                                   encoding="utf-8")
        scripts = PlotScriptGenerator(str(tmp_path)).emit_plots("volume-curve", [str(tmp_path / "volume_curve.csv")])
        assert [p.endswith("volume_curve.gp") for p in scripts] == [True]
        body = (tmp_path / "volume_curve.gp").read_text(encoding="utf-8")
        assert "set datafile separator ','" in body
        assert "'volume_curve.csv' using 'delta_spl_db':'normalized_throughput'" in body
        assert "set output 'volume_curve.png'" in body

    def test_stale_csv_from_an_earlier_run_gets_no_script(self, tmp_path):
        header = "delta_spl_db,normalized_throughput\n26,0.8\n"
        (tmp_path / "volume_curve.csv").write_text(header, encoding="utf-8")
        (tmp_path / "distance_curve.csv").write_text("distance_m,normalized_throughput\n1,0.8\n", encoding="utf-8")
        scripts = PlotScriptGenerator(str(tmp_path)).emit_plots("volume-curve", [str(tmp_path / "volume_curve.csv")])
        assert len(scripts) == 1
        assert not (tmp_path / "distance_curve.gp").exists()


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
