"""
Tests for calibration, scenario, block-trace and profile-store parsing plus configuration loading.
"""

import copy
import json
from pathlib import Path

import pytest

from models.storage_models import DiskKind
from models.workload_models import ThroughputTrace, TraceOperation
from parsers.calibration_parser import CalibrationParser
from parsers.msr_trace_parser import load_msr_trace
from parsers.scenario_parser import ScenarioParser, load_scenario, suggest_key
from parsers.trace_csv import ProfileStore, read_trace_csv, write_trace_csv
from utils.config import (
    CALIBRATION_ENV_VAR, DEFAULT_CALIBRATION_PATH, SimulatorConfig, get_preset_config, load_config,
    save_default_config,
)
from utils.errors import ConfigurationError, TraceParseError

SCENARIO_DIR = Path(__file__).resolve().parent / "scenarios"


@pytest.fixture(scope="module")
def calibration_json():
    with open(DEFAULT_CALIBRATION_PATH, 'r', encoding='utf-8') as f:
        return json.load(f)


def write_lines(path: Path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return str(path)


class TestCalibrationParser:

    def test_default_calibration(self, calibration):
        assert set(calibration.media) == {"lab", "open_water", "seawater"}
        assert calibration.medium("lab").noise_floor_spl == 116.0
        assert calibration.position_factors == {1: 1.0, 2: 0.85, 3: 0.6, 4: 0.45}
        assert calibration.write_curve("lab")[0] == (26.0, 0.83)
        assert calibration.db_latency[3].knots[-1] == (38.0, 1.927)
        assert calibration.cache_hit_ratios[("sequential-write", 0.5)] == 0.333
        assert "media.lab.spl_distance_curve" in calibration.figure_derived

    def test_unsupported_format(self, calibration_json):
        data = dict(calibration_json, format="something-else")
        with pytest.raises(ConfigurationError, match="unsupported calibration format"):
            CalibrationParser().parse_data(data)

    def test_schema_problems_are_reported(self, calibration_json):
        data = copy.deepcopy(calibration_json)
        data["media"]["lab"]["density"] = -1.0
        del data["pes_curve"]
        with pytest.raises(ConfigurationError) as info:
            CalibrationParser().parse_data(data)
        assert len(info.value.messages) == 2

    def test_semantic_problems_are_collected(self, calibration_json):
        data = copy.deepcopy(calibration_json)
        del data["degradation_curves"]["lab_write"]
        data["angle_table"]["points"] = [[10.0, 1.0], [90.0, 0.5]]
        data["db_latency"]["3"]["points"][0] = [0.0, 0.9]
        with pytest.raises(ConfigurationError) as info:
            CalibrationParser().parse_data(data)
        text = " ".join(info.value.messages)
        assert "missing 'lab_write'" in text
        assert "angle_table" in text
        assert "db_latency.3" in text

    def test_increasing_degradation_curve_is_rejected(self, calibration_json):
        data = copy.deepcopy(calibration_json)
        data["degradation_curves"]["lab_read"]["points"] = [[26.0, 0.5], [28.0, 0.9]]
        with pytest.raises(ConfigurationError, match="lab_read"):
            CalibrationParser().parse_data(data)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            CalibrationParser().parse_file(str(tmp_path / "nope.json"))


class TestScenarioParser:

    def test_minimal_scenario(self):
        scenario = ScenarioParser().parse_data({"name": "x", "horizon_s": 10})
        assert scenario.seed == 0
        assert scenario.environment == "lab"
        assert scenario.source is None

    @pytest.mark.parametrize("path", sorted(SCENARIO_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_scenarios_load(self, path):
        scenario = load_scenario(str(path))
        assert scenario.horizon_s > 0
        assert scenario.path == str(path)

    def test_misspelt_key_gets_a_suggestion(self):
        with pytest.raises(ConfigurationError) as info:
            ScenarioParser().parse_data({"name": "x", "horizn_s": 10})
        messages = info.value.messages
        assert any("did you mean 'horizon_s'" in m for m in messages)
        assert any("horizon_s" in m and "required" in m for m in messages)

    def test_reference_problems_are_reported_together(self):
        data = {
            "name": "x", "horizon_s": 10,
            "disks": [{"id": "a"}, {"id": "b"}, {"id": "b"}],
            "arrays": [{"id": "r", "members": ["a", "b"]}],
            "nodes": [{"id": "n", "location": "underwater", "storage": "missing"}],
            "source": {"spl": 150, "delta_spl": 30},
        }
        with pytest.raises(ConfigurationError) as info:
            ScenarioParser().parse_data(data)
        text = " | ".join(info.value.messages)
        assert "duplicate disk ids: b" in text
        assert "RAID 5 needs at least 3 members" in text
        assert "unknown storage 'missing'" in text
        assert "either 'spl' or 'delta_spl'" in text

    def test_scenario_body(self):
        scenario = load_scenario(str(SCENARIO_DIR / "hdfs-cascade.json"))
        disks = {d.disk_id: d for d in scenario.disks}
        assert disks["disk1"].overrides == {"unresponsive_dwell_s": 144}
        assert disks["ssd2"].kind == DiskKind.SOLID_STATE
        assert scenario.arrays[0].members == ("disk1", "disk2", "disk3", "disk4")
        assert scenario.source.delta_spl == 38

    def test_relative_calibration_is_resolved_next_to_the_scenario(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps({"name": "x", "horizon_s": 1, "calibration": "cal.json"}), encoding="utf-8")
        assert load_scenario(str(path)).calibration == str(tmp_path / "cal.json")

    def test_invalid_json_names_the_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{\n"name": "x",\n"horizon_s": \n}', encoding="utf-8")
        with pytest.raises(ConfigurationError, match="line"):
            load_scenario(str(path))

    def test_suggest_key(self):
        assert suggest_key("delta_sp", ["spl", "delta_spl"]) == "delta_spl"
        assert suggest_key("zzz", []) is None


class TestMsrTraceParser:

    def test_parse_and_rebase(self, tmp_path):
        path = write_lines(tmp_path / "t.csv", [
            "128166372000000000,hm,1,Write,3154403328,4096,3236",
            "128166372010000000,hm,1,Read,3154407424,8192,1000",
        ])
        requests = load_msr_trace(path)
        assert [r.operation for r in requests] == [TraceOperation.WRITE, TraceOperation.READ]
        assert requests[0].timestamp == 0.0
        assert requests[1].timestamp == pytest.approx(1.0)
        assert requests[1].size == 8192

    def test_problems_carry_line_numbers(self, tmp_path):
        path = write_lines(tmp_path / "t.csv", [
            "128166372000000000,hm,1,Write,0,4096,1",
            "abc,hm,1,Write,0,4096,1",
            "128166372020000000,hm,1,Trim,0,4096,1",
        ])
        with pytest.raises(TraceParseError) as info:
            load_msr_trace(path)
        assert [line for line, _ in info.value.problems] == [2, 3]
        assert "line 2" in str(info.value)

    def test_decreasing_timestamps(self, tmp_path):
        path = write_lines(tmp_path / "t.csv", [
            "128166372010000000,hm,1,Write,0,4096,1",
            "128166372000000000,hm,1,Write,0,4096,1",
        ])
        with pytest.raises(TraceParseError) as info:
            load_msr_trace(path)
        assert info.value.problems == [(2, "timestamp decreases")]

    def test_empty_and_missing_files(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("", encoding="utf-8")
        assert load_msr_trace(str(empty)) == []
        with pytest.raises(TraceParseError):
            load_msr_trace(str(tmp_path / "missing.csv"))

    def test_limit(self, tmp_path):
        path = write_lines(tmp_path / "t.csv", [f"{128166372000000000 + i * 10000},hm,1,Write,0,512,1"
                                                for i in range(10)])
        assert len(load_msr_trace(path, limit=4)) == 4

    def test_blank_lines_keep_file_line_numbers(self, tmp_path):
        path = write_lines(tmp_path / "t.csv", [
            "128166372000000000,hm,1,Write,0,4096,1",
            "",
            "",
            "128166372020000000,hm,1,Trim,0,4096,1",
        ])
        with pytest.raises(TraceParseError) as info:
            load_msr_trace(path)
        assert [line for line, _ in info.value.problems] == [4]

    def test_blank_lines_are_not_requests(self, tmp_path):
        path = write_lines(tmp_path / "t.csv", [
            "128166372000000000,hm,1,Write,0,4096,1",
            "",
            "128166372010000000,hm,1,Read,0,4096,1",
        ])
        assert [r.operation for r in load_msr_trace(path)] == [TraceOperation.WRITE, TraceOperation.READ]

    def test_extra_fields_report_their_line(self, tmp_path):
        path = write_lines(tmp_path / "t.csv", [
            "128166372000000000,hm,1,Write,0,4096,1",
            "",
            "128166372010000000,hm,1,Write,0,4096,1",
            "128166372020000000,hm,1,Write,0,4096,1,9,9",
        ])
        with pytest.raises(TraceParseError) as info:
            load_msr_trace(path)
        assert info.value.problems[0][0] == 4


class TestTraceCsv:

    def test_write_then_read(self, tmp_path):
        trace = ThroughputTrace(samples=[(0.0, 180.0), (1.0, 150.5), (2.0, 0.0)])
        path = write_trace_csv(trace, str(tmp_path / "trace.csv"))
        assert path.read_text(encoding="utf-8").splitlines()[0] == "t,throughput_mbps"
        loaded = read_trace_csv(str(path), labels={"disk": "d"})
        assert loaded.samples == trace.samples
        assert loaded.sample_period_s == 1.0

    def test_bad_rows(self, tmp_path):
        path = write_lines(tmp_path / "trace.csv", ["t,throughput_mbps", "0,1", "1,abc", "2,-1"])
        with pytest.raises(TraceParseError) as info:
            read_trace_csv(path)
        assert [line for line, _ in info.value.problems] == [3, 4]

    def test_missing_column(self, tmp_path):
        path = write_lines(tmp_path / "trace.csv", ["t,mbps", "0,1"])
        with pytest.raises(TraceParseError) as info:
            read_trace_csv(path)
        assert info.value.problems[0][0] == 1


class TestProfileStore:

    def test_save_and_load(self, tmp_path):
        traces = {d: [ThroughputTrace(samples=[(0.0, 100.0 + i), (1.0, 101.0 + i)]) for i in range(2)]
                  for d in ("disk1", "disk2")}
        store = ProfileStore(str(tmp_path / "profiles"))
        manifest = store.save(traces, {"seed": 3})
        assert json.loads(manifest.read_text(encoding="utf-8"))["disks"]["disk1"] == [
            "disk1_trial000.csv", "disk1_trial001.csv"]
        loaded = store.load()
        assert sorted(loaded) == ["disk1", "disk2"]
        assert loaded["disk2"][1].samples == [(0.0, 101.0), (1.0, 102.0)]
        assert store.metadata() == {"seed": 3}

    def test_missing_or_foreign_manifest(self, tmp_path):
        with pytest.raises(ConfigurationError):
            ProfileStore(str(tmp_path)).load()
        (tmp_path / "manifest.json").write_text('{"format": "other"}', encoding="utf-8")
        with pytest.raises(ConfigurationError, match="not a profile store"):
            ProfileStore(str(tmp_path)).load()


class TestConfig:

    def test_calibration_resolution_order(self, monkeypatch):
        monkeypatch.delenv(CALIBRATION_ENV_VAR, raising=False)
        config = SimulatorConfig(calibration_path="from_config.json")
        assert config.resolve_calibration_path("flag.json", "scenario.json") == Path("flag.json")
        assert config.resolve_calibration_path(None, "scenario.json") == Path("scenario.json")
        assert config.resolve_calibration_path() == Path("from_config.json")
        monkeypatch.setenv(CALIBRATION_ENV_VAR, "from_env.json")
        assert config.resolve_calibration_path() == Path("from_env.json")
        monkeypatch.delenv(CALIBRATION_ENV_VAR)
        assert SimulatorConfig().resolve_calibration_path() == DEFAULT_CALIBRATION_PATH

    def test_missing_or_broken_config_falls_back(self, tmp_path):
        assert load_config(str(tmp_path / "none.json")) == SimulatorConfig()
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        assert load_config(str(broken)) == SimulatorConfig()

    def test_presets(self, tmp_path):
        path = save_default_config(str(tmp_path / "quick.json"), "quick")
        loaded = load_config(path)
        assert loaded.detector.profiling_trials == 20
        assert loaded.reporting.emit_plots is False
        assert get_preset_config("full").detector.profiling_trials == 100
        with pytest.raises(ValueError):
            get_preset_config("huge")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
