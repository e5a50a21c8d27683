"""
Tests for the event engine: ordering, determinism and the shipped cascade and VM scenarios.
"""

from dataclasses import replace
from pathlib import Path

import pytest

from generators.experiment_recipes import cascade_sequence
from models.distsys_models import VMState
from models.engine_models import EventKind
from parsers.scenario_parser import load_scenario
from simulators.engine import SimulationEngine, run
from simulators.rng import derive_rng, derive_seed
from simulators.distsys import host_shares
from utils.config import EngineConfig, SimulatorConfig

SCENARIO_DIR = Path(__file__).resolve().parent / "scenarios"


def scenario(name: str):
    return load_scenario(str(SCENARIO_DIR / f"{name}.json"))


def underwater_share(result, host="host-uw") -> float:
    shares = host_shares(result.assignments)
    return shares.get(host, 0) / sum(shares.values())


@pytest.fixture(scope="module")
def cascade(calibration):
    return run(scenario("hdfs-cascade"), calibration)


class TestRng:

    def test_same_label_same_stream(self):
        assert derive_rng(5, "noise").random(4).tolist() == derive_rng(5, "noise").random(4).tolist()

    def test_labels_and_seeds_are_independent(self):
        base = derive_rng(5, "noise").random(4).tolist()
        assert derive_rng(5, "monitoring").random(4).tolist() != base
        assert derive_rng(6, "noise").random(4).tolist() != base
        assert derive_seed(5, "kmeans") == derive_seed(5, "kmeans")


class TestEventOrdering:

    def test_event_kind_priorities(self):
        order = sorted(EventKind, key=lambda k: k.value)
        assert order[0] == EventKind.EXCITATION_CHANGE
        assert order[-1] == EventKind.SAMPLE_TICK

    def test_metric_times_are_non_decreasing(self, calibration):
        result = run(scenario("run"), calibration)
        times = [r.time for r in result.metrics.records]
        assert times == sorted(times)
        assert len(result.metrics.series("delta_spl")) == 901

    def test_sample_ticks_land_on_the_period(self, calibration):
        config = SimulatorConfig(engine=EngineConfig(sample_period_s=0.1))
        times = [t for t, _ in run(scenario("run"), calibration, config).metrics.series("delta_spl")]
        assert times == [k * 0.1 for k in range(len(times))]
        assert len(times) == 9001

    def test_cannot_schedule_into_the_past(self, calibration):
        engine = SimulationEngine(scenario("run"), calibration)
        engine._now = 10.0
        with pytest.raises(RuntimeError):
            engine.schedule(5.0, EventKind.SAMPLE_TICK)


class TestDeterminism:

    def test_identical_runs(self, calibration):
        first = run(scenario("run"), calibration)
        second = run(scenario("run"), calibration)
        assert first.events == second.events
        assert first.metrics.records == second.metrics.records
        assert first.summary == second.summary

    def test_silent_scenario_is_flat(self, calibration):
        quiet = replace(scenario("run"), source=None)
        result = run(quiet, calibration)
        assert {v for _, v in result.metrics.series("throughput_mbps", storage="raid0")} == {180.0}
        assert not [e for e in result.events if e.kind == "raid-event"]
        assert result.summary["node.dn1.status"] == "live"


class TestHdfsCascade:

    def test_cascade_order(self, cascade):
        assert cascade_sequence(cascade.events, ["dn1", "dn2", "dn3"]) == [
            "blocked", "drop", "live", "blocked", "drop", "removed"]

    def test_cascade_times(self, cascade):
        drops = [(e.time, e.description) for e in cascade.events
                 if e.kind == "raid-event" and e.description.startswith("drop")]
        assert drops == [(252.0, "drop disk1"), (906.0, "drop disk2")]
        removed = [e.time for e in cascade.events if e.subject == "dn1" and e.description == "removed"]
        assert removed == [906.0]

    def test_on_land_nodes_stay_live(self, cascade):
        assert cascade.summary["node.dn2.status"] == "live"
        assert cascade.summary["node.dn3.status"] == "live"
        assert cascade.summary["array.raid0.status"] == "failed"

    def test_blocks_move_to_live_nodes(self, cascade):
        assert cascade.summary["replicas.under_replicated"] == 0
        assert any(e.description.startswith("replica dn1 -> ") for e in cascade.events)


class TestVmMigration:

    @pytest.mark.parametrize("seed", [9, 21, 33, 45, 57, 69, 81, 93, 105, 117])
    def test_underwater_share_drops(self, calibration, seed):
        attack = replace(scenario("vm-migration"), seed=seed)
        baseline = replace(attack, source=None)
        reduction = 1.0 - underwater_share(run(attack, calibration)) / underwater_share(run(baseline, calibration))
        assert 0.58 <= reduction <= 0.74

    def test_vms_on_the_failed_array_end_blocked(self, calibration):
        engine = SimulationEngine(scenario("vm-migration"), calibration)
        result = engine.run()
        assert result.summary["array.raid0.status"] == "failed"
        on_array = [vm for vm in engine.fleet.vms.values() if vm.host_id == "host-uw"]
        assert on_array
        assert all(vm.state == VMState.BLOCKED for vm in on_array)
        assert all(a.host_id == "host-land" for a in result.assignments if a.time_s >= 1344.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
