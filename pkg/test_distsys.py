"""
Tests for data-node liveness, database latency, VM lifecycle, placement and re-replication.
"""

from itertools import combinations, product

import numpy as np
import pytest

from models.acoustic_models import EffectiveExcitation
from models.calibration_models import VmInflation
from models.distsys_models import (
    DbCluster, Host, Node, NodeLocation, NodeStatus, ReplicaMap, Scheduler, VMState,
)
from models.engine_models import ArraySpec, DiskSpec
from models.storage_models import DiskState
from simulators.distsys import (
    VmFleet, db_normalized_latency, dfs_step, drain_queue, host_shares, place_vm, rereplicate,
    schedule_vms, vm_state_duration,
)
from simulators.storage import StorageTarget, build_disk_models, degradation_multiplier
from utils.errors import ConfigurationError

BASE = {"INIT": 5.0, "PROLOG": 20.0, "BOOT": 15.0, "RUNNING": 10.0}


def cluster(calibration, underwater: int) -> DbCluster:
    return DbCluster([], underwater, calibration.db_latency)


class TestDataNode:

    def test_live_blocked_removed(self, calibration):
        specs = [DiskSpec(f"d{i}") for i in range(3)]
        storage = StorageTarget.from_specs(build_disk_models(specs, calibration),
                                           [ArraySpec("r", ("d0", "d1", "d2"), 5.0, 10.0)])
        node = Node("dn1", NodeLocation.UNDERWATER, "r")
        assert dfs_step(node, storage, 0.0) == []

        loud = EffectiveExcitation(40.0, 0.0, 1.0)
        statuses = []
        for k in range(120):
            storage.step(loud, 1.0, float(k))
            statuses += [e.description for e in dfs_step(node, storage, float(k + 1))]
        assert statuses == ["blocked", "removed"]
        assert node.status == NodeStatus.REMOVED
        # Removal is final
        assert dfs_step(node, storage, 500.0) == []

    STORAGE_CONDITIONS = {
        "healthy": DiskState("d"),
        "stalled": DiskState("d", responsive=False, current_multiplier=0.0, unresponsive_since=0.0),
        "failed": DiskState("d", responsive=False, current_multiplier=0.0, permanent_multiplier=0.0,
                            unresponsive_since=0.0),
    }
    EXPECTED = {"healthy": NodeStatus.LIVE, "stalled": NodeStatus.BLOCKED, "failed": NodeStatus.REMOVED}

    @pytest.mark.parametrize("start", list(NodeStatus))
    @pytest.mark.parametrize("condition", ["healthy", "stalled", "failed"])
    def test_every_transition(self, lone_disk, start, condition):
        storage = lone_disk("d")
        storage.states["d"] = self.STORAGE_CONDITIONS[condition]
        node = Node("dn", NodeLocation.UNDERWATER, "d", status=start)
        events = dfs_step(node, storage, 7.0)
        expected = start if start == NodeStatus.REMOVED else self.EXPECTED[condition]
        assert node.status == expected
        if expected == start:
            assert events == []
        else:
            assert [(e.time, e.subject, e.description) for e in events] == [(7.0, "dn", expected.value)]

    def test_node_without_storage_is_ignored(self, lone_disk):
        node = Node("dn", NodeLocation.ON_LAND)
        assert dfs_step(node, lone_disk("d"), 1.0) == []
        assert node.status == NodeStatus.LIVE


class TestDbLatency:

    def test_three_node_value_at_38_db(self, calibration):
        assert db_normalized_latency(cluster(calibration, 3), 38.0) == pytest.approx(1.927)

    def test_out_of_service_above_38_db(self, calibration):
        assert db_normalized_latency(cluster(calibration, 3), 38.5) is None

    def test_quiet_levels_are_unity(self, calibration):
        for level in (-5.0, 0.0, 20.0):
            assert db_normalized_latency(cluster(calibration, 5), level) == 1.0

    def test_monotone_in_level(self, calibration):
        for count in (3, 5, 7):
            values = [db_normalized_latency(cluster(calibration, count), x / 2) for x in range(0, 77)]
            assert all(b >= a for a, b in zip(values, values[1:]))

    def test_more_underwater_nodes_cost_less(self, calibration):
        at_34 = [db_normalized_latency(cluster(calibration, n), 34.0) for n in (3, 5, 7)]
        assert at_34 == sorted(at_34, reverse=True)

    def test_unknown_split(self, calibration):
        with pytest.raises(ConfigurationError):
            db_normalized_latency(cluster(calibration, 4), 30.0)


class TestVmStateDuration:

    def test_no_inflation_at_or_below_onset(self):
        assert vm_state_duration(VMState.RUNNING, 100.0, 26.0) == 100.0

    def test_running_peaks_at_max_level(self):
        assert vm_state_duration(VMState.RUNNING, 100.0, 36.0) == pytest.approx(380.0)
        assert vm_state_duration(VMState.RUNNING, 100.0, 40.0) == pytest.approx(380.0)

    def test_prolog_is_linear_between_onset_and_max(self):
        assert vm_state_duration(VMState.PROLOG, 100.0, 31.0) == pytest.approx(105.0)

    def test_init_and_boot_are_not_storage_bound(self):
        assert vm_state_duration(VMState.INIT, 5.0, 35.0) == 5.0
        assert vm_state_duration(VMState.BOOT, 15.0, 35.0) == 15.0

    def test_single_disk_host_fails_while_running(self):
        assert vm_state_duration(VMState.RUNNING, 100.0, 36.0, single_disk=True) is None
        assert vm_state_duration(VMState.RUNNING, 100.0, 35.0, single_disk=True) is not None

    def test_non_positive_base(self):
        with pytest.raises(ValueError):
            vm_state_duration(VMState.INIT, 0.0, 10.0)


class TestVmFleet:

    def step_until(self, fleet, ticks, **host):
        events = []
        defaults = {"host_level": {"h": 0.0}, "host_stalled": {}, "host_failed": {}, "single_disk": {}}
        defaults.update(host)
        for k in range(ticks):
            events += fleet.step(1.0, float(k + 1), **defaults)
        return events

    def test_benign_lifecycle(self):
        fleet = VmFleet(BASE, VmInflation())
        fleet.instantiate("vm0", "h", 0.0)
        events = self.step_until(fleet, 50)
        assert [(e.time, e.description) for e in events] == [
            (5.0, "PROLOG"), (25.0, "BOOT"), (40.0, "RUNNING"), (50.0, "DONE")]
        durations = {r["state"]: r["duration_s"] for r in fleet.state_durations()}
        assert durations == {"INIT": 5.0, "PROLOG": 20.0, "BOOT": 15.0, "RUNNING": 10.0}

    def test_running_vm_blocks_when_host_storage_fails(self):
        fleet = VmFleet(BASE, VmInflation())
        fleet.instantiate("vm0", "h", 0.0)
        self.step_until(fleet, 42)
        assert fleet.vms["vm0"].state == VMState.RUNNING
        events = fleet.step(1.0, 43.0, {"h": 0.0}, {}, {"h": True}, {})
        assert [e.description for e in events] == ["BLOCKED"]
        assert fleet.vms["vm0"].is_terminal

    def test_stalled_host_freezes_running_progress(self):
        fleet = VmFleet(BASE, VmInflation())
        fleet.instantiate("vm0", "h", 0.0)
        self.step_until(fleet, 41)
        progress = fleet.vms["vm0"].progress
        self.step_until(fleet, 30, host_stalled={"h": True})
        assert fleet.vms["vm0"].progress == progress

    def test_single_disk_host_fails_running_vm(self):
        fleet = VmFleet(BASE, VmInflation())
        fleet.instantiate("vm0", "h", 0.0)
        self.step_until(fleet, 40)
        events = fleet.step(1.0, 41.0, {"h": 36.0}, {}, {}, {"h": True})
        assert [e.description for e in events] == ["FAILED"]

    def test_unplaced_vm_does_not_progress(self):
        fleet = VmFleet(BASE, VmInflation())
        fleet.instantiate("vm0", None, 0.0)
        assert self.step_until(fleet, 10) == []
        assert fleet.count_by_state()["INIT"] == 1


class TestPlacement:

    def test_equal_hosts_alternate(self):
        scheduler = Scheduler([Host("h1", "n1"), Host("h2", "n2")])
        load = {}
        chosen = [place_vm(scheduler, f"vm{i}", float(i), {"h1", "h2"}, load) for i in range(6)]
        assert chosen == ["h1", "h2", "h1", "h2", "h1", "h2"]

    def test_degraded_host_gets_proportionally_fewer(self):
        scheduler = Scheduler([Host("h1", "n1"), Host("h2", "n2", monitored_fraction=0.0)], storage_weight=0.8)
        load = {}
        for i in range(60):
            place_vm(scheduler, f"vm{i}", float(i), {"h1", "h2"}, load)
        assert 9 <= load["h2"] <= 11
        assert load["h1"] + load["h2"] == 60

    def test_queues_when_nothing_is_available_and_drains_later(self):
        scheduler = Scheduler([Host("h1", "n1", max_vms=1)])
        load = {}
        assert place_vm(scheduler, "vm0", 0.0, {"h1"}, load) == "h1"
        assert place_vm(scheduler, "vm1", 1.0, {"h1"}, load) is None
        assert scheduler.queue == ["vm1"]
        load["h1"] = 0
        assert drain_queue(scheduler, 2.0, {"h1"}, load) == [("vm1", "h1")]
        assert scheduler.queue == []

    def test_schedule_follows_health_feed(self):
        scheduler = Scheduler([Host("uw", "n1"), Host("land", "n2")])

        def health(now):
            return {"uw": (now < 10.0, 1.0), "land": (True, 1.0)}

        log = schedule_vms(scheduler, [(float(t), f"vm{t:02d}") for t in range(20)], health)
        assert all(a.host_id == "land" for a in log if a.time_s >= 10.0)
        shares = host_shares(log)
        assert shares["uw"] == 5 and shares["land"] == 15

    def test_every_vm_is_placed_or_queued(self):
        rng = np.random.default_rng(3)
        outages = rng.random((40, 3)) < 0.4
        scheduler = Scheduler([Host(f"h{i}", f"n{i}", max_vms=6) for i in range(3)])

        def health(now):
            row = outages[int(now)]
            return {f"h{i}": (not row[i], 1.0) for i in range(3)}

        batch = [(float(t), f"vm{t:02d}") for t in range(40)]
        log = schedule_vms(scheduler, batch, health)
        final = {}
        for a in log:
            final[a.vm_id] = a.host_id
        assert set(final) == {vm for _, vm in batch}
        assert sorted(vm for vm, host in final.items() if host is None) == sorted(scheduler.queue)
        assert len(scheduler.queue) == len(set(scheduler.queue))
        shares = host_shares(log)
        assert sum(shares.values()) == len(batch)
        assert all(shares.get(f"h{i}", 0) <= 6 for i in range(3))

    def test_underwater_share_falls_as_the_level_rises(self, calibration):
        curve = calibration.write_curve("lab")
        shares = []
        for level in (0.0, 26.0, 28.0, 30.0, 32.0):
            fraction = degradation_multiplier(level, curve)
            scheduler = Scheduler([Host("uw", "n1"), Host("land", "n2")], storage_weight=0.8)

            def health(now, fraction=fraction):
                return {"uw": (True, fraction), "land": (True, 1.0)}

            log = schedule_vms(scheduler, [(float(t), f"vm{t:02d}") for t in range(60)], health)
            shares.append(host_shares(log).get("uw", 0))
        assert all(b <= a for a, b in zip(shares, shares[1:]))
        assert shares[0] == 30
        assert shares[-1] < shares[0]


class TestRereplicate:

    def test_replicas_move_to_healthy_unflagged_nodes(self):
        replicas = ReplicaMap({"b0": {"n1", "n2"}, "b1": {"n1", "n3"}, "b2": {"n2", "n3"}})
        result, events = rereplicate(replicas, "n1", ["n2", "n3", "n4"], flagged=["n4"])
        assert result.under_replicated() == []
        assert all("n1" not in holders and "n4" not in holders for holders in result.blocks.values())
        assert replicas.blocks["b0"] == {"n1", "n2"}
        assert len(events) == 2

    def test_reports_blocks_that_cannot_be_restored(self):
        replicas = ReplicaMap({"b0": {"n1", "n2"}})
        result, events = rereplicate(replicas, "n1", ["n2"])
        assert result.under_replicated() == ["b0"]
        assert events[0].description == "under-replicated (1/2)"

    def test_needs_replication(self):
        with pytest.raises(ValueError):
            rereplicate(ReplicaMap({"b0": {"n1"}}, replication_factor=1), "n1", ["n2"])

    def test_blocks_under_replicated_elsewhere_are_left_alone(self):
        replicas = ReplicaMap({"b0": {"n2"}, "b1": {"n1", "n3"}})
        result, events = rereplicate(replicas, "n1", ["n2", "n3", "n4"])
        assert [e.subject for e in events] == ["b1"]
        assert result.blocks["b0"] == {"n2"}
        assert result.blocks["b1"] == {"n3", "n4"}

    NODES = ("n1", "n2", "n3", "n4")

    @pytest.mark.parametrize("flagged", [(), ("n4",), ("n3", "n4")])
    def test_small_layouts(self, flagged):
        pairs = [set(p) for p in combinations(self.NODES, 2)]
        for layout in product(pairs, repeat=3):
            replicas = ReplicaMap({f"b{i}": set(holders) for i, holders in enumerate(layout)})
            result, events = rereplicate(replicas, "n1", list(self.NODES[1:]), flagged=flagged)
            lost = [b for b, holders in sorted(replicas.blocks.items()) if "n1" in holders]
            allowed = set(self.NODES[1:]) - set(flagged)
            moved = [e for e in events if e.description.startswith("replica")]
            assert sorted({e.subject for e in events}) == lost
            for block, holders in result.blocks.items():
                assert "n1" not in holders
                if block not in lost:
                    assert holders == replicas.blocks[block]
                    continue
                survivor = replicas.blocks[block] - {"n1"}
                assert survivor <= holders
                assert holders - survivor <= allowed
                if allowed - survivor:
                    assert len(holders) == 2
                else:
                    assert result.blocks[block] == survivor
            assert len(moved) == sum(len(result.blocks[b]) - len(replicas.blocks[b] - {"n1"}) for b in lost)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
