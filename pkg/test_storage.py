"""
Tests for drive degradation, the unresponsive/recovery cycle and the RAID-5 state machine.
"""

from itertools import permutations

import numpy as np
import pytest

from models.acoustic_models import EffectiveExcitation, SILENT
from models.engine_models import ArraySpec, DiskSpec
from models.storage_models import DiskKind, DiskModel, DiskState, Raid5Array, RaidStatus
from simulators.storage import (
    StorageTarget, build_disk_models, degradation_multiplier, disk_step, pes_displacement_ratio, raid5_step,
    raid5_throughput,
)
from utils.errors import StorageUnavailableError, ValidationError

LAB_WRITE = ((26.0, 0.83), (28.0, 0.6), (30.0, 0.35), (32.0, 0.0))


def loud(level: float, factor: float = 1.0) -> EffectiveExcitation:
    return EffectiveExcitation(delta_spl=level, displacement_nm=0.0, combined_factor=factor)


def disk(disk_id="d", **kwargs) -> DiskModel:
    return DiskModel(disk_id=disk_id, baseline_throughput=kwargs.pop("baseline", 100.0),
                     degradation_curve=LAB_WRITE, **kwargs)


class TestDegradationMultiplier:

    @pytest.mark.parametrize("level, expected", [(0.0, 1.0), (25.9, 1.0), (26.0, 0.83), (27.0, 0.715),
                                                 (32.0, 0.0), (45.0, 0.0)])
    def test_curve_points(self, level, expected):
        assert degradation_multiplier(level, LAB_WRITE) == pytest.approx(expected)

    def test_factor_scales_the_drop_fraction(self):
        assert degradation_multiplier(30.0, LAB_WRITE, 0.5) == pytest.approx(1.0 - 0.65 * 0.5)
        assert degradation_multiplier(30.0, LAB_WRITE, 0.0) == 1.0

    def test_factor_out_of_range(self):
        with pytest.raises(ValueError):
            degradation_multiplier(30.0, LAB_WRITE, 1.5)

    def test_non_increasing(self):
        levels = np.linspace(0, 40, 161)
        values = [degradation_multiplier(x, LAB_WRITE) for x in levels]
        assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


class TestPesDisplacement:

    @pytest.mark.parametrize("level, expected", [(30.0, 0.0), (46.0, 0.0), (55.0, 41.5), (64.0, 83.0),
                                                 (80.0, 83.0)])
    def test_default_curve(self, calibration, level, expected):
        assert pes_displacement_ratio(level, calibration.pes_curve) == pytest.approx(expected)


class TestDiskStep:

    def test_degrades_without_becoming_unresponsive_below_threshold(self):
        model = disk()
        state = DiskState("d")
        for k in range(600):
            state = disk_step(state, model, loud(30.0), 1.0, 1.0, float(k))
        assert state.responsive
        assert state.current_multiplier == pytest.approx(0.35)
        assert state.permanent_multiplier == 1.0

    def test_unresponsive_after_dwell(self):
        model = disk(unresponsive_threshold_db=37.0, unresponsive_dwell_s=60.0)
        state = DiskState("d")
        for k in range(59):
            state = disk_step(state, model, loud(38.0), 1.0, 1.0, float(k))
            assert state.responsive
        state = disk_step(state, model, loud(38.0), 1.0, 1.0, 59.0)
        assert not state.responsive
        assert not state.detected
        assert state.unresponsive_since == 60.0
        assert state.current_multiplier == 0.0

    def test_quiet_second_resets_the_dwell(self):
        model = disk(unresponsive_threshold_db=37.0, unresponsive_dwell_s=60.0)
        state = DiskState("d")
        now = 0.0
        for _ in range(5):
            for _ in range(59):
                state = disk_step(state, model, loud(38.0), 1.0, 1.0, now)
                now += 1.0
            assert state.dwell_accumulator_s == 59.0
            state = disk_step(state, model, loud(20.0), 1.0, 1.0, now)
            now += 1.0
            assert state.responsive
            assert state.dwell_accumulator_s == 0.0

    def test_recovers_when_sound_stops_with_permanent_loss(self):
        model = disk(unresponsive_dwell_s=1.0, permanent_damage_rate=0.01)
        state = DiskState("d")
        for k in range(11):
            state = disk_step(state, model, loud(40.0), 1.0, 1.0, float(k))
        assert not state.responsive
        state = disk_step(state, model, SILENT, 0.0, 1.0, 11.0)
        assert state.responsive
        assert state.dwell_accumulator_s == 0.0
        assert state.permanent_multiplier == pytest.approx(1.0 - 0.01 * 11)
        assert state.current_multiplier == pytest.approx(state.permanent_multiplier)

    def test_current_never_exceeds_permanent(self):
        model = disk(unresponsive_dwell_s=5.0, permanent_damage_rate=0.02)
        state = DiskState("d")
        rng = np.random.default_rng(5)
        for k in range(300):
            level = float(rng.uniform(0, 45))
            state = disk_step(state, model, loud(level), 1.0, 1.0, float(k))
            assert 0.0 <= state.current_multiplier <= state.permanent_multiplier <= 1.0

    def test_solid_state_disk_ignores_sound(self):
        model = disk(kind=DiskKind.SOLID_STATE)
        state = DiskState("d")
        for k in range(200):
            state = disk_step(state, model, loud(50.0), 1.0, 1.0, float(k))
        assert state == DiskState("d")

    def test_coupling_reduces_effect(self):
        model = disk(coupling=0.5)
        state = disk_step(DiskState("d"), model, loud(30.0), 1.0, 1.0)
        assert state.current_multiplier == pytest.approx(1.0 - 0.65 * 0.5)

    def test_non_positive_dt(self):
        with pytest.raises(ValueError):
            disk_step(DiskState("d"), disk(), SILENT, 0.0, 0.0)

    def test_state_rejects_current_above_permanent(self):
        with pytest.raises(ValidationError):
            DiskState("d", current_multiplier=0.9, permanent_multiplier=0.5)


class TestRaid5:

    MEMBERS = ["a", "b", "c", "d"]

    def test_any_drop_order_degrades_then_fails(self):
        for order in permutations(self.MEMBERS):
            array = Raid5Array("r", list(self.MEMBERS), drop_timeout_s=10.0, degraded_drop_timeout_s=20.0)
            states = {m: DiskState(m) for m in self.MEMBERS}

            states[order[0]] = DiskState(order[0], responsive=False, current_multiplier=0.0,
                                         unresponsive_since=0.0)
            assert raid5_step(array, states, 9.0) == []
            events = raid5_step(array, states, 10.0)
            assert [e.description for e in events] == [f"drop {order[0]}", "degraded (3 members)"]
            assert array.status == RaidStatus.DEGRADED

            states[order[1]] = DiskState(order[1], responsive=False, current_multiplier=0.0,
                                         unresponsive_since=10.0)
            assert raid5_step(array, states, 29.0) == []
            events = raid5_step(array, states, 30.0)
            assert [e.description for e in events] == [f"drop {order[1]}", "failed"]
            assert array.is_failed

            states[order[2]] = DiskState(order[2], responsive=False, current_multiplier=0.0,
                                         unresponsive_since=30.0)
            assert raid5_step(array, states, 1000.0) == []
            assert array.status == RaidStatus.FAILED
            assert array.dropped == list(order[:2])

    def test_simultaneous_members_drop_in_member_order(self):
        array = Raid5Array("r", list(self.MEMBERS), drop_timeout_s=10.0, degraded_drop_timeout_s=20.0)
        states = {m: DiskState(m, responsive=False, current_multiplier=0.0, unresponsive_since=0.0)
                  for m in self.MEMBERS}
        events = raid5_step(array, states, 10.0)
        assert [e.description for e in events] == ["drop a", "degraded (3 members)"]

    def test_needs_three_members(self):
        with pytest.raises(ValidationError):
            Raid5Array("r", ["a", "b"])

    def test_throughput_follows_slowest_member(self):
        models = {m: disk(m) for m in self.MEMBERS}
        array = Raid5Array("r", list(self.MEMBERS))
        states = {"a": DiskState("a", current_multiplier=0.2), "b": DiskState("b", current_multiplier=0.6),
                  "c": DiskState("c", current_multiplier=0.7), "d": DiskState("d", current_multiplier=0.8)}
        assert raid5_throughput(array, states, models) == pytest.approx(20.0)

        states["a"] = DiskState("a", responsive=False, current_multiplier=0.0, unresponsive_since=0.0)
        assert raid5_throughput(array, states, models) == 0.0

        array.dropped.append("a")
        array.status = RaidStatus.DEGRADED
        assert raid5_throughput(array, states, models) == pytest.approx(60.0)

    def test_failed_array_is_unavailable(self):
        models = {m: disk(m) for m in self.MEMBERS}
        array = Raid5Array("r", list(self.MEMBERS), status=RaidStatus.FAILED)
        with pytest.raises(StorageUnavailableError):
            raid5_throughput(array, {m: DiskState(m) for m in self.MEMBERS}, models)


class TestStorageTarget:

    def test_build_models_applies_overrides_and_jitter(self, calibration):
        specs = [DiskSpec("d1"), DiskSpec("d2", overrides={"unresponsive_threshold_db": 40.0}),
                 DiskSpec("d3", kind=DiskKind.SOLID_STATE)]
        first = build_disk_models(specs, calibration, threshold_jitter_db=0.5, rng=np.random.default_rng(1))
        again = build_disk_models(specs, calibration, threshold_jitter_db=0.5, rng=np.random.default_rng(1))
        assert first == again
        assert abs(first["d1"].unresponsive_threshold_db - 37.0) <= 0.5
        assert first["d2"].unresponsive_threshold_db == 40.0
        assert first["d1"].baseline_throughput == 180.0
        assert first["d3"].kind == DiskKind.SOLID_STATE

    def test_array_lifecycle_under_constant_tone(self, calibration):
        specs = [DiskSpec(f"d{i}") for i in range(4)]
        target = StorageTarget.from_specs(
            build_disk_models(specs, calibration),
            [ArraySpec("r0", tuple(s.disk_id for s in specs), drop_timeout_s=5.0, degraded_drop_timeout_s=10.0)])
        events = []
        for k in range(200):
            events.extend(target.step(loud(38.0), 1.0, float(k)))
        raid = [(e.time, e.description) for e in events if e.kind == "raid-event"]
        assert raid == [(65.0, "drop d0"), (65.0, "degraded (3 members)"),
                        (70.0, "drop d1"), (70.0, "failed")]
        assert target.is_failed("r0")
        assert target.fraction("r0") == 0.0
        with pytest.raises(StorageUnavailableError):
            target.throughput("r0")

    def test_shielded_disks_hear_nothing(self, calibration):
        target = StorageTarget(build_disk_models([DiskSpec("uw"), DiskSpec("land")], calibration))
        target.shielded.add("land")
        target.step(loud(30.0), 1.0, 0.0)
        assert target.fraction("uw") == pytest.approx(0.35)
        assert target.fraction("land") == 1.0

    def test_carry_permanent_damage(self, calibration):
        models = build_disk_models([DiskSpec("d")], calibration)
        first = StorageTarget(models)
        first.states["d"] = DiskState("d", current_multiplier=0.5, permanent_multiplier=0.9)
        second = StorageTarget(models)
        second.carry_permanent_damage(first)
        assert second.states["d"].permanent_multiplier == 0.9
        assert second.states["d"].responsive

    def test_unknown_storage_id(self, lone_disk):
        with pytest.raises(KeyError):
            lone_disk().members("nope")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
