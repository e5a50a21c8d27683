"""
Drive and RAID-5 behaviour under acoustic excitation.

``disk_step`` and the throughput helpers are pure; ``raid5_step`` mutates the
array it is given and reports what happened as EventRecords. ``StorageTarget``
bundles disks and arrays for the workload runner and the engine.
"""

import logging
from dataclasses import replace
from typing import Dict, Iterable, List, Optional, Sequence, Set

import numpy as np

from models.acoustic_models import EffectiveExcitation, SILENT
from models.calibration_models import Calibration
from models.engine_models import ArraySpec, DiskSpec, EventRecord
from models.storage_models import (
    Curve, DiskKind, DiskModel, DiskState, Raid5Array, RaidStatus,
)
from utils.errors import ConfigurationError, StorageUnavailableError

RAID_EVENT = "raid-event"
DISK_EVENT = "disk-state"


def degradation_multiplier(delta_spl: float, curve: Curve, combined_factor: float = 1.0) -> float:
    """Throughput multiplier for a level above noise.

    1.0 below the first knot, the last multiplier above the last knot, linear in
    between. ``combined_factor`` scales the drop fraction, not the dB value.
    """
    if not 0.0 <= combined_factor <= 1.0:
        raise ValueError(f"combined factor must be in [0, 1], got {combined_factor}")
    xs = [x for x, _ in curve]
    ys = [y for _, y in curve]
    if delta_spl < xs[0]:
        return 1.0
    raw = float(np.interp(delta_spl, xs, ys))
    return 1.0 - (1.0 - raw) * combined_factor


def pes_displacement_ratio(delta_spl: float, curve: Curve) -> float:
    """Head position error as a percent of track width, clamped to the curve ends"""
    return float(np.interp(delta_spl, [x for x, _ in curve], [y for _, y in curve]))


def disk_step(state: DiskState, model: DiskModel, excitation: EffectiveExcitation,
              combined_factor: float, dt: float, now: float = 0.0, is_write: bool = True) -> DiskState:
    """Advance one drive by dt seconds under a constant excitation"""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if model.kind == DiskKind.SOLID_STATE:
        return state

    level = excitation.delta_spl
    factor = min(1.0, combined_factor * model.coupling)
    permanent = state.permanent_multiplier
    exposed = factor > 0.0 and level >= model.unresponsive_threshold_db

    dwell = state.dwell_accumulator_s + dt if exposed else 0.0
    responsive = state.responsive
    since = state.unresponsive_since

    if not responsive:
        # Damage accrues for the time already spent unresponsive
        permanent = max(0.0, permanent - model.permanent_damage_rate * dt)
        if not exposed:
            responsive, since = True, None
    elif dwell >= model.unresponsive_dwell_s:
        responsive, since = False, now + dt

    if responsive:
        current = permanent * degradation_multiplier(max(level, 0.0), model.curve_for(is_write), factor)
    else:
        current = 0.0
    return replace(state, responsive=responsive, current_multiplier=current,
                   dwell_accumulator_s=dwell, permanent_multiplier=permanent,
                   detected=responsive, unresponsive_since=since)


def effective_throughput(model: DiskModel, state: DiskState) -> float:
    return model.baseline_throughput * state.current_multiplier if state.responsive else 0.0


def raid5_throughput(array: Raid5Array, member_states: Dict[str, DiskState],
                     models: Dict[str, DiskModel]) -> float:
    """Write throughput: parity goes to every member, so the slowest one sets the pace"""
    if array.is_failed:
        raise StorageUnavailableError(f"array {array.array_id} has failed")
    active = array.active
    if any(not member_states[m].responsive for m in active):
        return 0.0
    return min(effective_throughput(models[m], member_states[m]) for m in active)


def raid5_step(array: Raid5Array, member_states: Dict[str, DiskState], now: float) -> List[EventRecord]:
    """Drop members that stayed unresponsive past the current timeout"""
    events: List[EventRecord] = []
    if array.is_failed:
        return events

    overdue = sorted(
        (member_states[m].unresponsive_since, array.members.index(m), m)
        for m in array.active
        if not member_states[m].responsive and member_states[m].unresponsive_since is not None
    )
    for since, _, member in overdue:
        if array.is_failed or now - since < array.current_drop_timeout() - 1e-9:
            continue
        array.dropped.append(member)
        events.append(EventRecord(now, RAID_EVENT, array.array_id, f"drop {member}"))
        if len(array.active) < array.min_members:
            array.status = RaidStatus.FAILED
            events.append(EventRecord(now, RAID_EVENT, array.array_id, "failed"))
        else:
            array.status = RaidStatus.DEGRADED
            events.append(EventRecord(now, RAID_EVENT, array.array_id,
                                      f"degraded ({len(array.active)} members)"))
    return events


def build_disk_models(specs: Sequence[DiskSpec], calibration: Calibration, environment: str = "lab",
                      threshold_jitter_db: float = 0.0,
                      rng: Optional[np.random.Generator] = None) -> Dict[str, DiskModel]:
    """DiskModels from scenario specs, calibration defaults and seeded threshold jitter"""
    defaults = calibration.disk_defaults
    try:
        write_curve = calibration.write_curve(environment)
    except KeyError:
        raise ConfigurationError(f"calibration has no write degradation curve for '{environment}'")
    read_curve = calibration.read_curve(environment)

    models = {}
    for spec in specs:
        # Draw for every disk so adding an override never shifts the other disks' jitter
        jitter = float(rng.uniform(-threshold_jitter_db, threshold_jitter_db)) if rng is not None else 0.0
        threshold = spec.overrides.get("unresponsive_threshold_db", defaults.unresponsive_threshold_db + jitter)
        models[spec.disk_id] = DiskModel(
            disk_id=spec.disk_id,
            baseline_throughput=spec.baseline_throughput or defaults.baseline_throughput,
            degradation_curve=write_curve,
            read_degradation_curve=read_curve,
            unresponsive_threshold_db=threshold,
            unresponsive_dwell_s=spec.overrides.get("unresponsive_dwell_s", defaults.unresponsive_dwell_s),
            permanent_damage_rate=spec.overrides.get("permanent_damage_rate", defaults.permanent_damage_rate),
            kind=spec.kind,
            coupling=spec.coupling,
        )
    return models


class StorageTarget:
    """Disks plus the RAID arrays built on them.

    A storage id is either an array id or the id of a disk used on its own.
    """

    def __init__(self, models: Dict[str, DiskModel], arrays: Iterable[Raid5Array] = (),
                 logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self.models = dict(models)
        self.states: Dict[str, DiskState] = {d: DiskState(disk_id=d) for d in self.models}
        self.arrays: Dict[str, Raid5Array] = {a.array_id: a for a in arrays}
        # Disks out of the sound's reach (on-land nodes)
        self.shielded: Set[str] = set()

    @classmethod
    def from_specs(cls, models: Dict[str, DiskModel], array_specs: Sequence[ArraySpec],
                   logger: Optional[logging.Logger] = None) -> 'StorageTarget':
        arrays = [Raid5Array(array_id=a.array_id, members=list(a.members), drop_timeout_s=a.drop_timeout_s,
                             degraded_drop_timeout_s=a.degraded_drop_timeout_s)
                  for a in array_specs]
        return cls(models, arrays, logger)

    def members(self, storage_id: str) -> List[str]:
        if storage_id in self.arrays:
            return list(self.arrays[storage_id].members)
        if storage_id in self.models:
            return [storage_id]
        raise KeyError(storage_id)

    def step_disks(self, excitation: EffectiveExcitation, dt: float, now: float,
                   is_write: bool = True) -> List[EventRecord]:
        """Advance every disk over [now, now + dt)"""
        events: List[EventRecord] = []
        for disk_id in sorted(self.models):
            exc = SILENT if disk_id in self.shielded else excitation
            before = self.states[disk_id]
            after = disk_step(before, self.models[disk_id], exc, exc.combined_factor, dt, now, is_write)
            self.states[disk_id] = after
            if before.responsive and not after.responsive:
                events.append(EventRecord(now + dt, DISK_EVENT, disk_id, "unresponsive"))
            elif not before.responsive and after.responsive:
                events.append(EventRecord(now + dt, DISK_EVENT, disk_id, "responsive"))
        return events

    def step_arrays(self, now: float) -> List[EventRecord]:
        events: List[EventRecord] = []
        for array_id in sorted(self.arrays):
            events.extend(raid5_step(self.arrays[array_id], self.states, now))
        return events

    def step(self, excitation: EffectiveExcitation, dt: float, now: float,
             is_write: bool = True) -> List[EventRecord]:
        """Disks then arrays; returns disk and RAID events in that order"""
        events = self.step_disks(excitation, dt, now, is_write)
        events.extend(self.step_arrays(now + dt))
        return events

    def nominal_throughput(self, storage_id: str) -> float:
        if storage_id in self.arrays:
            return min(self.models[m].baseline_throughput for m in self.arrays[storage_id].members)
        return self.models[storage_id].baseline_throughput

    def throughput(self, storage_id: str) -> float:
        """Current MB/s; raises StorageUnavailableError for a failed array"""
        if storage_id in self.arrays:
            return raid5_throughput(self.arrays[storage_id], self.states, self.models)
        return effective_throughput(self.models[storage_id], self.states[storage_id])

    def fraction(self, storage_id: str) -> float:
        """Current throughput relative to nominal; 0.0 when unavailable"""
        try:
            return self.throughput(storage_id) / self.nominal_throughput(storage_id)
        except StorageUnavailableError:
            return 0.0

    def is_failed(self, storage_id: str) -> bool:
        if storage_id in self.arrays:
            return self.arrays[storage_id].is_failed
        # A lone disk has no redundancy: a dead disk is a failed store
        return self.states[storage_id].permanent_multiplier <= 0.0

    def is_stalled(self, storage_id: str) -> bool:
        """Any in-service member unresponsive, so requests block"""
        if storage_id in self.arrays:
            array = self.arrays[storage_id]
            return any(not self.states[m].responsive for m in array.active)
        return not self.states[storage_id].responsive

    def carry_permanent_damage(self, other: 'StorageTarget'):
        """Start from another run's permanent multipliers (repeated trials on the same hardware)"""
        for disk_id, state in other.states.items():
            if disk_id in self.states:
                self.states[disk_id] = DiskState(disk_id=disk_id,
                                                 current_multiplier=state.permanent_multiplier,
                                                 permanent_multiplier=state.permanent_multiplier)
