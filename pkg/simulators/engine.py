"""
Discrete-event simulation core.

A heap of (time, kind priority, insertion sequence) events drives the storage,
data-node, database and VM models over a fixed tick. At equal times excitation
changes run first and sample ticks last, so samples see post-transition state.
"""

import heapq
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from models.acoustic_models import AcousticSource, EffectiveExcitation, SILENT
from models.calibration_models import Calibration
from models.distsys_models import (
    DbCluster, Host, Node, NodeLocation, NodeStatus, ReplicaMap, Scheduler,
)
from models.engine_models import Event, EventKind, EventRecord, MetricsLog, ScenarioConfig, SourceSpec
from simulators.acoustics import ExcitationFeed
from simulators.distsys import (
    NODE_EVENT, VmFleet, db_normalized_latency, dfs_step, drain_queue, host_shares, place_vm, rereplicate,
)
from simulators.rng import derive_rng
from simulators.storage import StorageTarget, build_disk_models, pes_displacement_ratio
from utils.config import SimulatorConfig
from utils.errors import ConfigurationError

TIME_EPSILON = 1e-9


def build_excitation_feed(spec: Optional[SourceSpec], calibration: Calibration, environment: str = "lab",
                          passive_attenuation_db: float = 0.0) -> Optional[ExcitationFeed]:
    """Feed for a scenario source; a source given as dSPL is placed so it reaches that level"""
    if spec is None:
        return None
    if environment not in calibration.media:
        raise ConfigurationError(f"calibration has no medium '{environment}'")
    common = dict(distance_m=spec.distance_m, location=spec.location, propagation=spec.propagation,
                  passive_attenuation_db=passive_attenuation_db)
    if spec.spl is None:
        level = spec.delta_spl if spec.delta_spl is not None else 0.0
        return ExcitationFeed.constant(level, calibration, environment, frequency_hz=spec.frequency_hz,
                                       orientation_deg=spec.orientation_deg, schedule=spec.schedule, **common)
    source = AcousticSource(amplitude_spl=spec.spl, frequency_hz=spec.frequency_hz,
                            orientation_deg=spec.orientation_deg, volume_schedule=spec.schedule)
    return ExcitationFeed(source, calibration, environment, **common)


@dataclass
class SimulationResult:
    metrics: MetricsLog
    events: List[EventRecord]
    summary: Dict[str, Any] = field(default_factory=dict)
    vm_durations: List[Dict[str, Any]] = field(default_factory=list)
    assignments: List[Any] = field(default_factory=list)


class SimulationEngine:
    """Runs one scenario to its horizon"""

    def __init__(self, scenario: ScenarioConfig, calibration: Calibration,
                 config: Optional[SimulatorConfig] = None, logger: Optional[logging.Logger] = None,
                 storage: Optional[StorageTarget] = None):
        self.logger = logger or logging.getLogger(__name__)
        self.scenario = scenario
        self.calibration = calibration
        self.config = config or SimulatorConfig()
        self.dt = self.config.engine.sample_period_s
        self.seed = scenario.seed

        self.feed = build_excitation_feed(scenario.source, calibration, scenario.environment,
                                          scenario.passive_attenuation_db)
        models = build_disk_models(scenario.disks, calibration, scenario.environment,
                                   scenario.threshold_jitter_db, derive_rng(self.seed, "disk-thresholds"))
        self.storage = storage or StorageTarget.from_specs(models, scenario.arrays, self.logger)

        self.nodes = [Node(n.node_id, n.location, n.storage) for n in scenario.nodes]
        for node in self.nodes:
            if node.location == NodeLocation.ON_LAND and node.storage_id:
                self.storage.shielded.update(self.storage.members(node.storage_id))
        self.node_by_id = {n.node_id: n for n in self.nodes}

        self.db = None
        if scenario.db is not None:
            self.db = DbCluster(self.nodes, scenario.db.underwater_node_count, calibration.db_latency)
        self._db_in_service = True

        self.scheduler = None
        self.fleet = None
        self._vm_due: List[tuple] = []
        self._load: Dict[str, int] = {}
        if scenario.vms is not None:
            batch = scenario.vms
            self.scheduler = Scheduler(hosts=[Host(h.host_id, h.node_id, h.capacity, h.max_vms)
                                              for h in batch.hosts],
                                       storage_weight=batch.storage_weight)
            self.fleet = VmFleet(batch.base_durations, calibration.vm_inflation, self.logger)
            self._vm_due = [(batch.start_s + i * batch.interval_s, f"vm{i:03d}") for i in range(batch.count)]

        self.replicas = self._initial_replicas(scenario.parameters.get("replication"))
        self._monitor_rng = derive_rng(self.seed, "monitoring")

        self.metrics = MetricsLog()
        self.events: List[EventRecord] = []
        self._queue: List[Event] = []
        self._sequence = 0
        self._now = 0.0
        self._excitation: EffectiveExcitation = SILENT

    def _initial_replicas(self, spec: Optional[Dict[str, Any]]) -> Optional[ReplicaMap]:
        if not spec:
            return None
        names = [n.node_id for n in self.nodes]
        factor = int(spec.get("factor", 2))
        if len(names) < factor:
            raise ConfigurationError(f"replication factor {factor} needs at least {factor} nodes")
        blocks = {f"blk{b:03d}": {names[(b + k) % len(names)] for k in range(factor)}
                  for b in range(int(spec.get("blocks", 8)))}
        return ReplicaMap(blocks, factor)

    def schedule(self, time: float, kind: EventKind, **payload):
        if time < self._now - TIME_EPSILON:
            raise RuntimeError(f"cannot schedule {kind.label} at {time} before now={self._now}")
        heapq.heappush(self._queue, Event(time, kind.value, self._sequence, kind, payload))
        self._sequence += 1

    def _log(self, records: List[EventRecord]):
        for record in records:
            self.events.append(record)
            self.logger.debug(f"[EVENT] t={record.time:.1f}s {record.kind} {record.subject}: {record.description}")

    def _excitation_at(self, t: float) -> EffectiveExcitation:
        return self.feed.at(t) if self.feed is not None else SILENT

    def _seed_queue(self):
        horizon = self.scenario.horizon_s
        n_ticks = int(round(horizon / self.dt))
        self.schedule(0.0, EventKind.EXCITATION_CHANGE)
        if self.feed is not None:
            for t in self.feed.change_times(horizon):
                if t > 0:
                    self.schedule(t, EventKind.EXCITATION_CHANGE)
        if self.fleet is not None:
            self.schedule(0.0, EventKind.VM_EVENT, initial=True)
        self.schedule(0.0, EventKind.SAMPLE_TICK)
        for k in range(1, n_ticks + 1):
            t = k * self.dt
            self.schedule(t, EventKind.DISK_STATE)
            self.schedule(t, EventKind.SAMPLE_TICK)

    def run(self) -> SimulationResult:
        self._seed_queue()
        handlers = {
            EventKind.EXCITATION_CHANGE: self._on_excitation_change,
            EventKind.DISK_STATE: self._on_disk_state,
            EventKind.RAID_EVENT: self._on_raid_event,
            EventKind.NODE_EVENT: self._on_node_event,
            EventKind.VM_EVENT: self._on_vm_event,
            EventKind.SAMPLE_TICK: self._on_sample_tick,
        }
        while self._queue:
            event = heapq.heappop(self._queue)
            self._now = event.time
            handlers[event.kind](event)
        return SimulationResult(self.metrics, self.events, self._summary(),
                                self.fleet.state_durations() if self.fleet else [],
                                list(self.scheduler.assignment_log) if self.scheduler else [])

    def _on_excitation_change(self, event: Event):
        self._excitation = self._excitation_at(event.time)
        if self.feed is not None:
            on = self.feed.source.spl_at(event.time) is not None
            text = f"dSPL {self._excitation.delta_spl:.2f} dB" if on else "source off"
            self._log([EventRecord(event.time, EventKind.EXCITATION_CHANGE.label, "source", text)])

    def _on_disk_state(self, event: Event):
        start = event.time - self.dt
        self._log(self.storage.step_disks(self._excitation_at(start), self.dt, start,
                                          self.scenario.workload.is_write))
        self.schedule(event.time, EventKind.RAID_EVENT)

    def _on_raid_event(self, event: Event):
        self._log(self.storage.step_arrays(event.time))
        heartbeat = self.config.engine.heartbeat_interval_s
        if self.nodes and self._on_cadence(event.time, heartbeat):
            self.schedule(event.time, EventKind.NODE_EVENT)
        if self.fleet is not None:
            self.schedule(event.time, EventKind.VM_EVENT)

    def _on_cadence(self, t: float, period: float) -> bool:
        ratio = t / period
        return abs(ratio - round(ratio)) < TIME_EPSILON

    def _on_node_event(self, event: Event):
        for node in self.nodes:
            records = dfs_step(node, self.storage, event.time)
            self._log(records)
            if node.status == NodeStatus.REMOVED and records and self.replicas is not None:
                healthy = [n.node_id for n in self.nodes if n.status == NodeStatus.LIVE]
                flagged = [n.node_id for n in self.nodes if n.status == NodeStatus.BLOCKED]
                self.replicas, moved = rereplicate(self.replicas, node.node_id, healthy, flagged, event.time)
                self._log(moved)

        if self.db is not None and self._db_in_service:
            if db_normalized_latency(self.db, self._underwater_level()) is None:
                self._db_in_service = False
                self._log([EventRecord(event.time, NODE_EVENT, "db", "out-of-service")])

    def _underwater_level(self) -> float:
        exc = self._excitation
        return exc.delta_spl if exc.is_effective else 0.0

    def _host_available(self) -> set:
        return {h.host_id for h in self.scheduler.hosts
                if self.node_by_id[h.node_id].status == NodeStatus.LIVE}

    def _refresh_monitoring(self):
        sigma = self.config.noise.throughput_sigma
        for host in self.scheduler.hosts:
            node = self.node_by_id[host.node_id]
            fraction = self.storage.fraction(node.storage_id) if node.storage_id else 1.0
            noisy = fraction * (1.0 + self._monitor_rng.normal(0.0, sigma)) if sigma > 0 else fraction
            host.monitored_fraction = float(np.clip(noisy, 0.0, 1.0))

    def _on_vm_event(self, event: Event):
        now = event.time
        if not event.payload.get("initial"):
            level, stalled, failed, single = {}, {}, {}, {}
            for host in self.scheduler.hosts:
                node = self.node_by_id[host.node_id]
                sid = node.storage_id
                level[host.host_id] = self._underwater_level() if node.is_underwater else 0.0
                stalled[host.host_id] = bool(sid) and self.storage.is_stalled(sid)
                failed[host.host_id] = bool(sid) and self.storage.is_failed(sid)
                single[host.host_id] = bool(sid) and sid not in self.storage.arrays
            self._log(self.fleet.step(self.dt, now, level, stalled, failed, single))

        if self._on_cadence(now, self.config.engine.monitoring_period_s):
            self._refresh_monitoring()

        available = self._host_available()
        for vm_id, host_id in drain_queue(self.scheduler, now, available, self._load):
            self.fleet.assign(vm_id, host_id)
        while self._vm_due and self._vm_due[0][0] <= now + TIME_EPSILON:
            _, vm_id = self._vm_due.pop(0)
            host_id = place_vm(self.scheduler, vm_id, now, available, self._load)
            self.fleet.instantiate(vm_id, host_id, now)
            where = host_id or "queue"
            self._log([EventRecord(now, EventKind.VM_EVENT.label, vm_id, f"placed on {where}")])

    def _on_sample_tick(self, event: Event):
        t = event.time
        exc = self._excitation
        self.metrics.record(t, "delta_spl", exc.delta_spl)
        for storage_id in self._storage_ids():
            self.metrics.record(t, "throughput_mbps", self.storage.nominal_throughput(storage_id)
                                * self.storage.fraction(storage_id), storage=storage_id)
        for disk_id in sorted(self.storage.models):
            state = self.storage.states[disk_id]
            self.metrics.record(t, "disk_multiplier", state.current_multiplier, disk=disk_id)
            exposed = disk_id not in self.storage.shielded and exc.combined_factor > 0
            pes = pes_displacement_ratio(exc.delta_spl, self.calibration.pes_curve) if exposed else 0.0
            self.metrics.record(t, "pes_pct", pes, disk=disk_id)
        if self.db is not None and self._db_in_service:
            latency = db_normalized_latency(self.db, self._underwater_level())
            if latency is not None:
                self.metrics.record(t, "db_normalized_latency", latency)
        if self.fleet is not None:
            for state, count in sorted(self.fleet.count_by_state().items()):
                self.metrics.record(t, "vm_count", count, state=state)
            for host in self.scheduler.hosts:
                self.metrics.record(t, "vm_assigned", self._load.get(host.host_id, 0), host=host.host_id)

    def _storage_ids(self) -> List[str]:
        in_arrays = {m for a in self.storage.arrays.values() for m in a.members}
        lone = [d for d in sorted(self.storage.models) if d not in in_arrays]
        return sorted(self.storage.arrays) + lone

    def _summary(self) -> Dict[str, Any]:
        summary: Dict[str, Any] = {
            "scenario": self.scenario.name,
            "seed": self.seed,
            "horizon_s": self.scenario.horizon_s,
            "events": len(self.events),
            "metric_records": len(self.metrics),
        }
        for array_id, array in sorted(self.storage.arrays.items()):
            summary[f"array.{array_id}.status"] = array.status.value
            summary[f"array.{array_id}.dropped"] = ",".join(array.dropped) or "-"
        for node in self.nodes:
            summary[f"node.{node.node_id}.status"] = node.status.value
        for storage_id in self._storage_ids():
            series = [v for _, v in self.metrics.series("throughput_mbps", storage=storage_id)]
            summary[f"throughput.{storage_id}.mean_mbps"] = float(np.mean(series)) if series else 0.0
        if self.db is not None:
            summary["db.in_service"] = self._db_in_service
        if self.fleet is not None:
            for state, count in sorted(self.fleet.count_by_state().items()):
                summary[f"vm.{state}"] = count
            for host_id, count in sorted(host_shares(self.scheduler.assignment_log).items()):
                summary[f"vm.assigned.{host_id}"] = count
        if self.replicas is not None:
            summary["replicas.under_replicated"] = len(self.replicas.under_replicated())
        return summary


def run(scenario: ScenarioConfig, calibration: Calibration, config: Optional[SimulatorConfig] = None,
        logger: Optional[logging.Logger] = None) -> SimulationResult:
    """Execute a validated scenario; same scenario and seed give identical logs"""
    return SimulationEngine(scenario, calibration, config, logger).run()
