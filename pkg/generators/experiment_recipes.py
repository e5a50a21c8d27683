"""
Experiment Recipes

One recipe per experiment subcommand. A recipe reads its knobs from the scenario's
``parameters`` block, drives the simulators, writes its CSVs through the
ResultExporter and returns a flat summary dict.
"""

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from analyzers.detector import ThroughputDetector, evaluate, profile_disk
from models.acoustic_models import AcousticSource
from models.calibration_models import Calibration
from models.detector_models import PcmConfig
from models.distsys_models import DbCluster, NodeLocation, NodeStatus, VMState
from models.engine_models import DiskSpec, EventRecord, ScenarioConfig
from models.storage_models import WorkloadKind
from models.workload_models import ThroughputTrace, TraceOperation, TraceRequest, WorkloadSpec
from generators.csv_exporter import ResultExporter
from parsers.msr_trace_parser import load_msr_trace
from parsers.trace_csv import ProfileStore
from simulators.acoustics import (
    ExcitationFeed, angle_factor, attenuate_amplitude, boundary_load, reflection_transmission, wave_speeds,
)
from simulators.cache import bandwidth_change, latency_samples
from simulators.distsys import NODE_EVENT, db_normalized_latency, host_shares, vm_state_duration
from simulators.engine import SimulationEngine, SimulationResult
from simulators.rng import derive_rng
from simulators.storage import RAID_EVENT, DISK_EVENT, StorageTarget, build_disk_models
from simulators.workload import calibrated_service_rate, replay_trace, run_benchmark
from utils.config import SimulatorConfig
from utils.errors import ConfigurationError
from utils.logger import SimLogger

DEFAULT_FREQUENCY_HZ = 5200.0
SWEEP_FLAG_PCT = 20.0
PASCAL_PER_MICROPASCAL = 1e-6


@dataclass
class RecipeContext:
    """Everything a recipe needs for one invocation"""
    scenario: ScenarioConfig
    calibration: Calibration
    config: SimulatorConfig
    exporter: ResultExporter
    sim_logger: SimLogger
    trials: Optional[int] = None

    @property
    def seed(self) -> int:
        return self.scenario.seed

    @property
    def logger(self):
        return self.sim_logger.get_logger()

    def param(self, key: str, default: Any = None) -> Any:
        return self.scenario.parameters.get(key, default)

    def trial_count(self, default: int) -> int:
        return self.trials if self.trials is not None else int(self.param("trials", default))


def fem_attenuation(base_displacement_nm: float, alpha_np_per_m: float,
                    distances_m: Sequence[float]) -> List[Tuple[float, float]]:
    """(distance, displacement) after exponential attenuation"""
    return [(float(d), attenuate_amplitude(base_displacement_nm, alpha_np_per_m, float(d))) for d in distances_m]


def flagged_bands(frequencies: Sequence[float], flags: Sequence[bool]) -> List[Tuple[float, float]]:
    """Contiguous runs of flagged frequencies as (first, last)"""
    bands: List[Tuple[float, float]] = []
    start = prev = None
    for f, flag in zip(frequencies, flags):
        if flag and start is None:
            start = f
        if not flag and start is not None:
            bands.append((start, prev))
            start = None
        prev = f
    if start is not None:
        bands.append((start, prev))
    return bands


def cascade_sequence(events: Sequence[EventRecord], node_ids: Sequence[str]) -> List[str]:
    """Node liveness changes and RAID member drops, in log order"""
    statuses = {s.value for s in NodeStatus}
    sequence = []
    for e in events:
        if e.kind == RAID_EVENT and e.description.startswith("drop "):
            sequence.append("drop")
        elif e.kind == NODE_EVENT and e.subject in node_ids and e.description in statuses:
            sequence.append(e.description)
    return sequence


def liveness_rows(result: SimulationResult, disk_ids: Sequence[str],
                  node_ids: Sequence[str]) -> List[Dict[str, Any]]:
    """Per sample: 1 for a responsive in-service disk / live node, else 0"""
    disk_up = {d: 1 for d in disk_ids}
    dropped = set()
    node_up = {n: 1 for n in node_ids}
    events = result.events
    i = 0
    rows = []
    for t, _ in result.metrics.series("delta_spl"):
        while i < len(events) and events[i].time <= t:
            e = events[i]
            if e.kind == DISK_EVENT and e.subject in disk_up:
                disk_up[e.subject] = int(e.description == "responsive")
            elif e.kind == RAID_EVENT and e.description.startswith("drop "):
                dropped.add(e.description[len("drop "):])
            elif e.kind == NODE_EVENT and e.subject in node_up:
                node_up[e.subject] = int(e.description == NodeStatus.LIVE.value)
            i += 1
        row: Dict[str, Any] = {"time_min": t / 60.0}
        row.update({d: 0 if d in dropped else disk_up[d] for d in disk_ids})
        row.update(node_up)
        rows.append(row)
    return rows


def synthetic_trace(n_requests: int, span_s: float, rng: np.random.Generator) -> List[TraceRequest]:
    """MSR-like request stream: uniform arrivals, mixed sizes, 70 % writes"""
    stamps = np.sort(rng.uniform(0.0, span_s, n_requests))
    sizes = rng.choice([4096, 16384, 65536], n_requests)
    writes = rng.random(n_requests) < 0.7
    offsets = rng.integers(0, 1 << 20, n_requests) * 4096
    return [TraceRequest(float(t), TraceOperation.WRITE if w else TraceOperation.READ, int(o), int(s))
            for t, w, o, s in zip(stamps, writes, offsets, sizes)]


class ExperimentRecipes:
    """Recipe implementations keyed by subcommand name"""

    def __init__(self, context: RecipeContext):
        self.ctx = context
        self.logger = context.logger
        self.recipes: Dict[str, Callable[[], Dict[str, Any]]] = {
            "sweep": self.sweep,
            "volume-curve": self.volume_curve,
            "positions": self.positions,
            "angle": self.angle,
            "hdfs-cascade": self.hdfs_cascade,
            "db-latency": self.db_latency,
            "vm-migration": self.vm_migration,
            "snia-replay": self.snia_replay,
            "cache-bench": self.cache_bench,
            "fem-attenuation": self.fem_attenuation,
            "detect-profile": self.detect_profile,
            "detect-eval": self.detect_eval,
            "run": self.run,
        }

    def execute(self, name: str) -> Dict[str, Any]:
        if name not in self.recipes:
            raise ConfigurationError(f"unknown recipe '{name}'")
        summary = {"recipe": name, "scenario": self.ctx.scenario.name, "seed": self.ctx.seed}
        summary.update(self.recipes[name]())
        return summary

    # Shared helpers

    @property
    def _environment(self) -> str:
        return self.ctx.scenario.environment

    @property
    def _frequency(self) -> float:
        source = self.ctx.scenario.source
        return source.frequency_hz if source is not None else DEFAULT_FREQUENCY_HZ

    def _disk_spec(self) -> DiskSpec:
        return self.ctx.scenario.disks[0] if self.ctx.scenario.disks else DiskSpec("disk0")

    def _lone_disk(self, spec: DiskSpec) -> StorageTarget:
        models = build_disk_models([spec], self.ctx.calibration, self._environment)
        return StorageTarget(models, logger=self.logger)

    def _workload(self) -> WorkloadSpec:
        return WorkloadSpec(kind=self.ctx.scenario.workload,
                            duration_s=float(self.ctx.param("duration_s", self.ctx.config.detector.trace_duration_s)))

    def _trace(self, spec: DiskSpec, feed: Optional[ExcitationFeed], label: str) -> Tuple[ThroughputTrace, float]:
        storage = self._lone_disk(spec)
        trace = run_benchmark(self._workload(), storage, spec.disk_id, feed,
                              self.ctx.config.noise.throughput_sigma, derive_rng(self.ctx.seed, label),
                              self.ctx.config.engine.sample_period_s)
        return trace, storage.nominal_throughput(spec.disk_id)

    def _normalized_throughput(self, feed: Optional[ExcitationFeed], label: str, trials: int) -> float:
        """Mean of ``trials`` benchmark runs relative to the disk's baseline"""
        spec = self._disk_spec()
        values = []
        for trial in range(trials):
            trace, nominal = self._trace(spec, feed, f"{label}-trial{trial}")
            values.append(trace.mean() / nominal)
        return float(np.mean(values))

    def _constant_feed(self, delta_spl_db: float, **kwargs) -> ExcitationFeed:
        kwargs.setdefault("frequency_hz", self._frequency)
        return ExcitationFeed.constant(delta_spl_db, self.ctx.calibration, self._environment,
                                       passive_attenuation_db=self.ctx.scenario.passive_attenuation_db, **kwargs)

    def _engine(self, scenario: ScenarioConfig) -> SimulationEngine:
        return SimulationEngine(scenario, self.ctx.calibration, self.ctx.config, self.logger)

    # Recipes

    def sweep(self) -> Dict[str, Any]:
        level = float(self.ctx.param("delta_spl_db", 30.0))
        start = float(self.ctx.param("frequency_start_hz", 100.0))
        stop = float(self.ctx.param("frequency_stop_hz", 12000.0))
        step = float(self.ctx.param("frequency_step_hz", 100.0))
        threshold = float(self.ctx.param("flag_threshold_pct", SWEEP_FLAG_PCT))
        trials = self.ctx.trial_count(3)

        frequencies = np.arange(start, stop + step / 2, step)
        rows = []
        for f in frequencies:
            fraction = self._normalized_throughput(self._constant_feed(level, frequency_hz=float(f)),
                                                   f"sweep-{f:.0f}", trials)
            decrease = 100.0 * (1.0 - fraction)
            rows.append({"frequency_hz": float(f), "normalized_throughput": fraction,
                         "decrease_pct": decrease, "flagged": decrease > threshold})
        self.ctx.exporter.export_table(rows, "sweep.csv",
                                       ["frequency_hz", "normalized_throughput", "decrease_pct", "flagged"])
        bands = flagged_bands([r["frequency_hz"] for r in rows], [r["flagged"] for r in rows])
        return {
            "delta_spl_db": level,
            "trials": trials,
            "frequencies": len(rows),
            "flagged_count": sum(r["flagged"] for r in rows),
            "flagged_bands_hz": ";".join(f"{lo:.0f}-{hi:.0f}" for lo, hi in bands) or "-",
        }

    def volume_curve(self) -> Dict[str, Any]:
        volumes = self.ctx.param("volumes", list(range(20, 41)))
        trials = self.ctx.trial_count(3)
        workload = self.ctx.scenario.workload.value
        rows = [{"delta_spl_db": float(v),
                 "normalized_throughput": self._normalized_throughput(self._constant_feed(float(v)),
                                                                      f"volume-{v}", trials),
                 "environment": self._environment, "workload": workload}
                for v in volumes]
        self.ctx.exporter.export_table(rows, "volume_curve.csv",
                                       ["delta_spl_db", "normalized_throughput", "environment", "workload"])
        summary = {"environment": self._environment, "workload": workload, "trials": trials}
        for row in rows:
            summary[f"throughput_at_{row['delta_spl_db']:g}db"] = row["normalized_throughput"]

        distances = self.ctx.param("distances_m")
        if distances:
            summary.update(self._distance_curve(distances, trials))
        return summary

    def _distance_curve(self, distances: Sequence[float], trials: int) -> Dict[str, Any]:
        medium = self.ctx.calibration.medium(self._environment)
        source_spl = float(self.ctx.param("source_spl", medium.curve_source_spl or 150.0))
        propagation = self.ctx.param("propagation", "empirical")
        source = AcousticSource(amplitude_spl=source_spl, frequency_hz=self._frequency)
        rows = []
        for d in distances:
            feed = ExcitationFeed(source, self.ctx.calibration, self._environment, distance_m=float(d),
                                  propagation=propagation,
                                  passive_attenuation_db=self.ctx.scenario.passive_attenuation_db)
            rows.append({"distance_m": float(d), "delta_spl_db": feed.at(0.0).delta_spl,
                         "normalized_throughput": self._normalized_throughput(feed, f"distance-{d}", trials)})
        self.ctx.exporter.export_table(rows, "distance_curve.csv",
                                       ["distance_m", "delta_spl_db", "normalized_throughput"])
        return {"source_spl": source_spl,
                **{f"drop_pct_at_{r['distance_m']:g}m": 100.0 * (1.0 - r["normalized_throughput"]) for r in rows}}

    def positions(self) -> Dict[str, Any]:
        level = float(self.ctx.param("delta_spl_db", 30.0))
        trials = self.ctx.trial_count(3)
        factors = self.ctx.calibration.position_factors
        rows = [{"location": loc, "position_factor": factors[loc],
                 "normalized_throughput": self._normalized_throughput(self._constant_feed(level, location=loc),
                                                                      f"position-{loc}", trials)}
                for loc in sorted(factors)]
        self.ctx.exporter.export_table(rows, "positions.csv",
                                       ["location", "position_factor", "normalized_throughput"])
        best = min(rows, key=lambda r: r["normalized_throughput"])
        return {"delta_spl_db": level, "most_effective_location": best["location"],
                **{f"throughput_at_location_{r['location']}": r["normalized_throughput"] for r in rows}}

    def angle(self) -> Dict[str, Any]:
        level = float(self.ctx.param("delta_spl_db", 30.0))
        angles = self.ctx.param("angles_deg", [0.0, 45.0, 90.0])
        trials = self.ctx.trial_count(3)
        table = self.ctx.calibration.angle_table
        rows = [{"orientation_deg": float(a), "angle_factor": angle_factor(float(a), table),
                 "normalized_throughput": self._normalized_throughput(
                     self._constant_feed(level, orientation_deg=float(a)), f"angle-{a}", trials)}
                for a in angles]
        self.ctx.exporter.export_table(rows, "angle.csv",
                                       ["orientation_deg", "angle_factor", "normalized_throughput"])
        return {"delta_spl_db": level,
                **{f"angle_factor_{r['orientation_deg']:g}deg": r["angle_factor"] for r in rows}}

    def hdfs_cascade(self) -> Dict[str, Any]:
        scenario = self.ctx.scenario
        if not scenario.arrays or not scenario.nodes:
            raise ConfigurationError("hdfs-cascade needs at least one array and one data node")
        result = self._engine(scenario).run()
        self._export_run(result)

        node_ids = [n.node_id for n in scenario.nodes]
        disk_ids = [d.disk_id for d in scenario.disks]
        self.ctx.exporter.export_table(liveness_rows(result, disk_ids, node_ids), "liveness.csv",
                                       ["time_min"] + disk_ids + node_ids)
        sequence = cascade_sequence(result.events, node_ids)
        summary = dict(result.summary)
        summary["cascade"] = ",".join(sequence) or "-"
        drops = [e.time for e in result.events if e.kind == RAID_EVENT and e.description.startswith("drop ")]
        removed = [e.time for e in result.events
                   if e.kind == NODE_EVENT and e.description == NodeStatus.REMOVED.value]
        summary["first_drop_s"] = drops[0] if drops else None
        summary["node_removed_s"] = removed[0] if removed else None
        return summary

    def db_latency(self) -> Dict[str, Any]:
        volumes = self.ctx.param("volumes", list(range(0, 42, 2)))
        counts = self.ctx.param("node_counts", sorted(self.ctx.calibration.db_latency))
        clusters = {n: DbCluster([], int(n), self.ctx.calibration.db_latency) for n in counts}
        rows = []
        for v in volumes:
            row: Dict[str, Any] = {"delta_spl_db": float(v)}
            for n, cluster in clusters.items():
                row[f"nodes_{n}"] = db_normalized_latency(cluster, float(v))
            rows.append(row)
        self.ctx.exporter.export_table(rows, "db_latency.csv", ["delta_spl_db"] + [f"nodes_{n}" for n in counts])
        summary: Dict[str, Any] = {}
        for n, cluster in clusters.items():
            table = self.ctx.calibration.db_latency[int(n)]
            summary[f"nodes_{n}.latency_at_out_of_service_db"] = db_normalized_latency(
                cluster, table.out_of_service_above_db)
            summary[f"nodes_{n}.out_of_service_above_db"] = table.out_of_service_above_db
        return summary

    def vm_migration(self) -> Dict[str, Any]:
        scenario = self.ctx.scenario
        if scenario.vms is None or scenario.source is None:
            raise ConfigurationError("vm-migration needs a 'vms' block and a 'source'")
        trials = max(1, self.ctx.trial_count(1))
        underwater = {h.host_id for h in scenario.vms.hosts
                      if self._node_location(h.node_id) == NodeLocation.UNDERWATER}

        baseline = self._engine(replace(scenario, source=None)).run()
        baseline_share = self._underwater_share(baseline, underwater)

        summary: Dict[str, Any] = {"baseline_underwater_share": baseline_share}
        previous: Optional[StorageTarget] = None
        first: Optional[SimulationResult] = None
        for trial in range(trials):
            engine = self._engine(scenario)
            if previous is not None:
                engine.storage.carry_permanent_damage(previous)
            result = engine.run()
            previous = engine.storage
            share = self._underwater_share(result, underwater)
            reduction = 1.0 - share / baseline_share if baseline_share else None
            summary[f"trial{trial}.underwater_share"] = share
            summary[f"trial{trial}.underwater_share_reduction"] = reduction
            for storage_id in sorted(engine.storage.arrays):
                summary[f"trial{trial}.{storage_id}.permanent_multiplier"] = min(
                    engine.storage.states[m].permanent_multiplier for m in engine.storage.members(storage_id))
            if first is None:
                first = result

        self._export_run(first)
        self.ctx.exporter.export_table(first.vm_durations, "vm_states.csv", ["vm", "state", "duration_s"])
        self.ctx.exporter.export_table(self._window_rows(baseline, first, underwater), "vm_migration.csv",
                                       ["window_start_s", "delta_spl_db", "underwater_assigned",
                                        "onland_assigned", "baseline_underwater_assigned"])
        self.ctx.exporter.export_table(self._state_latency_rows(), "vm_state_latency.csv",
                                       ["delta_spl_db", "PROLOG", "RUNNING"])

        summary["attack_underwater_share"] = summary["trial0.underwater_share"]
        summary["underwater_share_reduction"] = summary["trial0.underwater_share_reduction"]
        summary.update({f"attack.{k}": v for k, v in first.summary.items() if k.startswith(("vm.", "array."))})
        return summary

    def _node_location(self, node_id: str) -> NodeLocation:
        for node in self.ctx.scenario.nodes:
            if node.node_id == node_id:
                return node.location
        raise ConfigurationError(f"unknown node '{node_id}'")

    @staticmethod
    def _underwater_share(result: SimulationResult, underwater: set) -> float:
        shares = host_shares(result.assignments)
        total = sum(shares.values())
        return sum(c for h, c in shares.items() if h in underwater) / total if total else 0.0

    def _window_rows(self, baseline: SimulationResult, attack: SimulationResult,
                     underwater: set) -> List[Dict[str, Any]]:
        window = float(self.ctx.param("window_s", self.ctx.scenario.source.schedule.step_period_s or 210.0))
        n_windows = int(math.ceil(self.ctx.scenario.horizon_s / window))
        levels = dict(attack.metrics.series("delta_spl"))

        def counts(result: SimulationResult, w: int) -> Tuple[int, int]:
            placed = [a for a in result.assignments
                      if a.host_id is not None and w * window <= a.time_s < (w + 1) * window]
            under = sum(1 for a in placed if a.host_id in underwater)
            return under, len(placed) - under

        rows = []
        for w in range(n_windows):
            under, onland = counts(attack, w)
            rows.append({"window_start_s": w * window, "delta_spl_db": levels.get(w * window),
                         "underwater_assigned": under, "onland_assigned": onland,
                         "baseline_underwater_assigned": counts(baseline, w)[0]})
        return rows

    def _state_latency_rows(self) -> List[Dict[str, Any]]:
        inflation = self.ctx.calibration.vm_inflation
        rows = []
        for level in self.ctx.param("latency_volumes", list(range(20, 37, 2))):
            row: Dict[str, Any] = {"delta_spl_db": float(level)}
            for state in (VMState.PROLOG, VMState.RUNNING):
                row[state.value] = vm_state_duration(state, 1.0, float(level), inflation)
            rows.append(row)
        return rows

    def snia_replay(self) -> Dict[str, Any]:
        scenario = self.ctx.scenario
        if not scenario.disks:
            raise ConfigurationError("snia-replay needs disks (and usually an array)")
        default_storage = scenario.arrays[0].array_id if scenario.arrays else scenario.disks[0].disk_id
        storage_id = self.ctx.param("storage", default_storage)
        budgets = self.ctx.calibration.benchmark_budgets_s
        traces = self.ctx.param("traces", [{"name": name} for name in sorted(budgets)])
        volumes = self.ctx.param("volumes", [0, 30, 32, 34, 36, 38, 40])
        trials = self.ctx.trial_count(3)

        rows = []
        for spec in traces:
            name = spec["name"]
            budget = float(spec.get("budget_s", budgets.get(name, 0.0)))
            if budget <= 0:
                raise ConfigurationError(f"no wall-clock budget for trace '{name}'")
            requests = self._replay_requests(spec, budget)
            rate = calibrated_service_rate(requests, budget)
            for v in volumes:
                feed = self._constant_feed(float(v)) if v > 0 else None
                for trial in range(trials):
                    models = build_disk_models(scenario.disks, self.ctx.calibration, self._environment,
                                               scenario.threshold_jitter_db,
                                               derive_rng(self.ctx.seed, f"snia-{name}-{v}-trial{trial}"))
                    storage = StorageTarget.from_specs(models, scenario.arrays, self.logger)
                    outcome = replay_trace(requests, storage, storage_id, feed, budget, rate,
                                           self.ctx.config.engine.sample_period_s)
                    rows.append({"trace": name, "delta_spl_db": float(v), "trial": trial,
                                 "fulfilled": outcome.fulfilled, "total": outcome.total,
                                 "fulfilled_pct": 100.0 * outcome.fulfilled_fraction,
                                 "failed": outcome.aborted})
        columns = ["trace", "delta_spl_db", "trial", "fulfilled", "total", "fulfilled_pct", "failed"]
        self.ctx.exporter.export_table(rows, "snia_replay.csv", columns)

        frame = pd.DataFrame(rows, columns=columns)
        pivot = frame.pivot_table(index="delta_spl_db", columns="trace", values="fulfilled_pct", aggfunc="mean")
        self.ctx.exporter.export_table(pivot.reset_index().to_dict("records"), "snia_summary.csv",
                                       ["delta_spl_db"] + [s["name"] for s in traces])
        summary: Dict[str, Any] = {"storage": storage_id, "trials": trials}
        for (name, level), value in frame.groupby(["trace", "delta_spl_db"])["fulfilled_pct"].mean().items():
            summary[f"{name}.fulfilled_pct_at_{level:g}db"] = float(value)
        return summary

    def _replay_requests(self, spec: Dict[str, Any], budget: float) -> List[TraceRequest]:
        if "file" in spec:
            path = Path(spec["file"])
            if not path.is_absolute() and self.ctx.scenario.path:
                path = Path(self.ctx.scenario.path).parent / path
            requests = load_msr_trace(str(path), spec.get("limit"), self.logger)
            if not requests:
                raise ConfigurationError(f"trace '{spec['name']}' has no requests")
            return requests
        n = int(spec.get("requests", self.ctx.param("synthetic_requests", 2000)))
        return synthetic_trace(n, 0.5 * budget, derive_rng(self.ctx.seed, f"trace-{spec['name']}"))

    def cache_bench(self) -> Dict[str, Any]:
        sizes = [float(s) for s in self.ctx.param("cache_sizes_gb", [0.5, 1.0, 1.5, 2.0])]
        workloads = [WorkloadKind(w) for w in self.ctx.param("workloads", [w.value for w in WorkloadKind])]
        n = int(self.ctx.param("samples", 10000))
        cdf_size = float(self.ctx.param("cdf_cache_gb", 1.0))

        rows = []
        summary: Dict[str, Any] = {"samples": n}
        for kind in workloads:
            for size in sizes:
                label = f"cache-{kind.value}-{size:g}"
                change = bandwidth_change(self.ctx.calibration.cache_config(size), kind, n,
                                          derive_rng(self.ctx.seed, f"{label}-benign"),
                                          derive_rng(self.ctx.seed, f"{label}-attacked"))
                rows.append(change.to_dict())
                summary[f"{kind.short_name}.{size:g}gb.degradation_pct"] = change.degradation_pct
            self._export_cdf(kind, cdf_size, n)
        self.ctx.exporter.export_table(rows, "cache_bandwidth.csv",
                                       ["workload", "cache_size_gb", "hit_ratio", "mean_latency_benign_ms",
                                        "mean_latency_attacked_ms", "bandwidth_degradation_pct"])
        return summary

    def _export_cdf(self, kind: WorkloadKind, size: float, n: int):
        cfg = self.ctx.calibration.cache_config(size)
        benign = np.sort(latency_samples(cfg, kind, False, n, derive_rng(self.ctx.seed, f"cdf-{kind.value}-benign")))
        attacked = np.sort(latency_samples(cfg, kind, True, n,
                                           derive_rng(self.ctx.seed, f"cdf-{kind.value}-attacked")))
        high = max(cfg.miss_latency_band_attacked[1], cfg.miss_latency_band_benign[1],
                   (cfg.read_miss_latency_band_attacked or (0.0, 0.0))[1])
        grid = np.geomspace(cfg.hit_latency_band[0], high, 200)
        rows = [{"latency_ms": float(x), "cdf_benign": float(b), "cdf_attacked": float(a)}
                for x, b, a in zip(grid, np.searchsorted(benign, grid, side="right") / n,
                                   np.searchsorted(attacked, grid, side="right") / n)]
        self.ctx.exporter.export_table(rows, f"cdf_{kind.short_name}.csv", ["latency_ms", "cdf_benign", "cdf_attacked"])

    def fem_attenuation(self) -> Dict[str, Any]:
        cal = self.ctx.calibration
        base = float(self.ctx.param("base_displacement_nm", cal.displacement_reference.displacement_nm))
        alpha_np_per_km = float(self.ctx.param("alpha_np_per_km", 0.1))
        distances = self.ctx.param("distances_m", [float(d) for d in range(0, 1001, 50)])
        series = fem_attenuation(base, alpha_np_per_km / 1000.0, distances)
        self.ctx.exporter.export_table([{"distance_m": d, "displacement_nm": x} for d, x in series],
                                       "fem_attenuation.csv", ["distance_m", "displacement_nm"])

        try:
            solid = cal.solids[self.ctx.param("solid", "steel")]
            medium = cal.media[self.ctx.param("medium", "seawater")]
        except KeyError as e:
            raise ConfigurationError(f"calibration has no material {e}")
        v_long, v_shear = wave_speeds(solid)
        reflection, transmission = reflection_transmission(medium.acoustic_impedance, solid.acoustic_impedance)
        source_spl = float(self.ctx.param("source_spl", cal.displacement_reference.source_spl))
        pressure = PASCAL_PER_MICROPASCAL * 10.0 ** (source_spl / 20.0)
        load = boundary_load(pressure, (0.0, 0.0, 1.0))
        source = AcousticSource(source_spl, float(self.ctx.param("frequency_hz", 5100.0)))
        return {
            "base_displacement_nm": base,
            "alpha_np_per_km": alpha_np_per_km,
            "displacement_at_max_distance_nm": series[-1][1] if series else None,
            "max_distance_m": series[-1][0] if series else None,
            f"{solid.name}.longitudinal_speed_m_s": v_long,
            f"{solid.name}.shear_speed_m_s": v_shear,
            f"{medium.name}_to_{solid.name}.reflection": reflection,
            f"{medium.name}_to_{solid.name}.transmission": transmission,
            "boundary_pressure_pa": pressure,
            "boundary_force_n_per_m2": float(np.linalg.norm(load.force_per_area)),
            f"{medium.name}.wavenumber_rad_per_m": medium.wavenumber(source.angular_frequency),
        }

    def _detector_disks(self) -> List[DiskSpec]:
        return list(self.ctx.scenario.disks) or [DiskSpec(f"disk{i}") for i in range(4)]

    def _benign_pool(self, disks: Sequence[DiskSpec], count: int, prefix: str) -> Dict[str, List[ThroughputTrace]]:
        return {d.disk_id: [self._trace(d, None, f"{prefix}-{d.disk_id}-{i}")[0] for i in range(count)]
                for d in disks}

    def detect_profile(self) -> Dict[str, Any]:
        disks = self._detector_disks()
        trials = self.ctx.trial_count(self.ctx.config.detector.profiling_trials)
        traces = self._benign_pool(disks, trials, "profile")
        store = ProfileStore(str(self.ctx.exporter.output_dir / self.ctx.param("profile_dir", "profiles")),
                             self.logger)
        manifest = store.save(traces, {"seed": self.ctx.seed, "trials": trials,
                                       "duration_s": self._workload().duration_s})
        self.ctx.exporter.written.append(str(manifest))

        detector_cfg = self.ctx.config.detector
        pcm = PcmConfig(detector_cfg.resample_count, detector_cfg.normalization, detector_cfg.area_rule)
        rows = []
        for disk_id, disk_traces in sorted(traces.items()):
            profile = profile_disk(disk_traces, pcm, disk_id)
            rows.append({"disk": disk_id, "traces": len(disk_traces),
                         "centroid_mean_mbps": profile.centroid.mean(),
                         "mean_distance": float(profile.calibration_distances.mean()),
                         "std_distance": float(profile.calibration_distances.std())})
        self.ctx.exporter.export_table(rows, "profile_summary.csv",
                                       ["disk", "traces", "centroid_mean_mbps", "mean_distance", "std_distance"])
        return {"disks": len(disks), "trials": trials, "profile_store": str(store.directory)}

    def detect_eval(self) -> Dict[str, Any]:
        cfg = self.ctx.config.detector
        disks = self._detector_disks()
        pcm = PcmConfig(cfg.resample_count, cfg.normalization, cfg.area_rule)

        store_dir = self.ctx.param("profile_store")
        if store_dir:
            profiling = ProfileStore(store_dir, self.logger).load()
        else:
            profiling = self._benign_pool(disks, self.ctx.trial_count(cfg.profiling_trials), "profile")
        profiles = {d: profile_disk(t, pcm, d) for d, t in sorted(profiling.items())}
        detector = ThroughputDetector(profiles, cfg, self.logger)

        pool_size = int(self.ctx.param("pool_size", 100))
        combinations = int(self.ctx.param("combinations", 1000))
        workers = self.ctx.config.max_workers if self.ctx.config.parallel_processing else 1
        benign = self._benign_pool(disks, pool_size, "benign")

        rows = []
        summary: Dict[str, Any] = {"combinations": combinations, "pool_size": pool_size}
        for v in self.ctx.param("volumes", [26, 28, 30]):
            feed = self._constant_feed(float(v))
            attacked = {d.disk_id: [self._trace(d, feed, f"attack-{v}-{d.disk_id}-{i}")[0] for i in range(pool_size)]
                        for d in disks}
            result = evaluate(detector, benign, attacked, combinations,
                              self.ctx.seed, float(v), workers)
            rows.append(result.to_dict())
            self.ctx.sim_logger.log_detection_summary(float(v), result.fpr or 0.0, result.tpr)
            summary[f"fpr_at_{v}db"] = result.fpr
            summary[f"tpr_at_{v}db"] = result.tpr
        self.ctx.exporter.export_table(rows, "detect_eval.csv",
                                       ["volume_db", "n_combinations", "fpr", "tpr", "fpr_any_attacked",
                                        "tpr_any_attacked", "attack_cases", "benign_cases"])
        return summary

    def run(self) -> Dict[str, Any]:
        result = self._engine(self.ctx.scenario).run()
        self._export_run(result)
        if result.vm_durations:
            self.ctx.exporter.export_table(result.vm_durations, "vm_states.csv", ["vm", "state", "duration_s"])
        return dict(result.summary)

    def _export_run(self, result: SimulationResult):
        self.ctx.exporter.export_metrics(result.metrics)
        self.ctx.exporter.export_events(result.events)
        throughput = [r for r in result.metrics.records if r.metric == "throughput_mbps"]
        if throughput:
            frame = pd.DataFrame([{"time_s": r.time, "storage": r.tag("storage"), "value": r.value}
                                  for r in throughput])
            wide = frame.pivot(index="time_s", columns="storage", values="value").reset_index()
            wide.columns.name = None
            self.ctx.exporter.export_table(wide.to_dict("records"), "throughput.csv", list(wide.columns))
