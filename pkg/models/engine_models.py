"""
Engine data models: events, metric records and the declarative scenario description.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
from enum import Enum

from models.acoustic_models import VolumeSchedule
from models.distsys_models import NodeLocation
from models.storage_models import DiskKind, WorkloadKind


class EventKind(Enum):
    """Event kinds; the value is the tie-break priority at equal times"""
    EXCITATION_CHANGE = 0
    DISK_STATE = 1
    RAID_EVENT = 2
    NODE_EVENT = 3
    VM_EVENT = 4
    SAMPLE_TICK = 5

    @property
    def label(self) -> str:
        return self.name.lower().replace("_", "-")


@dataclass(order=True)
class Event:
    time: float
    priority: int
    sequence: int
    kind: EventKind = field(compare=False)
    payload: Dict[str, Any] = field(compare=False, default_factory=dict)


@dataclass(frozen=True)
class EventRecord:
    """Logged outcome of a handled event"""
    time: float
    kind: str
    subject: str
    description: str


@dataclass(frozen=True)
class MetricRecord:
    time: float
    metric: str
    value: float
    tags: Tuple[Tuple[str, str], ...] = ()

    def tag(self, key: str) -> Optional[str]:
        for k, v in self.tags:
            if k == key:
                return v
        return None


class MetricsLog:
    """Append-only metric store with non-decreasing times"""

    def __init__(self):
        self._records: List[MetricRecord] = []

    def record(self, time: float, metric: str, value: float, **tags: str):
        if self._records and time < self._records[-1].time:
            raise ValueError(f"metric time {time} precedes last record {self._records[-1].time}")
        self._records.append(MetricRecord(time, metric, float(value), tuple(sorted(tags.items()))))

    @property
    def records(self) -> List[MetricRecord]:
        return list(self._records)

    def series(self, metric: str, **tags: str) -> List[Tuple[float, float]]:
        wanted = set(tags.items())
        return [(r.time, r.value) for r in self._records
                if r.metric == metric and wanted.issubset(set(r.tags))]

    def __len__(self) -> int:
        return len(self._records)


@dataclass(frozen=True)
class SourceSpec:
    frequency_hz: float = 5100.0
    # Either an absolute source level or the level above noise at the enclosure
    spl: Optional[float] = None
    delta_spl: Optional[float] = None
    distance_m: float = 0.06
    orientation_deg: float = 0.0
    location: int = 1
    propagation: str = "analytic"
    schedule: VolumeSchedule = field(default_factory=VolumeSchedule)


@dataclass(frozen=True)
class DiskSpec:
    disk_id: str
    kind: DiskKind = DiskKind.MECHANICAL
    baseline_throughput: Optional[float] = None
    coupling: float = 1.0
    overrides: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ArraySpec:
    array_id: str
    members: Tuple[str, ...]
    drop_timeout_s: float = 108.0
    degraded_drop_timeout_s: float = 648.0


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    location: NodeLocation
    storage: Optional[str] = None


@dataclass(frozen=True)
class HostSpec:
    host_id: str
    node_id: str
    capacity: float = 1.0
    max_vms: int = 64


@dataclass(frozen=True)
class VmBatchSpec:
    count: int = 50
    interval_s: float = 42.0
    start_s: float = 0.0
    base_durations: Dict[str, float] = field(default_factory=lambda: {
        "INIT": 5.0, "PROLOG": 20.0, "BOOT": 15.0, "RUNNING": 1800.0})
    hosts: Tuple[HostSpec, ...] = ()
    storage_weight: float = 0.8


@dataclass(frozen=True)
class DbSpec:
    underwater_node_count: int = 3


@dataclass
class ScenarioConfig:
    name: str
    horizon_s: float
    seed: int = 0
    description: str = ""
    calibration: Optional[str] = None
    environment: str = "lab"
    passive_attenuation_db: float = 0.0
    threshold_jitter_db: float = 1.0
    source: Optional[SourceSpec] = None
    disks: List[DiskSpec] = field(default_factory=list)
    arrays: List[ArraySpec] = field(default_factory=list)
    nodes: List[NodeSpec] = field(default_factory=list)
    vms: Optional[VmBatchSpec] = None
    db: Optional[DbSpec] = None
    workload: WorkloadKind = WorkloadKind.SEQUENTIAL_WRITE
    # Recipe-specific parameters (volumes, distances, traces, ...)
    parameters: Dict[str, Any] = field(default_factory=dict)
    path: Optional[str] = None
