"""
Storage data models: disks, their runtime state, RAID-5 arrays and the hybrid cache.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple
from enum import Enum

from utils.errors import ValidationError


class DiskKind(Enum):
    MECHANICAL = "mechanical"
    SOLID_STATE = "solid_state"


class RaidStatus(Enum):
    HEALTHY = "healthy"
    DEGRADED = "degraded"
    FAILED = "failed"


class WorkloadKind(Enum):
    SEQUENTIAL_WRITE = "sequential-write"
    SEQUENTIAL_READ = "sequential-read"
    RANDOM_WRITE = "random-write"
    RANDOM_READ = "random-read"

    @property
    def is_write(self) -> bool:
        return self in (WorkloadKind.SEQUENTIAL_WRITE, WorkloadKind.RANDOM_WRITE)

    @property
    def short_name(self) -> str:
        return {"sequential-write": "SW", "sequential-read": "SR",
                "random-write": "RW", "random-read": "RR"}[self.value]


Curve = Tuple[Tuple[float, float], ...]
IDENTITY_CURVE: Curve = ((0.0, 1.0), (1.0, 1.0))


@dataclass(frozen=True)
class DiskModel:
    """Static description of a drive and its response to acoustic excitation"""
    disk_id: str
    baseline_throughput: float                  # MB/s
    degradation_curve: Curve                    # (delta_spl_db, multiplier)
    unresponsive_threshold_db: float = 37.0
    unresponsive_dwell_s: float = 60.0
    permanent_damage_rate: float = 1e-4         # multiplier loss per unresponsive second
    kind: DiskKind = DiskKind.MECHANICAL
    # Fraction of the enclosure vibration reaching this bay
    coupling: float = 1.0
    read_degradation_curve: Optional[Curve] = None

    def __post_init__(self):
        if self.kind == DiskKind.SOLID_STATE:
            object.__setattr__(self, "degradation_curve", IDENTITY_CURVE)
            object.__setattr__(self, "read_degradation_curve", None)
        for curve in (self.degradation_curve, self.read_degradation_curve):
            if curve is not None:
                validate_degradation_curve(curve, self.disk_id)
        if self.baseline_throughput <= 0:
            raise ValidationError(f"disk {self.disk_id}: baseline throughput must be positive")
        if not 0.0 < self.coupling <= 1.0:
            raise ValidationError(f"disk {self.disk_id}: coupling must be in (0, 1]")

    def curve_for(self, is_write: bool = True) -> Curve:
        if not is_write and self.read_degradation_curve is not None:
            return self.read_degradation_curve
        return self.degradation_curve


def validate_degradation_curve(curve: Curve, owner: str = "curve"):
    if len(curve) < 2:
        raise ValidationError(f"{owner}: degradation curve needs at least two knots")
    xs = [x for x, _ in curve]
    ys = [y for _, y in curve]
    if xs != sorted(xs):
        raise ValidationError(f"{owner}: degradation curve must be sorted by dSPL")
    if any(not 0.0 <= y <= 1.0 for y in ys):
        raise ValidationError(f"{owner}: multipliers must be in [0, 1]")
    if any(b > a for a, b in zip(ys, ys[1:])):
        raise ValidationError(f"{owner}: multipliers must be non-increasing")


@dataclass(frozen=True)
class DiskState:
    """Runtime state of one drive; immutable, each step returns a new state"""
    disk_id: str
    responsive: bool = True
    current_multiplier: float = 1.0
    dwell_accumulator_s: float = 0.0
    permanent_multiplier: float = 1.0
    detected: bool = True
    unresponsive_since: Optional[float] = None

    def __post_init__(self):
        if self.current_multiplier > self.permanent_multiplier + 1e-12 or self.permanent_multiplier > 1.0:
            raise ValidationError(
                f"disk {self.disk_id}: requires current <= permanent <= 1 "
                f"(got {self.current_multiplier}, {self.permanent_multiplier})")


@dataclass
class Raid5Array:
    """RAID-5 array state machine over member disk ids"""
    array_id: str
    members: List[str]
    dropped: List[str] = field(default_factory=list)
    status: RaidStatus = RaidStatus.HEALTHY
    drop_timeout_s: float = 108.0
    # Degraded arrays resist a (fatal) further drop for longer
    degraded_drop_timeout_s: float = 648.0
    min_members: int = 3

    def __post_init__(self):
        if len(self.members) < self.min_members:
            raise ValidationError(
                f"array {self.array_id}: RAID 5 needs at least {self.min_members} members")
        if len(set(self.members)) != len(self.members):
            raise ValidationError(f"array {self.array_id}: duplicate member ids")

    @property
    def active(self) -> List[str]:
        dropped: Set[str] = set(self.dropped)
        return [m for m in self.members if m not in dropped]

    @property
    def is_failed(self) -> bool:
        return self.status == RaidStatus.FAILED

    def current_drop_timeout(self) -> float:
        return self.degraded_drop_timeout_s if self.status == RaidStatus.DEGRADED else self.drop_timeout_s


@dataclass(frozen=True)
class CacheConfig:
    """Write-back SSD cache in front of the RAID array"""
    cache_size_gb: float
    hit_ratio_table: Dict[Tuple[str, float], float]
    hit_latency_band: Tuple[float, float] = (0.05, 1.0)
    miss_latency_band_benign: Tuple[float, float] = (1.0, 200.0)
    miss_latency_band_attacked: Tuple[float, float] = (200.0, 800.0)
    read_miss_latency_band_attacked: Optional[Tuple[float, float]] = None
    policy: str = "write-back"

    def __post_init__(self):
        for key, p in self.hit_ratio_table.items():
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"hit ratio for {key} outside [0, 1]: {p}")
        for band in (self.hit_latency_band, self.miss_latency_band_benign,
                     self.miss_latency_band_attacked, self.read_miss_latency_band_attacked):
            if band is not None and band[0] > band[1]:
                raise ValidationError(f"latency band lower bound exceeds upper: {band}")
