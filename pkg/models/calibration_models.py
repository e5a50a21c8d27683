"""
Calibration data model: every measured or figure-derived constant the simulator uses.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from models.acoustic_models import Medium, ResonanceProfile, SolidLayer
from models.distsys_models import DbLatencyTable
from models.storage_models import CacheConfig, Curve


@dataclass(frozen=True)
class DiskDefaults:
    baseline_throughput: float = 180.0
    unresponsive_threshold_db: float = 37.0
    unresponsive_dwell_s: float = 60.0
    permanent_damage_rate: float = 1e-4


@dataclass(frozen=True)
class VmInflation:
    """Per-state latency inflation, linear from onset to the max pre-failure level"""
    onset_db: float = 26.0
    max_db: float = 36.0
    max_inflation: Dict[str, float] = field(default_factory=lambda: {"PROLOG": 0.10, "RUNNING": 2.80})
    single_disk_failure_db: float = 36.0


@dataclass(frozen=True)
class DisplacementReference:
    source_spl: float = 220.0
    displacement_nm: float = 145.5


@dataclass
class Calibration:
    media: Dict[str, Medium]
    solids: Dict[str, SolidLayer]
    resonance_profile: ResonanceProfile
    angle_table: Curve
    position_factors: Dict[int, float]
    degradation_curves: Dict[str, Curve]
    pes_curve: Curve
    cache_hit_ratios: Dict[Tuple[str, float], float]
    cache_bands: Dict[str, Tuple[float, float]]
    db_latency: Dict[int, DbLatencyTable]
    vm_inflation: VmInflation = field(default_factory=VmInflation)
    disk_defaults: DiskDefaults = field(default_factory=DiskDefaults)
    displacement_reference: DisplacementReference = field(default_factory=DisplacementReference)
    benchmark_budgets_s: Dict[str, float] = field(default_factory=dict)
    figure_derived: List[str] = field(default_factory=list)
    format_version: str = ""
    source_path: str = ""

    def medium(self, environment: str) -> Medium:
        return self.media[environment]

    def write_curve(self, environment: str) -> Curve:
        return self.degradation_curves[f"{environment}_write"]

    def read_curve(self, environment: str) -> Curve:
        return self.degradation_curves.get(f"{environment}_read", self.write_curve(environment))

    def cache_config(self, cache_size_gb: float) -> CacheConfig:
        return CacheConfig(
            cache_size_gb=cache_size_gb,
            hit_ratio_table=dict(self.cache_hit_ratios),
            hit_latency_band=self.cache_bands["hit"],
            miss_latency_band_benign=self.cache_bands["miss_benign"],
            miss_latency_band_attacked=self.cache_bands["miss_attacked"],
            read_miss_latency_band_attacked=self.cache_bands.get("read_miss_attacked"),
        )
