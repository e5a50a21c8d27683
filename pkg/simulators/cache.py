"""
Table-driven write-back SSD cache in front of the HDD array.

Hits are served from flash; misses pay HDD latency, which the attack pushes into a
much higher band. No eviction is simulated: hit ratios come from the calibration table.
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from models.storage_models import CacheConfig, WorkloadKind
from models.workload_models import TraceRequest
from utils.errors import ConfigurationError


def hit_probability(cfg: CacheConfig, workload_kind: WorkloadKind) -> float:
    key = (workload_kind.value, float(cfg.cache_size_gb))
    try:
        return cfg.hit_ratio_table[key]
    except KeyError:
        raise ConfigurationError(
            f"no hit ratio for {workload_kind.value} with a {cfg.cache_size_gb} GB cache")


def miss_band(cfg: CacheConfig, workload_kind: WorkloadKind, attacked: bool) -> Tuple[float, float]:
    if not attacked:
        return cfg.miss_latency_band_benign
    if not workload_kind.is_write and cfg.read_miss_latency_band_attacked is not None:
        return cfg.read_miss_latency_band_attacked
    return cfg.miss_latency_band_attacked


def cache_serve(request: Optional[TraceRequest], cfg: CacheConfig, workload_kind: WorkloadKind,
                attacked: bool, rng: np.random.Generator) -> float:
    """Latency in ms for one request"""
    p_hit = hit_probability(cfg, workload_kind)
    if rng.random() < p_hit:
        low, high = cfg.hit_latency_band
    else:
        low, high = miss_band(cfg, workload_kind, attacked)
    return float(rng.uniform(low, high))


def latency_samples(cfg: CacheConfig, workload_kind: WorkloadKind, attacked: bool,
                    n: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorised cache_serve over n requests (same per-request distribution)"""
    p_hit = hit_probability(cfg, workload_kind)
    hits = rng.random(n) < p_hit
    low_hit, high_hit = cfg.hit_latency_band
    low_miss, high_miss = miss_band(cfg, workload_kind, attacked)
    draws = rng.random(n)
    return np.where(hits, low_hit + draws * (high_hit - low_hit), low_miss + draws * (high_miss - low_miss))


@dataclass
class BandwidthChange:
    workload: WorkloadKind
    cache_size_gb: float
    hit_ratio: float
    mean_latency_benign_ms: float
    mean_latency_attacked_ms: float

    @property
    def degradation_pct(self) -> float:
        """Bandwidth lost under attack; bandwidth is inversely proportional to mean latency"""
        return 100.0 * (1.0 - self.mean_latency_benign_ms / self.mean_latency_attacked_ms)

    def to_dict(self) -> Dict[str, object]:
        return {
            "workload": self.workload.short_name,
            "cache_size_gb": self.cache_size_gb,
            "hit_ratio": self.hit_ratio,
            "mean_latency_benign_ms": self.mean_latency_benign_ms,
            "mean_latency_attacked_ms": self.mean_latency_attacked_ms,
            "bandwidth_degradation_pct": self.degradation_pct,
        }


def bandwidth_change(cfg: CacheConfig, workload_kind: WorkloadKind, n: int,
                     rng_benign: np.random.Generator, rng_attacked: np.random.Generator) -> BandwidthChange:
    benign = latency_samples(cfg, workload_kind, False, n, rng_benign)
    attacked = latency_samples(cfg, workload_kind, True, n, rng_attacked)
    return BandwidthChange(workload_kind, cfg.cache_size_gb, hit_probability(cfg, workload_kind),
                           float(benign.mean()), float(attacked.mean()))
