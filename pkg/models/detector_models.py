"""
Detector data models: per-disk profiles, PCM settings, verdicts and evaluation results.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional
from enum import Enum

import numpy as np

from models.workload_models import ThroughputTrace
from utils.errors import ValidationError


AREA_RULES = ("trapezoidal", "arc_length")


class DiskLabel(Enum):
    BENIGN = "benign"
    ANOMALOUS = "anomalous"


@dataclass(frozen=True)
class PcmConfig:
    # Minimum points of the trapezoidal grid; vertices of both curves are always included
    resample_count: int = 64
    # "reference_range": offset and scale by the reference curve's value range and time span
    normalization: str = "reference_range"
    area_rule: str = "trapezoidal"

    def __post_init__(self):
        if self.resample_count < 8:
            raise ValidationError("PCM resample count must be at least 8")
        if self.area_rule not in AREA_RULES:
            raise ValidationError(f"unknown PCM area rule '{self.area_rule}'")
        if self.normalization not in ("reference_range", "time_only"):
            raise ValidationError(f"unknown PCM normalization '{self.normalization}'")


@dataclass
class DiskProfile:
    disk_id: str
    traces: List[ThroughputTrace]
    centroid: ThroughputTrace
    dispersion: np.ndarray
    # PCM distance of every profiling trace to the centroid
    calibration_distances: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def sample_period_s(self) -> float:
        return self.centroid.sample_period_s


@dataclass
class Verdict:
    labels: Dict[str, DiskLabel]
    distances: Dict[str, float]
    alarm: bool

    @property
    def anomalous_count(self) -> int:
        return sum(1 for label in self.labels.values() if label == DiskLabel.ANOMALOUS)


@dataclass
class EvaluationResult:
    volume_db: Optional[float]
    n_combinations: int
    fpr: Optional[float]
    tpr: Optional[float]
    # Variant: any attacked disk makes the combination an attack case
    fpr_any_attacked: Optional[float] = None
    tpr_any_attacked: Optional[float] = None
    attack_cases: int = 0
    benign_cases: int = 0

    def to_dict(self) -> Dict[str, Optional[float]]:
        return {
            "volume_db": self.volume_db,
            "n_combinations": self.n_combinations,
            "fpr": self.fpr,
            "tpr": self.tpr,
            "fpr_any_attacked": self.fpr_any_attacked,
            "tpr_any_attacked": self.tpr_any_attacked,
            "attack_cases": self.attack_cases,
            "benign_cases": self.benign_cases,
        }
