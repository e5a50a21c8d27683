"""
Workload data models: benchmark descriptions, block-trace requests and throughput traces.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Tuple
from enum import Enum

import numpy as np

from models.storage_models import WorkloadKind
from utils.errors import ValidationError


class TraceOperation(Enum):
    READ = "read"
    WRITE = "write"


@dataclass(frozen=True)
class WorkloadSpec:
    kind: WorkloadKind = WorkloadKind.SEQUENTIAL_WRITE
    duration_s: float = 30.0
    request_size: int = 1 << 20
    partition_size: int = 100 * (1 << 20)

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValidationError("workload duration must be positive")


@dataclass(frozen=True)
class TraceRequest:
    timestamp: float        # s, relative to trace start
    operation: TraceOperation
    offset: int
    size: int


@dataclass
class ThroughputTrace:
    """Fixed-period throughput samples; the unit the detector works on"""
    samples: List[Tuple[float, float]]
    sample_period_s: float = 1.0
    labels: Dict[str, str] = field(default_factory=dict)
    aborted: bool = False

    def __post_init__(self):
        if any(v < 0 for _, v in self.samples):
            raise ValidationError("throughput samples must be non-negative")

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.samples], dtype=float)

    def mean(self) -> float:
        return float(self.values.mean()) if self.samples else 0.0

    def __len__(self) -> int:
        return len(self.samples)
