"""
Synthetic benchmarks and block-trace replay against a StorageTarget.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from models.workload_models import ThroughputTrace, TraceOperation, TraceRequest, WorkloadSpec
from simulators.acoustics import ExcitationFeed
from simulators.storage import StorageTarget
from utils.errors import StorageUnavailableError

logger = logging.getLogger(__name__)

# Share of the wall budget the unattacked replay needs
BASELINE_BUDGET_SHARE = 0.9


def run_benchmark(spec: WorkloadSpec, storage: StorageTarget, storage_id: str,
                  excitation_feed: Optional[ExcitationFeed], noise_sigma: float,
                  rng: np.random.Generator, sample_period_s: float = 1.0,
                  start_s: float = 0.0) -> ThroughputTrace:
    """Throughput trace of one benchmark run.

    Sample k covers [start + k*dt, start + (k+1)*dt): the storage is advanced
    over the interval and the sample reflects its state at the end.
    """
    if storage.is_failed(storage_id):
        raise StorageUnavailableError(f"storage {storage_id} is not available")

    nominal = storage.nominal_throughput(storage_id)
    n_samples = int(round(spec.duration_s / sample_period_s))
    samples = []
    aborted = False
    for k in range(n_samples):
        t = start_s + k * sample_period_s
        if excitation_feed is not None:
            storage.step(excitation_feed.at(t), sample_period_s, t, spec.kind.is_write)
        if storage.is_failed(storage_id):
            aborted = True
            break
        noise = rng.normal(0.0, noise_sigma) if noise_sigma > 0 else 0.0
        value = nominal * storage.fraction(storage_id) * (1.0 + noise)
        samples.append((k * sample_period_s, max(0.0, value)))

    if aborted:
        logger.debug(f"Benchmark on {storage_id} aborted after {len(samples)} samples")
    return ThroughputTrace(samples=samples, sample_period_s=sample_period_s,
                           labels={"storage": storage_id, "workload": spec.kind.value}, aborted=aborted)


@dataclass
class ReplayResult:
    fulfilled: int
    total: int
    aborted: bool = False
    failed_at_s: Optional[float] = None

    @property
    def fulfilled_fraction(self) -> float:
        return self.fulfilled / self.total if self.total else 1.0


def calibrated_service_rate(requests: Sequence[TraceRequest], wall_limit_s: float) -> float:
    """Bytes/s at which the unattacked store finishes the trace inside the budget"""
    total = float(sum(r.size for r in requests))
    return total / (wall_limit_s * BASELINE_BUDGET_SHARE)


def replay_trace(requests: Sequence[TraceRequest], storage: StorageTarget, storage_id: str,
                 excitation_feed: Optional[ExcitationFeed], wall_limit_s: float,
                 service_rate: Optional[float] = None, dt: float = 1.0,
                 start_s: float = 0.0) -> ReplayResult:
    """Fluid single-queue replay; counts requests finished within ``wall_limit_s``.

    Requests arrive at their trace timestamps and are served FIFO at
    ``service_rate`` scaled by the storage's current throughput fraction.
    """
    if not requests:
        return ReplayResult(fulfilled=0, total=0)
    stamps = np.array([r.timestamp for r in requests], dtype=float)
    if np.any(np.diff(stamps) < 0):
        raise ValueError("trace requests must be sorted by timestamp")

    rate = service_rate if service_rate is not None else calibrated_service_rate(requests, wall_limit_s)
    ends = np.cumsum([r.size for r in requests], dtype=float)
    writes = [r.operation == TraceOperation.WRITE for r in requests]
    served = 0.0
    t = 0.0
    steps = int(round(wall_limit_s / dt))
    for _ in range(steps):
        if excitation_feed is not None:
            # The request at the head of the queue decides which curve applies
            head = min(int(np.searchsorted(ends, served, side="right")), len(requests) - 1)
            storage.step(excitation_feed.at(start_s + t), dt, start_s + t, writes[head])
        if storage.is_failed(storage_id):
            return ReplayResult(int(np.searchsorted(ends, served, side="right")), len(requests),
                                aborted=True, failed_at_s=t + dt)
        t += dt
        arrived = int(np.searchsorted(stamps, t, side="left"))
        arrived_bytes = ends[arrived - 1] if arrived else 0.0
        served = min(served + rate * storage.fraction(storage_id) * dt, arrived_bytes)

    return ReplayResult(int(np.searchsorted(ends, served * (1 + 1e-12), side="right")), len(requests))
