"""
Throughput-profile detector: per-disk profiles, PCM distances to the profile
centroid, two-cluster k-means labelling and the multi-disk alarm rule.
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from analyzers.pcm import pcm_distance
from models.detector_models import DiskLabel, DiskProfile, EvaluationResult, PcmConfig, Verdict
from models.workload_models import ThroughputTrace
from simulators.rng import derive_rng
from utils.config import DetectorConfig
from utils.errors import ValidationError


def profile_disk(traces: Sequence[ThroughputTrace], cfg: PcmConfig = PcmConfig(),
                 disk_id: str = "") -> DiskProfile:
    if len(traces) < 2:
        raise ValidationError(f"profiling disk {disk_id or '?'} needs at least 2 traces, got {len(traces)}")
    lengths = {len(t) for t in traces}
    periods = {t.sample_period_s for t in traces}
    if len(lengths) != 1 or len(periods) != 1:
        raise ValidationError(f"profiling traces for disk {disk_id or '?'} differ in length or sample period")

    matrix = np.vstack([t.values for t in traces])
    times = traces[0].times
    centroid = ThroughputTrace(samples=list(zip(times.tolist(), matrix.mean(axis=0).tolist())),
                               sample_period_s=traces[0].sample_period_s,
                               labels={"disk": disk_id, "role": "centroid"})
    profile = DiskProfile(disk_id=disk_id, traces=list(traces), centroid=centroid,
                          dispersion=matrix.std(axis=0))
    profile.calibration_distances = np.array([pcm_distance(t, centroid, cfg) for t in traces])
    return profile


class ThroughputDetector:
    """Labels disks from new throughput traces against their benign profiles"""

    def __init__(self, profiles: Dict[str, DiskProfile], config: DetectorConfig = DetectorConfig(),
                 logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self.profiles = profiles
        self.config = config
        self.pcm = PcmConfig(config.resample_count, config.normalization, config.area_rule)

    def distance(self, disk_id: str, trace: ThroughputTrace) -> float:
        return pcm_distance(trace, self.profiles[disk_id].centroid, self.pcm)

    def label(self, disk_id: str, distance: float) -> DiskLabel:
        """k-means over the disk's calibration distances plus the new one.

        The new distance is anomalous when it falls in the top cluster and itself
        clears the calibration mean by ``min_separation_sigma`` deviations.
        """
        calibration = self.profiles[disk_id].calibration_distances
        pool = np.append(calibration, distance).reshape(-1, 1)
        k = min(self.config.n_clusters, len(np.unique(pool)))
        if k < 2:
            return DiskLabel.BENIGN

        init = np.linspace(pool.min(), pool.max(), k).reshape(-1, 1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            km = KMeans(n_clusters=k, init=init, n_init=1, max_iter=self.config.max_iter,
                        tol=self.config.tol).fit(pool)
        upper = int(np.argmax(km.cluster_centers_.ravel()))
        if km.labels_[-1] != upper:
            return DiskLabel.BENIGN
        # A purely benign pool still splits; the candidate's own distance must stand out
        floor = calibration.mean() + self.config.min_separation_sigma * calibration.std()
        return DiskLabel.ANOMALOUS if distance > floor else DiskLabel.BENIGN

    def classify(self, new_traces: Dict[str, ThroughputTrace]) -> Verdict:
        missing = set(self.profiles) - set(new_traces)
        if missing:
            raise ValidationError(f"no trace for profiled disk(s): {', '.join(sorted(missing))}")
        distances = {d: self.distance(d, new_traces[d]) for d in sorted(self.profiles)}
        labels = {d: self.label(d, distances[d]) for d in sorted(self.profiles)}
        return self.verdict(labels, distances)

    def verdict(self, labels: Dict[str, DiskLabel], distances: Dict[str, float]) -> Verdict:
        anomalous = sum(1 for label in labels.values() if label == DiskLabel.ANOMALOUS)
        return Verdict(labels=labels, distances=distances, alarm=anomalous >= self.config.alarm_min_disks)

    def label_pool(self, disk_id: str, traces: Sequence[ThroughputTrace],
                   max_workers: int = 1) -> List[Tuple[DiskLabel, float]]:
        """(label, distance) per trace; order preserved, so parallel and serial agree"""
        def work(trace):
            d = self.distance(disk_id, trace)
            return self.label(disk_id, d), d

        if max_workers > 1:
            with ThreadPoolExecutor(max_workers=max_workers) as pool:
                return list(pool.map(work, traces))
        return [work(t) for t in traces]


def classify_disks(new_traces: Dict[str, ThroughputTrace], profiles: Dict[str, DiskProfile],
                   config: DetectorConfig = DetectorConfig()) -> Verdict:
    return ThroughputDetector(profiles, config).classify(new_traces)


def _rate(hits: int, cases: int) -> Optional[float]:
    return hits / cases if cases else None


def evaluate(detector: ThroughputDetector, benign_pool: Dict[str, List[ThroughputTrace]],
             attacked_pool: Optional[Dict[str, List[ThroughputTrace]]], n_combinations: int,
             master_seed: int, volume_db: Optional[float] = None, max_workers: int = 1) -> EvaluationResult:
    """FPR/TPR over random per-disk benign/attacked combinations.

    Primary labelling: a combination is an attack when at least ``alarm_min_disks``
    disks got attacked traces. The variant counts any attacked disk as an attack.
    """
    disks = sorted(detector.profiles)
    for d in disks:
        if not benign_pool.get(d):
            raise ValidationError(f"empty benign pool for disk {d}")
    attacked_pool = attacked_pool or {}

    labels = {d: {"benign": detector.label_pool(d, benign_pool[d], max_workers),
                  "attacked": detector.label_pool(d, attacked_pool.get(d, []), max_workers)}
              for d in disks}

    counts = {"attack": 0, "benign": 0, "tp": 0, "fp": 0, "any_attack": 0, "any_benign": 0,
              "any_tp": 0, "any_fp": 0}
    for i in range(n_combinations):
        rng = derive_rng(master_seed, f"combo-{i}")
        attacked_disks = 0
        anomalous = 0
        for d in disks:
            use_attack = bool(labels[d]["attacked"]) and rng.random() < 0.5
            pool = labels[d]["attacked" if use_attack else "benign"]
            label, _ = pool[int(rng.integers(len(pool)))]
            attacked_disks += int(use_attack)
            anomalous += int(label == DiskLabel.ANOMALOUS)
        alarm = anomalous >= detector.config.alarm_min_disks

        is_attack = attacked_disks >= detector.config.alarm_min_disks
        counts["attack" if is_attack else "benign"] += 1
        if alarm:
            counts["tp" if is_attack else "fp"] += 1
        any_attack = attacked_disks > 0
        counts["any_attack" if any_attack else "any_benign"] += 1
        if alarm:
            counts["any_tp" if any_attack else "any_fp"] += 1

    result = EvaluationResult(
        volume_db=volume_db,
        n_combinations=n_combinations,
        fpr=_rate(counts["fp"], counts["benign"]),
        tpr=_rate(counts["tp"], counts["attack"]),
        fpr_any_attacked=_rate(counts["any_fp"], counts["any_benign"]),
        tpr_any_attacked=_rate(counts["any_tp"], counts["any_attack"]),
        attack_cases=counts["attack"],
        benign_cases=counts["benign"],
    )
    detector.logger.debug(f"Evaluation at {volume_db} dB: {result.to_dict()}")
    return result
