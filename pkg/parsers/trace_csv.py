"""
ThroughputTrace CSV exchange format and the on-disk profile store.

A trace CSV has the header ``t,throughput_mbps`` and one row per sample. A profile
store is a directory holding one trace CSV per profiling run plus ``manifest.json``.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from models.workload_models import ThroughputTrace
from utils.errors import ConfigurationError, TraceParseError

TRACE_COLUMNS = ["t", "throughput_mbps"]
MANIFEST_NAME = "manifest.json"


def write_trace_csv(trace: ThroughputTrace, path: str, float_precision: int = 6) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(trace.samples, columns=TRACE_COLUMNS)
    frame.to_csv(out, index=False, float_format=f"%.{float_precision}f", lineterminator="\n")
    return out


def read_trace_csv(path: str, labels: Optional[Dict[str, str]] = None) -> ThroughputTrace:
    src = Path(path)
    try:
        frame = pd.read_csv(src)
    except FileNotFoundError:
        raise TraceParseError(str(src), [(0, "file not found")])
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise TraceParseError(str(src), [(0, str(e))])

    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise TraceParseError(str(src), [(1, f"missing column(s) {', '.join(missing)}")])

    problems = []
    for column in TRACE_COLUMNS:
        values = pd.to_numeric(frame[column], errors="coerce")
        # header is line 1
        problems.extend((int(i) + 2, f"non-numeric {column}") for i in frame.index[values.isna()])
        frame[column] = values
    problems.extend((int(i) + 2, "negative throughput") for i in frame.index[frame["throughput_mbps"] < 0])
    if problems:
        raise TraceParseError(str(src), sorted(problems))

    times = frame["t"].to_numpy(dtype=float)
    period = float(np.median(np.diff(times))) if len(times) > 1 else 1.0
    return ThroughputTrace(samples=list(zip(times.tolist(), frame["throughput_mbps"].tolist())),
                           sample_period_s=period, labels=dict(labels or {}))


class ProfileStore:
    """Directory of per-disk profiling traces with a JSON manifest"""

    def __init__(self, directory: str, logger: Optional[logging.Logger] = None):
        self.directory = Path(directory)
        self.logger = logger or logging.getLogger(__name__)

    def save(self, traces_by_disk: Dict[str, List[ThroughputTrace]], metadata: Optional[Dict] = None) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        manifest = {"format": "udc-profile-store", "version": "1.0",
                    "metadata": dict(metadata or {}), "disks": {}}
        for disk_id, traces in sorted(traces_by_disk.items()):
            files = []
            for i, trace in enumerate(traces):
                name = f"{disk_id}_trial{i:03d}.csv"
                write_trace_csv(trace, str(self.directory / name))
                files.append(name)
            manifest["disks"][disk_id] = files
        manifest_path = self.directory / MANIFEST_NAME
        with open(manifest_path, 'w', encoding='utf-8') as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
            f.write("\n")
        self.logger.debug(f"Profile store written to {self.directory}")
        return manifest_path

    def load(self) -> Dict[str, List[ThroughputTrace]]:
        manifest_path = self.directory / MANIFEST_NAME
        try:
            with open(manifest_path, 'r', encoding='utf-8') as f:
                manifest = json.load(f)
        except FileNotFoundError:
            raise ConfigurationError(f"profile store manifest not found: {manifest_path}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"invalid manifest JSON: {e.msg}", source=str(manifest_path))

        if manifest.get("format") != "udc-profile-store":
            raise ConfigurationError("not a profile store manifest", source=str(manifest_path))
        return {
            disk_id: [read_trace_csv(str(self.directory / name), labels={"disk": disk_id}) for name in files]
            for disk_id, files in manifest.get("disks", {}).items()
        }

    def metadata(self) -> Dict:
        with open(self.directory / MANIFEST_NAME, 'r', encoding='utf-8') as f:
            return json.load(f).get("metadata", {})
