"""
Result Exporter

Writes experiment tables, metric logs, event logs and key=value summaries under
one output directory. Formatting is fixed (column order, float precision, '\\n'
line endings) so identical runs produce byte-identical files.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import pandas as pd

from models.engine_models import EventRecord, MetricsLog

METRIC_COLUMNS = ["time_s", "metric", "value", "tags"]
EVENT_COLUMNS = ["time_s", "kind", "subject", "description"]


class ResultExporter:
    """Writes CSV and summary files for one command invocation"""

    def __init__(self, output_dir: str = "output", float_precision: int = 6,
                 logger: Optional[logging.Logger] = None):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.float_precision = float_precision
        self.logger = logger or logging.getLogger(__name__)
        self.written: List[str] = []

    def _path(self, filename: str) -> Path:
        path = self.output_dir / filename
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def _write_frame(self, frame: pd.DataFrame, filename: str) -> str:
        path = self._path(filename)
        frame.to_csv(path, index=False, float_format=f"%.{self.float_precision}f", na_rep="NA",
                     lineterminator="\n")
        self.written.append(str(path))
        self.logger.debug(f"Wrote {len(frame)} rows to {path}")
        return str(path)

    def export_table(self, rows: Sequence[Dict[str, Any]], filename: str,
                     columns: Optional[Sequence[str]] = None) -> str:
        """Rows of dicts as CSV; ``columns`` fixes the order"""
        frame = pd.DataFrame(list(rows), columns=list(columns) if columns else None)
        return self._write_frame(frame, filename)

    def export_metrics(self, metrics: MetricsLog, filename: str = "metrics.csv") -> str:
        rows = [{"time_s": r.time, "metric": r.metric, "value": r.value,
                 "tags": ";".join(f"{k}={v}" for k, v in r.tags)} for r in metrics.records]
        return self.export_table(rows, filename, METRIC_COLUMNS)

    def export_events(self, events: Iterable[EventRecord], filename: str = "events.csv") -> str:
        rows = [{"time_s": e.time, "kind": e.kind, "subject": e.subject, "description": e.description}
                for e in events]
        return self.export_table(rows, filename, EVENT_COLUMNS)

    def export_summary(self, summary: Dict[str, Any], filename: str = "summary.txt") -> str:
        """Flat ``key=value`` lines, sorted by key"""
        path = self._path(filename)
        lines = [f"{key}={self._format_value(summary[key])}" for key in sorted(summary)]
        with open(path, 'w', encoding='utf-8', newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        self.written.append(str(path))
        return str(path)

    def _format_value(self, value: Any) -> str:
        if value is None:
            return "NA"
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            return f"{value:.{self.float_precision}f}"
        return str(value)
