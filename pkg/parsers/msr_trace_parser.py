"""
MSR Cambridge block-trace parser.

Rows are ``Timestamp,Hostname,DiskNumber,Type,Offset,Size,ResponseTime`` with
Windows filetime timestamps (100 ns ticks). Timestamps are rebased so the first
request is at t = 0.
"""

import logging
import re
from pathlib import Path
from typing import List, Optional

import pandas as pd

from models.workload_models import TraceOperation, TraceRequest
from utils.errors import TraceParseError

MSR_COLUMNS = ["timestamp", "hostname", "disk", "operation", "offset", "size", "response_time"]
FILETIME_TICKS_PER_S = 1e7


class MsrTraceParser:
    """Reads MSR-style CSV traces into TraceRequest lists"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)

    def parse_file(self, file_path: str, limit: Optional[int] = None) -> List[TraceRequest]:
        path = Path(file_path)
        if not path.exists():
            raise TraceParseError(str(path), [(0, "file not found")])
        if path.stat().st_size == 0:
            self.logger.warning(f"Trace file {path} is empty")
            return []

        try:
            # Blank lines stay in as all-NaN rows so the index tracks file lines
            frame = pd.read_csv(path, header=None, names=MSR_COLUMNS, dtype=str,
                                skip_blank_lines=False, on_bad_lines="error")
        except pd.errors.ParserError as e:
            raise TraceParseError(str(path), [(self._bad_line(path, e), str(e))])
        except UnicodeDecodeError as e:
            raise TraceParseError(str(path), [(0, f"unreadable file: {e}")])

        frame = frame.dropna(how="all")
        if limit is not None:
            frame = frame.head(limit)
        if frame.empty:
            self.logger.warning(f"Trace file {path} has no requests")
            return []

        # 1-based file line numbers
        frame = frame.assign(line=frame.index + 1)
        problems = []

        numeric = {}
        for column in ("timestamp", "offset", "size"):
            values = pd.to_numeric(frame[column], errors="coerce")
            for line in frame.loc[values.isna(), "line"]:
                problems.append((int(line), f"non-numeric {column} '{frame.loc[line - 1, column]}'"))
            numeric[column] = values

        ops = frame["operation"].fillna("").str.strip().str.lower()
        for line in frame.loc[~ops.isin(["read", "write"]), "line"]:
            problems.append((int(line), f"unknown operation '{frame.loc[line - 1, 'operation']}'"))

        if problems:
            raise TraceParseError(str(path), sorted(problems))

        stamps = numeric["timestamp"].to_numpy(dtype=float)
        if (stamps[1:] < stamps[:-1]).any():
            first = int(frame["line"].iloc[int((stamps[1:] < stamps[:-1]).argmax()) + 1])
            raise TraceParseError(str(path), [(first, "timestamp decreases")])

        start = stamps[0]
        requests = [
            TraceRequest(
                timestamp=(ts - start) / FILETIME_TICKS_PER_S,
                operation=TraceOperation(op),
                offset=int(offset),
                size=int(size),
            )
            for ts, op, offset, size in zip(stamps, ops, numeric["offset"], numeric["size"])
        ]
        self.logger.info(f"Loaded {len(requests)} requests from {path.name}")
        return requests

    @staticmethod
    def _bad_line(path: Path, error: Exception) -> int:
        """First file line without the expected field count"""
        with open(path, encoding="utf-8", errors="replace") as handle:
            for number, text in enumerate(handle, start=1):
                if text.strip() and text.count(",") != len(MSR_COLUMNS) - 1:
                    return number
        match = re.search(r"line (\d+)", str(error))
        return int(match.group(1)) if match else 1


def load_msr_trace(file_path: str, limit: Optional[int] = None,
                   logger: Optional[logging.Logger] = None) -> List[TraceRequest]:
    """Convenience function to parse an MSR trace"""
    return MsrTraceParser(logger).parse_file(file_path, limit)
