"""
Scenario Parser - loads and validates declarative experiment descriptions.

Validation runs in two passes (JSON schema, then cross references) and every
problem from both passes is reported in a single ConfigurationError before
anything is simulated.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from fuzzywuzzy import process
from jsonschema import Draft7Validator

from models.acoustic_models import VolumeSchedule
from models.distsys_models import NodeLocation
from models.engine_models import (
    ArraySpec, DbSpec, DiskSpec, HostSpec, NodeSpec, ScenarioConfig, SourceSpec, VmBatchSpec,
)
from models.storage_models import DiskKind, WorkloadKind
from parsers.schemas import SCENARIO_KEYS, SCENARIO_SCHEMA
from utils.errors import ConfigurationError, ValidationError

# Disk keys that map onto DiskModel fields when present
_DISK_OVERRIDE_KEYS = ("unresponsive_threshold_db", "unresponsive_dwell_s", "permanent_damage_rate")
_VM_STATES = ("INIT", "PROLOG", "BOOT", "RUNNING")


def suggest_key(unknown: str, candidates: List[str], cutoff: int = 70) -> Optional[str]:
    """Closest known key for a misspelt one, or None"""
    if not candidates:
        return None
    match = process.extractOne(unknown, candidates)
    if match and match[1] >= cutoff:
        return match[0]
    return None


class ScenarioParser:
    """Parses scenario JSON into ScenarioConfig"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self._validator = Draft7Validator(SCENARIO_SCHEMA)

    def parse_file(self, file_path: str) -> ScenarioConfig:
        path = Path(file_path)
        self.logger.info(f"Loading scenario: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigurationError(f"scenario file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"invalid JSON at line {e.lineno}: {e.msg}", source=str(path))
        scenario = self.parse_data(data, source=str(path))
        scenario.path = str(path)
        # Relative calibration refs are relative to the scenario file
        if scenario.calibration and not Path(scenario.calibration).is_absolute():
            scenario.calibration = str(path.parent / scenario.calibration)
        return scenario

    def parse_data(self, data: Dict[str, Any], source: Optional[str] = None) -> ScenarioConfig:
        if not isinstance(data, dict):
            raise ConfigurationError("scenario must be a JSON object", source=source)

        problems = self._schema_problems(data)
        problems.extend(self._unknown_key_problems(data))
        if not problems:
            problems.extend(self._reference_problems(data))
        if problems:
            raise ConfigurationError(problems, source=source)

        try:
            return self._build(data)
        except ValidationError as e:
            raise ConfigurationError(str(e), source=source)

    def _schema_problems(self, data: Dict[str, Any]) -> List[str]:
        errors = sorted(self._validator.iter_errors(data), key=lambda e: list(e.absolute_path))
        return [f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errors]

    def _unknown_key_problems(self, data: Dict[str, Any]) -> List[str]:
        problems = []

        def check(obj: Any, section: str, where: str):
            if not isinstance(obj, dict):
                return
            known = SCENARIO_KEYS[section]
            for key in obj:
                if key not in known:
                    hint = suggest_key(key, known)
                    suffix = f" (did you mean '{hint}'?)" if hint else ""
                    problems.append(f"{where}: unknown key '{key}'{suffix}")

        check(data, "top", "<root>")
        check(data.get("source"), "source", "source")
        check(data.get("db"), "db", "db")
        for i, disk in enumerate(data.get("disks") or []):
            check(disk, "disk", f"disks/{i}")
        for i, array in enumerate(data.get("arrays") or []):
            check(array, "array", f"arrays/{i}")
        for i, node in enumerate(data.get("nodes") or []):
            check(node, "node", f"nodes/{i}")
        vms = data.get("vms")
        check(vms, "vms", "vms")
        if isinstance(vms, dict):
            for i, host in enumerate(vms.get("hosts") or []):
                check(host, "host", f"vms/hosts/{i}")
            for state in (vms.get("base_durations") or {}):
                if state not in _VM_STATES:
                    problems.append(f"vms/base_durations: unknown VM state '{state}'")
        return problems

    def _reference_problems(self, data: Dict[str, Any]) -> List[str]:
        problems = []
        disk_ids = [d["id"] for d in data.get("disks", [])]
        array_ids = [a["id"] for a in data.get("arrays", [])]
        node_ids = [n["id"] for n in data.get("nodes", [])]

        for label, ids in (("disk", disk_ids), ("array", array_ids), ("node", node_ids)):
            duplicates = sorted({i for i in ids if ids.count(i) > 1})
            if duplicates:
                problems.append(f"duplicate {label} ids: {', '.join(duplicates)}")

        claimed: Dict[str, str] = {}
        for array in data.get("arrays", []):
            members = array["members"]
            if len(members) < 3:
                problems.append(f"arrays/{array['id']}: RAID 5 needs at least 3 members, got {len(members)}")
            for member in members:
                if member not in disk_ids:
                    problems.append(f"arrays/{array['id']}: unknown member disk '{member}'")
                elif member in claimed:
                    problems.append(f"disk '{member}' belongs to arrays {claimed[member]} and {array['id']}")
                else:
                    claimed[member] = array["id"]

        for node in data.get("nodes", []):
            storage = node.get("storage")
            if storage is not None and storage not in array_ids and storage not in disk_ids:
                problems.append(f"nodes/{node['id']}: unknown storage '{storage}'")

        vms = data.get("vms") or {}
        for host in vms.get("hosts", []):
            if host["node"] not in node_ids:
                problems.append(f"vms/hosts/{host['id']}: unknown node '{host['node']}'")
        if vms and not vms.get("hosts"):
            problems.append("vms: at least one host is required")

        source = data.get("source") or {}
        if "spl" in source and "delta_spl" in source:
            problems.append("source: give either 'spl' or 'delta_spl', not both")
        schedule = source.get("schedule") or {}
        steps = schedule.get("steps") or []
        if [t for t, _ in steps] != sorted(t for t, _ in steps):
            problems.append("source/schedule: steps must be sorted by time")
        if schedule.get("step_db") and not schedule.get("step_period_s"):
            problems.append("source/schedule: 'step_db' needs 'step_period_s'")
        return problems

    def _build(self, data: Dict[str, Any]) -> ScenarioConfig:
        source = None
        if "source" in data:
            src = dict(data["source"])
            schedule = src.pop("schedule", {})
            if "steps" in schedule:
                schedule["steps"] = tuple(tuple(step) for step in schedule["steps"])
            source = SourceSpec(schedule=VolumeSchedule(**schedule), **src)

        disks = [
            DiskSpec(
                disk_id=d["id"],
                kind=DiskKind(d.get("kind", "mechanical")),
                baseline_throughput=d.get("baseline_throughput"),
                coupling=d.get("coupling", 1.0),
                overrides={k: d[k] for k in _DISK_OVERRIDE_KEYS if k in d},
            )
            for d in data.get("disks", [])
        ]
        arrays = [
            ArraySpec(
                array_id=a["id"],
                members=tuple(a["members"]),
                drop_timeout_s=a.get("drop_timeout_s", 108.0),
                degraded_drop_timeout_s=a.get("degraded_drop_timeout_s", 648.0),
            )
            for a in data.get("arrays", [])
        ]
        nodes = [NodeSpec(n["id"], NodeLocation(n["location"]), n.get("storage"))
                 for n in data.get("nodes", [])]

        vms = None
        if "vms" in data:
            v = data["vms"]
            defaults = VmBatchSpec()
            durations = dict(defaults.base_durations)
            durations.update(v.get("base_durations", {}))
            vms = VmBatchSpec(
                count=v.get("count", defaults.count),
                interval_s=v.get("interval_s", defaults.interval_s),
                start_s=v.get("start_s", defaults.start_s),
                base_durations=durations,
                hosts=tuple(HostSpec(h["id"], h["node"], h.get("capacity", 1.0), h.get("max_vms", 64))
                            for h in v.get("hosts", [])),
                storage_weight=v.get("storage_weight", defaults.storage_weight),
            )

        db = DbSpec(**data["db"]) if "db" in data else None

        return ScenarioConfig(
            name=data["name"],
            horizon_s=float(data["horizon_s"]),
            seed=data.get("seed", 0),
            description=data.get("description", ""),
            calibration=data.get("calibration"),
            environment=data.get("environment", "lab"),
            passive_attenuation_db=data.get("passive_attenuation_db", 0.0),
            threshold_jitter_db=data.get("threshold_jitter_db", 1.0),
            source=source,
            disks=disks,
            arrays=arrays,
            nodes=nodes,
            vms=vms,
            db=db,
            workload=WorkloadKind(data.get("workload", "sequential-write")),
            parameters=dict(data.get("parameters", {})),
        )


def load_scenario(file_path: str, logger: Optional[logging.Logger] = None) -> ScenarioConfig:
    """Convenience function to load a scenario file"""
    return ScenarioParser(logger).parse_file(file_path)
