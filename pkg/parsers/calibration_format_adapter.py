"""
Calibration Format Adapter - Isolates calibration file format changes from the rest of the system.

When the calibration file layout changes only an adapter needs to be added here;
the Calibration model and every simulator keep working unchanged.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple
import logging

from jsonschema import Draft7Validator

from models.acoustic_models import Medium, ResonanceBand, ResonanceProfile, SolidLayer
from models.calibration_models import (
    Calibration, DiskDefaults, DisplacementReference, VmInflation,
)
from models.distsys_models import DbLatencyTable
from models.storage_models import validate_degradation_curve
from parsers.schemas import CALIBRATION_SCHEMA_V1
from utils.errors import ConfigurationError, ValidationError


@dataclass
class RawCalibrationData:
    """Format-agnostic calibration sections extracted from any file version"""
    media: Dict[str, Dict[str, Any]]
    solids: Dict[str, Dict[str, Any]]
    resonance_bands: List[Tuple[float, float, float]]
    off_band_gain: float
    angle_points: List[Tuple[float, float]]
    position_points: Dict[str, float]
    degradation_curves: Dict[str, List[Tuple[float, float]]]
    pes_points: List[Tuple[float, float]]
    cache_hit_ratios: Dict[str, Dict[str, float]]
    cache_bands: Dict[str, Tuple[float, float]]
    db_latency: Dict[str, Dict[str, Any]]
    vm_inflation: Dict[str, Any] = field(default_factory=dict)
    disk_defaults: Dict[str, float] = field(default_factory=dict)
    displacement_reference: Dict[str, float] = field(default_factory=dict)
    benchmark_budgets_s: Dict[str, float] = field(default_factory=dict)
    figure_derived: List[str] = field(default_factory=list)
    format_version: str = ""


class CalibrationFormatAdapter(ABC):
    """Abstract adapter for calibration file formats"""

    @abstractmethod
    def extract_raw_data(self, json_data: Dict[str, Any]) -> RawCalibrationData:
        """Extract format-agnostic sections from calibration JSON"""

    @abstractmethod
    def get_format_version(self) -> str:
        """Get the format version this adapter handles"""

    @abstractmethod
    def validate_format(self, json_data: Dict[str, Any]) -> bool:
        """Whether this adapter can handle the given document"""

    def schema_errors(self, json_data: Dict[str, Any]) -> List[str]:
        return []


class CurrentCalibrationFormatAdapter(CalibrationFormatAdapter):
    """Adapter for the 1.x ``udc-calibration`` JSON layout"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self._validator = Draft7Validator(CALIBRATION_SCHEMA_V1)

    def get_format_version(self) -> str:
        return "udc-calibration 1.x"

    def validate_format(self, json_data: Dict[str, Any]) -> bool:
        return (json_data.get("format") == "udc-calibration"
                and str(json_data.get("version", "")).startswith("1."))

    def schema_errors(self, json_data: Dict[str, Any]) -> List[str]:
        errors = sorted(self._validator.iter_errors(json_data), key=lambda e: list(e.absolute_path))
        return [f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errors]

    def extract_raw_data(self, json_data: Dict[str, Any]) -> RawCalibrationData:
        resonance = json_data["resonance_profile"]
        cache = json_data["cache"]
        db_latency = {k: v for k, v in json_data["db_latency"].items() if k != "source"}

        raw = RawCalibrationData(
            media=json_data["media"],
            solids=json_data.get("solids", {}),
            resonance_bands=[(b["center_hz"], b["half_width_hz"], b["gain"]) for b in resonance["bands"]],
            off_band_gain=resonance.get("off_band_gain", 0.0),
            angle_points=self._points(json_data["angle_table"]),
            position_points=json_data["position_factors"]["points"],
            degradation_curves={name: self._points(section)
                                for name, section in json_data["degradation_curves"].items()},
            pes_points=self._points(json_data["pes_curve"]),
            cache_hit_ratios=cache["hit_ratios"],
            cache_bands={name: tuple(band) for name, band in cache["latency_bands_ms"].items()},
            db_latency=db_latency,
            vm_inflation=json_data.get("vm_inflation", {}),
            disk_defaults=json_data.get("disk_defaults", {}),
            displacement_reference=json_data.get("displacement_reference", {}),
            benchmark_budgets_s=json_data.get("benchmark_budgets_s", {}),
            figure_derived=self._figure_derived_sections(json_data),
            format_version=str(json_data.get("version", "")),
        )
        self.logger.debug(f"Extracted {len(raw.media)} media, {len(raw.degradation_curves)} degradation curves")
        return raw

    @staticmethod
    def _points(section: Dict[str, Any]) -> List[Tuple[float, float]]:
        return [(float(x), float(y)) for x, y in section["points"]]

    @staticmethod
    def _figure_derived_sections(json_data: Dict[str, Any]) -> List[str]:
        tagged = []

        def visit(prefix: str, node: Any):
            if isinstance(node, dict):
                if "figure-derived" in str(node.get("source", "")):
                    tagged.append(prefix)
                for key, child in node.items():
                    if isinstance(child, dict):
                        visit(f"{prefix}.{key}" if prefix else key, child)

        visit("", json_data)
        return tagged


class CalibrationFormatAdapterFactory:
    """Factory to pick the adapter for a calibration document"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self._adapters: List[CalibrationFormatAdapter] = [CurrentCalibrationFormatAdapter(logger)]

    def get_adapter(self, json_data: Dict[str, Any], source: Optional[str] = None) -> CalibrationFormatAdapter:
        for adapter in self._adapters:
            if adapter.validate_format(json_data):
                self.logger.debug(f"Using calibration adapter: {adapter.get_format_version()}")
                return adapter
        found = f"{json_data.get('format', '?')} {json_data.get('version', '?')}"
        supported = ", ".join(a.get_format_version() for a in self._adapters)
        raise ConfigurationError(f"unsupported calibration format '{found}' (supported: {supported})",
                                 source=source)

    def register_adapter(self, adapter: CalibrationFormatAdapter):
        self._adapters.insert(0, adapter)

    @property
    def supported_formats(self) -> List[str]:
        return [a.get_format_version() for a in self._adapters]


class CalibrationDataConverter:
    """Converts raw calibration sections into the Calibration domain model"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)

    def convert(self, raw: RawCalibrationData, source: Optional[str] = None) -> Calibration:
        problems: List[str] = []

        def guarded(label: str, build):
            try:
                return build()
            except (ValidationError, KeyError, TypeError, ValueError) as e:
                problems.append(f"{label}: {e}")
                return None

        media = {name: guarded(f"media.{name}", lambda n=name, m=spec: self._medium(n, m))
                 for name, spec in raw.media.items()}
        solids = {name: guarded(f"solids.{name}", lambda n=name, s=spec: SolidLayer(name=n, **s))
                  for name, spec in raw.solids.items()}
        profile = guarded("resonance_profile", lambda: ResonanceProfile(
            bands=tuple(ResonanceBand(c, w, g) for c, w, g in raw.resonance_bands),
            off_band_gain=raw.off_band_gain))

        angle_table = tuple(sorted(raw.angle_points))
        if not angle_table or angle_table[0] != (0.0, 1.0):
            problems.append("angle_table: must start at 0 degrees with factor 1.0")

        curves = {}
        for name, points in raw.degradation_curves.items():
            curve = tuple(points)
            if guarded(f"degradation_curves.{name}", lambda c=curve, n=name: validate_degradation_curve(c, n) or True):
                curves[name] = curve
        for env in raw.media:
            if f"{env}_write" not in curves and env in ("lab", "open_water"):
                problems.append(f"degradation_curves: missing '{env}_write'")

        hit_ratios = {}
        for kind, by_size in raw.cache_hit_ratios.items():
            for size, p in by_size.items():
                try:
                    hit_ratios[(kind, float(size))] = float(p)
                except ValueError:
                    problems.append(f"cache.hit_ratios.{kind}: cache size '{size}' is not a number")

        for name, (low, high) in raw.cache_bands.items():
            if low > high:
                problems.append(f"cache.latency_bands_ms.{name}: lower bound exceeds upper")

        db_tables = {}
        for count, table in raw.db_latency.items():
            knots = tuple((float(x), float(y)) for x, y in table["points"])
            if knots[0][1] < 1.0:
                problems.append(f"db_latency.{count}: normalized latency at 0 dB must be >= 1")
            db_tables[int(count)] = DbLatencyTable(
                underwater_count=int(count), knots=knots,
                out_of_service_above_db=float(table.get("out_of_service_above_db", 38.0)))

        position_factors = {}
        for location, factor in raw.position_points.items():
            try:
                position_factors[int(location)] = float(factor)
            except ValueError:
                problems.append(f"position_factors: location '{location}' is not an integer")

        if problems:
            raise ConfigurationError(problems, source=source)

        vm = raw.vm_inflation
        calibration = Calibration(
            media=media,
            solids=solids,
            resonance_profile=profile,
            angle_table=angle_table,
            position_factors=position_factors,
            degradation_curves=curves,
            pes_curve=tuple(raw.pes_points),
            cache_hit_ratios=hit_ratios,
            cache_bands=dict(raw.cache_bands),
            db_latency=db_tables,
            vm_inflation=VmInflation(**vm) if vm else VmInflation(),
            disk_defaults=DiskDefaults(**raw.disk_defaults),
            displacement_reference=DisplacementReference(**raw.displacement_reference),
            benchmark_budgets_s=dict(raw.benchmark_budgets_s),
            figure_derived=list(raw.figure_derived),
            format_version=raw.format_version,
            source_path=source or "",
        )
        return calibration

    @staticmethod
    def _medium(name: str, spec: Dict[str, Any]) -> Medium:
        curve = spec.get("spl_distance_curve") or {}
        return Medium(
            name=name,
            density=spec["density"],
            sound_speed=spec["sound_speed"],
            attenuation_coeff=spec["attenuation_coeff"],
            noise_floor_spl=spec["noise_floor_spl"],
            salinity=spec.get("salinity"),
            temperature_c=spec.get("temperature_c"),
            spl_distance_curve=tuple((float(x), float(y)) for x, y in curve.get("points", [])),
            curve_source_spl=curve.get("source_spl"),
        )
