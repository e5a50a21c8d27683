"""
Configuration management for the acoustic injection simulator.
"""

from dataclasses import dataclass, field, asdict
from typing import Dict, Optional, Any
import json
import logging
import os
from pathlib import Path


CALIBRATION_ENV_VAR = "UDC_SIM_CALIBRATION"
DEFAULT_CALIBRATION_PATH = Path(__file__).resolve().parent.parent / "data" / "calibration_default.json"


@dataclass
class EngineConfig:
    """Clock and cadence settings of the event loop"""

    sample_period_s: float = 1.0
    # Scheduler capacity feed refresh
    monitoring_period_s: float = 30.0
    # Name-node evaluation cadence for data-node liveness
    heartbeat_interval_s: float = 3.0


@dataclass
class NoiseConfig:
    """Run-to-run variance of measured throughput"""

    throughput_sigma: float = 0.03


@dataclass
class DetectorConfig:
    """Settings of the profiling + clustering defence"""

    resample_count: int = 64
    normalization: str = "reference_range"
    # "trapezoidal": area between time-aligned curves; "arc_length": equal arc-length pairing
    area_rule: str = "trapezoidal"
    n_clusters: int = 2
    max_iter: int = 100
    tol: float = 1e-9
    # A new distance must sit this many calibration std-devs above the benign mean
    min_separation_sigma: float = 4.0
    alarm_min_disks: int = 3
    profiling_trials: int = 100
    trace_duration_s: float = 30.0


@dataclass
class ReportConfig:
    """Configuration for output generation"""

    emit_plots: bool = True
    float_precision: int = 6
    summary_filename: str = "summary.txt"


@dataclass
class SimulatorConfig:
    """Main configuration class for the simulator"""

    engine: EngineConfig = field(default_factory=EngineConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    reporting: ReportConfig = field(default_factory=ReportConfig)

    log_level: str = "INFO"
    output_directory: str = "./output"
    calibration_path: Optional[str] = None

    # Detector evaluation trials may run on a worker pool
    parallel_processing: bool = False
    max_workers: int = 4

    def save_to_file(self, file_path: str):
        """Save configuration to JSON file"""
        with open(file_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load_from_file(cls, file_path: str) -> 'SimulatorConfig':
        """Load configuration from JSON file"""
        with open(file_path, 'r', encoding='utf-8') as f:
            config_dict = json.load(f)

        return cls.from_dict(config_dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary"""
        return asdict(self)

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'SimulatorConfig':
        """Create configuration from dictionary"""

        return cls(
            engine=EngineConfig(**config_dict.get('engine', {})),
            noise=NoiseConfig(**config_dict.get('noise', {})),
            detector=DetectorConfig(**config_dict.get('detector', {})),
            reporting=ReportConfig(**config_dict.get('reporting', {})),
            log_level=config_dict.get('log_level', 'INFO'),
            output_directory=config_dict.get('output_directory', './output'),
            calibration_path=config_dict.get('calibration_path'),
            parallel_processing=config_dict.get('parallel_processing', False),
            max_workers=config_dict.get('max_workers', 4)
        )

    def resolve_calibration_path(self, override: Optional[str] = None,
                                 scenario_ref: Optional[str] = None) -> Path:
        """Flag, then scenario reference, then environment, then configured path, then the packaged default"""
        for candidate in (override, scenario_ref, os.environ.get(CALIBRATION_ENV_VAR), self.calibration_path):
            if candidate:
                return Path(candidate)
        return DEFAULT_CALIBRATION_PATH


def get_default_config() -> SimulatorConfig:
    """Get the default configuration"""
    return SimulatorConfig()


def load_config(config_file: Optional[str] = None) -> SimulatorConfig:
    """Load configuration from file or return default"""

    if config_file and Path(config_file).exists():
        try:
            return SimulatorConfig.load_from_file(config_file)
        except (OSError, ValueError, TypeError) as e:
            logging.getLogger(__name__).warning(
                f"Could not load config file {config_file}: {e}; using default configuration")

    return get_default_config()


def save_default_config(output_file: str = "simulator_config.json", preset: str = "desk") -> str:
    """Save a preset configuration to file for customization"""
    config = get_preset_config(preset)
    config.save_to_file(output_file)
    return output_file


# Predefined configuration presets
PRESET_CONFIGS = {
    # Full trial counts for publication-grade runs
    "full": SimulatorConfig(
        detector=DetectorConfig(profiling_trials=100),
    ),

    # Smoke runs: fewer trials, coarser feed
    "quick": SimulatorConfig(
        engine=EngineConfig(monitoring_period_s=60.0),
        detector=DetectorConfig(profiling_trials=20, resample_count=32),
        reporting=ReportConfig(emit_plots=False),
    ),

    "desk": SimulatorConfig()  # Default is desk scale
}


def get_preset_config(preset_name: str) -> SimulatorConfig:
    """Get a predefined configuration preset"""
    if preset_name in PRESET_CONFIGS:
        return SimulatorConfig.from_dict(PRESET_CONFIGS[preset_name].to_dict())
    available_presets = list(PRESET_CONFIGS.keys())
    raise ValueError(f"Unknown preset '{preset_name}'. Available presets: {available_presets}")
