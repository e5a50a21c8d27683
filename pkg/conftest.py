"""
Shared pytest fixtures: the packaged calibration and small storage builders.
"""

from pathlib import Path

import pytest

from models.engine_models import DiskSpec
from parsers.calibration_parser import load_calibration
from simulators.storage import StorageTarget, build_disk_models
from utils.config import DEFAULT_CALIBRATION_PATH

SCENARIO_DIR = Path(__file__).resolve().parent / "scenarios"


@pytest.fixture(scope="session")
def calibration():
    return load_calibration(str(DEFAULT_CALIBRATION_PATH))


@pytest.fixture
def lone_disk(calibration):
    """Factory for a single-disk StorageTarget with optional DiskSpec overrides"""
    def build(disk_id="disk0", environment="lab", **overrides):
        spec = DiskSpec(disk_id, overrides=overrides)
        return StorageTarget(build_disk_models([spec], calibration, environment))
    return build
