"""
Calibration Parser - format-agnostic loader for calibration files.

Only the adapters know the on-disk layout; this parser reads JSON, collects every
schema and semantic problem, and hands back a Calibration.
"""

import json
import logging
from pathlib import Path
from typing import Optional

from models.calibration_models import Calibration
from parsers.calibration_format_adapter import (
    CalibrationDataConverter, CalibrationFormatAdapter, CalibrationFormatAdapterFactory,
)
from utils.errors import ConfigurationError


class CalibrationParser:
    """Loads calibration files through the adapter factory"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(__name__)
        self.adapter_factory = CalibrationFormatAdapterFactory(logger)
        self.data_converter = CalibrationDataConverter(logger)

    def parse_file(self, file_path: str) -> Calibration:
        path = Path(file_path)
        self.logger.info(f"Loading calibration file: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                json_data = json.load(f)
        except FileNotFoundError:
            raise ConfigurationError(f"calibration file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"invalid JSON at line {e.lineno}: {e.msg}", source=str(path))
        return self.parse_data(json_data, source=str(path))

    def parse_data(self, json_data: dict, source: Optional[str] = None) -> Calibration:
        if not isinstance(json_data, dict):
            raise ConfigurationError("calibration document must be a JSON object", source=source)
        adapter = self.adapter_factory.get_adapter(json_data, source)
        problems = adapter.schema_errors(json_data)
        if problems:
            raise ConfigurationError(problems, source=source)

        raw = adapter.extract_raw_data(json_data)
        calibration = self.data_converter.convert(raw, source=source)
        if calibration.figure_derived:
            self.logger.debug(f"Figure-derived sections: {', '.join(calibration.figure_derived)}")
        return calibration

    def register_format_adapter(self, adapter: CalibrationFormatAdapter):
        self.adapter_factory.register_adapter(adapter)
        self.logger.info(f"Registered calibration adapter: {adapter.get_format_version()}")

    def get_supported_formats(self) -> list:
        return self.adapter_factory.supported_formats


def load_calibration(file_path: str, logger: Optional[logging.Logger] = None) -> Calibration:
    """Convenience function to load a calibration file"""
    return CalibrationParser(logger).parse_file(file_path)
