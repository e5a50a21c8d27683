"""
Logging system for the acoustic injection simulator.
"""

import logging
import sys
from typing import Optional
from pathlib import Path


class SimLogger:
    """Logger wrapper with structured, tagged output for simulation runs"""

    def __init__(self, name: str = "udc_acoustic_sim", level: str = "INFO"):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, level.upper()))

        # Prevent duplicate handlers
        if not self.logger.handlers and not logging.getLogger().handlers:
            self._setup_handlers()

    def _setup_handlers(self):
        """Setup console handler; file logging is opt-in via setup_logging"""

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(logging.Formatter('%(levelname)s: %(message)s'))
        self.logger.addHandler(console_handler)

    def get_logger(self) -> logging.Logger:
        """Get the configured logger instance"""
        return self.logger

    def set_level(self, level: str):
        """Set the logging level"""
        self.logger.setLevel(getattr(logging, level.upper()))

    def log_calibration_loaded(self, path: str, figure_derived: int):
        """Log which calibration file is in use"""
        self.logger.info(f"[CONFIG] Calibration loaded: {Path(path).name} ({figure_derived} figure-derived sections)")

    def log_scenario_loaded(self, name: str, horizon_s: float, seed: int):
        self.logger.info(f"[CONFIG] Scenario '{name}': horizon {horizon_s:.0f} s, seed {seed}")

    def log_event(self, time_s: float, kind: str, description: str):
        """Log a simulation event at its simulated time"""
        self.logger.info(f"[EVENT] t={time_s:8.1f}s {kind}: {description}")

    def log_detection_summary(self, volume_db: float, fpr: float, tpr: Optional[float]):
        tpr_text = f"{tpr:.1%}" if tpr is not None else "n/a"
        self.logger.info(f"[RESULTS] {volume_db:.0f} dB dSPL: FPR={fpr:.1%}, TPR={tpr_text}")

    def log_output(self, description: str, output_path: str):
        """Log a written artifact"""
        self.logger.info(f"[OUTPUT] {description}: {output_path}")

    def log_phase_start(self, phase_name: str):
        """Log the start of a processing phase"""
        self.logger.info(f"[START] Starting {phase_name}...")

    def log_phase_complete(self, phase_name: str):
        """Log the completion of a processing phase"""
        self.logger.info(f"[COMPLETE] {phase_name} completed successfully")


def get_logger(name: str = "udc_acoustic_sim", level: str = "INFO") -> logging.Logger:
    """Convenience function to get a configured logger"""
    return SimLogger(name, level).get_logger()


def setup_logging(level: str = "INFO", log_file: Optional[str] = None,
                  quiet: bool = False) -> logging.Logger:
    """Setup logging configuration for the application"""

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, level.upper()))
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(logging.WARNING if quiet else getattr(logging, level.upper()))
    console_handler.setFormatter(logging.Formatter('%(levelname)s: %(message)s'))
    root_logger.addHandler(console_handler)

    if log_file:
        try:
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
            ))
            root_logger.addHandler(file_handler)
        except OSError as e:
            root_logger.warning(f"Could not setup file logging: {e}")

    return root_logger
