"""
Main entry point for the underwater data-center acoustic injection simulator.
Command-line interface: one subcommand per experiment, plus scenario execution.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from generators.csv_exporter import ResultExporter
from generators.experiment_recipes import ExperimentRecipes, RecipeContext
from generators.plot_script_generator import PlotScriptGenerator
from parsers.calibration_parser import load_calibration
from parsers.scenario_parser import load_scenario
from utils.config import PRESET_CONFIGS, load_config, save_default_config
from utils.errors import ConfigurationError, TraceParseError
from utils.logger import SimLogger, setup_logging

EXIT_OK = 0
EXIT_RUNTIME_ERROR = 1
EXIT_CONFIG_ERROR = 2

SCENARIO_DIR = Path(__file__).resolve().parent / "scenarios"

EXPERIMENT_COMMANDS = {
    "sweep": "Frequency sweep: normalized throughput per frequency, flags resonant bands",
    "volume-curve": "Throughput vs dSPL (and vs distance when the scenario lists distances)",
    "positions": "Throughput per injection location on the enclosure",
    "angle": "Throughput per speaker orientation",
    "hdfs-cascade": "Drive, RAID and data-node event timeline under a constant tone",
    "db-latency": "Normalized database latency vs dSPL per underwater node count",
    "vm-migration": "VM placement shift away from the attacked host (baseline vs attack)",
    "snia-replay": "Block-trace replay: fulfilled requests within the wall-clock budget",
    "cache-bench": "Hybrid SSD cache: bandwidth degradation and latency CDFs",
    "fem-attenuation": "Displacement vs distance plus enclosure physics report",
    "detect-profile": "Profile benign throughput per disk into a profile store",
    "detect-eval": "Detector FPR/TPR over random benign/attacked disk combinations",
    "run": "Run a scenario through the event engine and write its logs",
}


def setup_cli_parser() -> argparse.ArgumentParser:
    """Setup command-line argument parser"""

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='FILE', help='Application configuration JSON')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], default='INFO',
                        help='Logging level (default: INFO)')
    common.add_argument('--log-file', metavar='FILE', help='Also write a detailed log to FILE')
    common.add_argument('--quiet', action='store_true', help='Only warnings and errors on the console')

    experiment = argparse.ArgumentParser(add_help=False)
    experiment.add_argument('--scenario', metavar='PATH',
                            help='Scenario JSON (default: the shipped scenarios/<command>.json)')
    experiment.add_argument('--out', metavar='DIR', help='Output directory (default: from configuration)')
    experiment.add_argument('--seed', type=int, help='Override the scenario master seed')
    experiment.add_argument('--calibration', metavar='PATH',
                            help='Calibration JSON (overrides scenario, environment and configuration)')
    experiment.add_argument('--trials', type=int, help='Override the recipe trial count')

    parser = argparse.ArgumentParser(
        description="Underwater data-center acoustic injection simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Reproduce the drive/RAID/data-node cascade with the shipped scenario
  python main.py hdfs-cascade --out out/hdfs

  # Volume curve in open water with a custom calibration file
  python main.py volume-curve --scenario scenarios/volume-curve-open-water.json --calibration my_cal.json

  # Detector evaluation with another seed
  python main.py detect-eval --seed 7 --out out/detect

  # Write the default application configuration
  python main.py init-config --preset quick --output simulator_config.json
        """
    )
    subparsers = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')
    for name, help_text in EXPERIMENT_COMMANDS.items():
        subparsers.add_parser(name, parents=[common, experiment], help=help_text, description=help_text)

    init = subparsers.add_parser('init-config', parents=[common],
                                 help='Write a configuration preset to a JSON file')
    init.add_argument('--preset', choices=sorted(PRESET_CONFIGS), default='desk',
                      help='Configuration preset (default: desk)')
    init.add_argument('--output', metavar='FILE', default='simulator_config.json',
                      help='Target file (default: simulator_config.json)')
    return parser


def default_scenario_path(command: str) -> Path:
    return SCENARIO_DIR / f"{command}.json"


def experiment_command(command: str, args: argparse.Namespace, sim_logger: SimLogger) -> dict:
    """Load scenario and calibration, run one recipe, write its outputs"""

    logger = sim_logger.get_logger()
    try:
        sim_logger.log_phase_start(command)
        config = load_config(args.config)

        scenario_path = args.scenario or str(default_scenario_path(command))
        scenario = load_scenario(scenario_path, logger)
        if args.seed is not None:
            scenario.seed = args.seed
        sim_logger.log_scenario_loaded(scenario.name, scenario.horizon_s, scenario.seed)

        calibration_path = config.resolve_calibration_path(args.calibration, scenario.calibration)
        calibration = load_calibration(str(calibration_path), logger)
        sim_logger.log_calibration_loaded(str(calibration_path), len(calibration.figure_derived))

        output_dir = args.out or config.output_directory
        exporter = ResultExporter(output_dir, config.reporting.float_precision, logger)
        context = RecipeContext(scenario, calibration, config, exporter, sim_logger, args.trials)
        summary = ExperimentRecipes(context).execute(command)
        exporter.export_summary(summary, config.reporting.summary_filename)

        plots: List[str] = []
        if config.reporting.emit_plots:
            plots = PlotScriptGenerator(output_dir, logger).emit_plots(command, exporter.written)
        for path in exporter.written + plots:
            sim_logger.log_output(Path(path).name, path)
        sim_logger.log_phase_complete(command)

        return {
            "success": True,
            "command": command,
            "summary": summary,
            "files": exporter.written + plots,
            "error": None,
            "exit_code": EXIT_OK,
        }

    except (ConfigurationError, TraceParseError) as e:
        logger.error(f"[ERROR] Invalid configuration: {e}")
        return {"success": False, "command": command, "summary": {}, "error": str(e),
                "exit_code": EXIT_CONFIG_ERROR}
    except Exception as e:
        logger.error(f"[ERROR] {command} failed: {e}")
        logger.debug("Traceback:", exc_info=True)
        return {"success": False, "command": command, "summary": {}, "error": str(e),
                "exit_code": EXIT_RUNTIME_ERROR}


def init_config_command(preset: str, output_file: str, logger) -> dict:
    """Execute configuration generation command"""

    try:
        save_default_config(output_file, preset)
        logger.info(f"[SUCCESS] '{preset}' configuration saved to: {output_file}")
        return {"success": True, "command": "init-config",
                "summary": {"preset": preset, "output_file": output_file},
                "error": None, "exit_code": EXIT_OK}
    except (OSError, ValueError) as e:
        logger.error(f"[ERROR] Configuration generation failed: {e}")
        return {"success": False, "command": "init-config", "summary": {}, "error": str(e),
                "exit_code": EXIT_RUNTIME_ERROR}


def format_summary_output(results: dict) -> str:
    """Format results as summary output"""

    lines = [f"Command: {results['command']}"]
    if not results["success"]:
        lines.append(f"Error:   {results['error']}")
        return "\n".join(lines)
    for key in sorted(results["summary"]):
        value = results["summary"][key]
        if isinstance(value, float):
            value = f"{value:.4f}"
        lines.append(f"  {key}: {value}")
    if results.get("files"):
        lines.append(f"Files written: {len(results['files'])}")
    return "\n".join(lines)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""

    parser = setup_cli_parser()
    args = parser.parse_args(argv)

    setup_logging(args.log_level, args.log_file, args.quiet)
    sim_logger = SimLogger(level=args.log_level)
    logger = sim_logger.get_logger()

    try:
        if args.command == 'init-config':
            results = init_config_command(args.preset, args.output, logger)
        else:
            results = experiment_command(args.command, args, sim_logger)

        if not args.quiet:
            print("\n" + "=" * 60)
            print("RESULTS:")
            print("=" * 60)
            print(format_summary_output(results))
        return results["exit_code"]

    except KeyboardInterrupt:
        logger.info("[STOP] Operation cancelled by user")
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
