"""
Plot Script Templates

gnuplot script templates, one per experiment recipe. The generator fills them in
from the CSVs a recipe wrote; scripts are emitted as data and never executed here.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


SCRIPT_HEADER = """# {title}
# Regenerate the figure with: gnuplot {script_name}
set datafile separator ','
set datafile missing 'NA'
set key autotitle columnhead
set terminal pngcairo size 900,600
set output '{png_name}'
set title '{title}'
set xlabel '{xlabel}'
set ylabel '{ylabel}'
set grid
"""

SERIES_LINE = "'{csv}' using '{x}':'{y}' with {style} title '{label}'"


@dataclass(frozen=True)
class PlotSpec:
    """One figure: a CSV, an x column and the y columns to draw ('*' = every other column)"""
    title: str
    csv: str
    x: str
    y: Tuple[str, ...]
    xlabel: str
    ylabel: str
    style: str = "linespoints"
    settings: Tuple[str, ...] = ()
    extra_series: Tuple[str, ...] = ()


class PlotTemplates:
    """Plot specifications keyed by recipe"""

    def __init__(self):
        self.templates = self._initialize_templates()

    def _initialize_templates(self) -> Dict[str, List[PlotSpec]]:
        return {
            "sweep": [PlotSpec(
                "Normalized throughput vs frequency", "sweep.csv", "frequency_hz",
                ("normalized_throughput",), "Frequency (Hz)", "Throughput (fraction of baseline)",
                style="lines", settings=("set yrange [0:1.05]",))],
            "volume-curve": [
                PlotSpec("Throughput vs dSPL", "volume_curve.csv", "delta_spl_db",
                         ("normalized_throughput",), "dSPL (dB)", "Throughput (fraction of baseline)"),
                PlotSpec("Throughput vs distance", "distance_curve.csv", "distance_m",
                         ("normalized_throughput",), "Distance (m)", "Throughput (fraction of baseline)"),
            ],
            "positions": [PlotSpec(
                "Throughput by injection point", "positions.csv", "location",
                ("normalized_throughput",), "Injection location", "Throughput (fraction of baseline)",
                style="boxes", settings=("set style fill solid 0.5", "set boxwidth 0.6"))],
            "angle": [PlotSpec(
                "Throughput vs speaker angle", "angle.csv", "orientation_deg",
                ("normalized_throughput",), "Angle (deg)", "Throughput (fraction of baseline)")],
            "hdfs-cascade": [PlotSpec(
                "Drive and data-node liveness", "liveness.csv", "time_min", ("*",),
                "Time (min)", "Live (1) / not live (0)", style="steps",
                settings=("set yrange [-0.1:1.1]",))],
            "db-latency": [PlotSpec(
                "Normalized database latency", "db_latency.csv", "delta_spl_db", ("*",),
                "dSPL (dB)", "Latency (x baseline)")],
            "vm-migration": [
                PlotSpec("VMs assigned per window", "vm_migration.csv", "window_start_s",
                         ("underwater_assigned", "onland_assigned", "baseline_underwater_assigned"),
                         "Window start (s)", "VMs assigned", style="histeps"),
                PlotSpec("VM state latency vs dSPL", "vm_state_latency.csv", "delta_spl_db",
                         ("PROLOG", "RUNNING"), "dSPL (dB)", "Latency (x base)"),
            ],
            "snia-replay": [PlotSpec(
                "Fulfilled requests vs dSPL", "snia_summary.csv", "delta_spl_db", ("*",),
                "dSPL (dB)", "Fulfilled requests (%)")],
            "cache-bench": [
                PlotSpec("Bandwidth degradation under attack", "cache_bandwidth.csv", "cache_size_gb",
                         ("bandwidth_degradation_pct",), "Cache size (GB)", "Degradation (%)", style="points"),
                PlotSpec("Latency CDF (random write)", "cdf_RW.csv", "latency_ms",
                         ("cdf_benign", "cdf_attacked"), "Latency (ms)", "CDF", style="lines",
                         settings=("set logscale x",)),
                PlotSpec("Latency CDF (sequential write)", "cdf_SW.csv", "latency_ms",
                         ("cdf_benign", "cdf_attacked"), "Latency (ms)", "CDF", style="lines",
                         settings=("set logscale x",)),
            ],
            "fem-attenuation": [PlotSpec(
                "Displacement vs distance", "fem_attenuation.csv", "distance_m",
                ("displacement_nm",), "Distance (m)", "Displacement (nm)", style="lines")],
            "detect-eval": [PlotSpec(
                "Detector operating points", "detect_eval.csv", "fpr", ("tpr",),
                "False positive rate", "True positive rate", style="points pt 7",
                settings=("set xrange [0:1]", "set yrange [0:1.05]"),
                extra_series=("'{csv}' using 'fpr':'tpr':(sprintf('%d dB', column('volume_db'))) "
                              "with labels offset 1,1 notitle",))],
            "run": [PlotSpec(
                "Storage throughput", "throughput.csv", "time_s", ("*",),
                "Time (s)", "Throughput (MB/s)", style="lines")],
        }

    def get(self, recipe: str) -> List[PlotSpec]:
        return self.templates.get(recipe, [])

    @staticmethod
    def header(spec: PlotSpec, script_name: str, png_name: str) -> str:
        return SCRIPT_HEADER.format(title=spec.title, script_name=script_name, png_name=png_name,
                                    xlabel=spec.xlabel, ylabel=spec.ylabel)

    @staticmethod
    def series(spec: PlotSpec, y_columns: List[str], csv_name: Optional[str] = None) -> str:
        csv = csv_name or spec.csv
        lines = [SERIES_LINE.format(csv=csv, x=spec.x, y=y, style=spec.style, label=y) for y in y_columns]
        lines.extend(extra.format(csv=csv) for extra in spec.extra_series)
        return "plot " + ", \\\n     ".join(lines) + "\n"
