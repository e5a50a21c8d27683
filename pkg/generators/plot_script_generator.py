"""
Plot Script Generator

Turns a recipe's CSV outputs into gnuplot scripts placed next to them.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Optional

import pandas as pd

from templates.plot_templates import PlotSpec, PlotTemplates
from utils.errors import ValidationError


class PlotScriptGenerator:
    """Writes one ``.gp`` script per figure of a recipe"""

    def __init__(self, output_dir: str, logger: Optional[logging.Logger] = None):
        self.output_dir = Path(output_dir)
        self.logger = logger or logging.getLogger(__name__)
        self.templates = PlotTemplates()

    def emit_plots(self, recipe: str, exported: Iterable[str]) -> List[str]:
        """Scripts for every figure of ``recipe`` whose CSV this run exported; missing columns are an error"""
        fresh = {Path(p).resolve() for p in exported}
        written = []
        for spec in self.templates.get(recipe):
            csv_path = self.output_dir / spec.csv
            if csv_path.resolve() not in fresh:
                self.logger.debug(f"Skipping plot '{spec.title}': {csv_path.name} not written")
                continue
            written.append(self._write_script(spec, csv_path))
        return written

    def _columns_for(self, spec: PlotSpec, csv_path: Path) -> List[str]:
        header = list(pd.read_csv(csv_path, nrows=0).columns)
        if spec.y == ("*",):
            wanted = [c for c in header if c != spec.x]
        else:
            wanted = list(spec.y)
        missing = [c for c in [spec.x] + wanted if c not in header]
        if missing:
            raise ValidationError(f"{csv_path.name} lacks column(s) needed for plotting: {', '.join(missing)}")
        return wanted

    def _write_script(self, spec: PlotSpec, csv_path: Path) -> str:
        y_columns = self._columns_for(spec, csv_path)
        stem = csv_path.stem
        script_path = self.output_dir / f"{stem}.gp"
        body = self.templates.header(spec, script_path.name, f"{stem}.png")
        body += "".join(f"{line}\n" for line in spec.settings)
        body += self.templates.series(spec, y_columns, csv_path.name)
        with open(script_path, 'w', encoding='utf-8', newline="\n") as f:
            f.write(body)
        self.logger.debug(f"Plot script written: {script_path}")
        return str(script_path)
