"""
Output Generation Package

Writes everything a command produces under its output directory:

- csv_exporter.py: tables, metric and event logs, key=value summaries
- plot_script_generator.py: gnuplot scripts reproducing each figure from the CSVs
- experiment_recipes.py: one recipe per experiment subcommand
"""

from .csv_exporter import ResultExporter
from .plot_script_generator import PlotScriptGenerator
from .experiment_recipes import ExperimentRecipes, RecipeContext

__all__ = ['ResultExporter', 'PlotScriptGenerator', 'ExperimentRecipes', 'RecipeContext']
