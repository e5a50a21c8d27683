"""
Plot Templates Package

gnuplot script templates for every experiment recipe.
"""

from .plot_templates import PlotSpec, PlotTemplates

__all__ = ['PlotSpec', 'PlotTemplates']
