"""Exact formulas, simulation and identity checks for the TASEP with second class particles."""

__version__ = "0.1.0"
