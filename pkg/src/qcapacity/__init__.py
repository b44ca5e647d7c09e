"""Quantum channel information measures, single-use capacities and
superactivation diagnostics."""

__version__ = "0.1.0"
