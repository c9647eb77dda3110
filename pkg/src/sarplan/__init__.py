"""Minimum-fleet mission planning for energy-constrained exploration robots."""

__version__ = "0.1.0"
