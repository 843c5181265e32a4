"""Figure scripts for noiseaid experiment artifacts.

Reads the harness CSV schemas (trajectory.csv, aggregates.csv) and renders
phase portraits, state time series, and deviation-vs-intensity curves.
"""

__all__ = ["render"]
