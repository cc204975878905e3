"""Tools for building and scoring long-distance number-agreement benchmarks."""

__version__ = "0.1.0"
