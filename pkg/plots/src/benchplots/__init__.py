"""Throughput-vs-threads figures from benchmark result CSVs."""

from benchplots.plot import PlotError, aggregate_means, load_rows, render, write_means_csv

__all__ = ["PlotError", "aggregate_means", "load_rows", "render", "write_means_csv"]
