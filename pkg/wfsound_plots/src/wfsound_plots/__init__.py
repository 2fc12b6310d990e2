"""Plot report for wfsound benchmark CSVs.

Consumes the bench CSV schema (instance, family, param, places,
transitions, property, outcome, time_ms, timeout) and renders one
runtime-vs-parameter chart per spec: a thick mean line per group with
thin min/max envelopes, an optional horizontal timeout line, and
timed-out rows marked on that line. Aggregates are computed in exact
rational arithmetic and written to a ``.agg.csv`` sidecar.
"""

from .report import PlotSpec, aggregate, render_plots

__all__ = ["PlotSpec", "aggregate", "render_plots"]
