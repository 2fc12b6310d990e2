"""Chart rendering and exact aggregation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import matplotlib
import pandas as pd

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

AGGREGATIONS = ("mean", "min", "max")


@dataclass(frozen=True)
class PlotSpec:
    """One chart: y aggregated over x, one curve per group value."""

    x: str = "param"
    y: str = "time_ms"
    group: str = "family"
    aggregations: tuple = AGGREGATIONS
    timeout_line: float | None = None   # seconds, None = no line
    name: str = "runtime"

    def columns(self) -> tuple:
        return (self.x, self.y, self.group, "timeout")


def _load(csv_path, spec: PlotSpec) -> pd.DataFrame:
    # time values stay strings so aggregation is exact
    frame = pd.read_csv(csv_path, dtype=str)
    missing = [c for c in spec.columns() if c not in frame.columns]
    if missing:
        raise ValueError(f"missing columns: {', '.join(missing)}")
    if frame.empty:
        raise ValueError("empty CSV")
    return frame


def aggregate(frame: pd.DataFrame, spec: PlotSpec) -> list:
    """Per (group, x) aggregates of y in exact rational arithmetic.

    Returns rows of (group, x, n, mean, min, max, timeouts) sorted by
    group then numeric x; mean/min/max are Fractions.
    """
    rows = []
    for (group, x), part in frame.groupby([spec.group, spec.x], sort=False):
        values = [Fraction(v) for v in part[spec.y]]
        timeouts = sum(int(v) != 0 for v in part["timeout"])
        rows.append((group, x, len(values),
                     sum(values) / len(values), min(values), max(values),
                     timeouts))
    return sorted(rows, key=lambda r: (r[0], Fraction(r[1])))


def _write_sidecar(path: Path, rows: list, spec: PlotSpec) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow((spec.group, spec.x, "n", f"mean_{spec.y}",
                         f"min_{spec.y}", f"max_{spec.y}", "timeouts"))
        for group, x, n, mean, lo, hi, timeouts in rows:
            writer.writerow((group, x, n, mean, lo, hi, timeouts))


def _render(frame: pd.DataFrame, rows: list, spec: PlotSpec,
            out_path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    groups = sorted({r[0] for r in rows})
    for i, group in enumerate(groups):
        mine = [r for r in rows if r[0] == group]
        xs = [float(Fraction(r[1])) for r in mine]
        mean_s = [float(r[3]) / 1000 for r in mine]
        min_s = [float(r[4]) / 1000 for r in mine]
        max_s = [float(r[5]) / 1000 for r in mine]
        color = f"C{i}"
        ax.plot(xs, mean_s, color=color, linewidth=2.2, label=str(group))
        ax.plot(xs, min_s, color=color, linewidth=0.7, alpha=0.7)
        ax.plot(xs, max_s, color=color, linewidth=0.7, alpha=0.7)
        ax.fill_between(xs, min_s, max_s, color=color, alpha=0.12)
    if spec.timeout_line is not None:
        ax.axhline(spec.timeout_line, color="0.55", linewidth=1.4)
        timed = frame[frame["timeout"].astype(int) != 0]
        if not timed.empty:
            xs = [float(Fraction(v)) for v in timed[spec.x]]
            ax.plot(xs, [spec.timeout_line] * len(xs), linestyle="none",
                    marker="x", color="0.35", markersize=7)
    ax.set_xlabel(spec.x)
    ax.set_ylabel("time [s]")
    ax.legend(title=spec.group, fontsize="small")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_plots(csv_path, out_dir, specs=None,
                 timeout_line: float | None = None) -> list:
    """Render one chart per spec plus a ``.agg.csv`` sidecar each.

    Returns the list of written image paths. Raises ValueError on a
    CSV without data rows or without the referenced columns.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if specs is None:
        specs = [PlotSpec(timeout_line=timeout_line)]
    images = []
    for spec in specs:
        frame = _load(csv_path, spec)
        rows = aggregate(frame, spec)
        _write_sidecar(out_dir / f"{spec.name}.agg.csv", rows, spec)
        image = out_dir / f"{spec.name}.png"
        _render(frame, rows, spec, image)
        images.append(image)
    return images
