#!/usr/bin/env python3
"""
SVG Line Charts

Plots one trajectory column against t, optionally overlaid with its lower and
upper envelopes, and draws envelope-only charts for the bound figures. Each
line carries an SVG group id "series-<role>" (trajectory, lower, upper).
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from envelopes import EnvelopeMode, EnvelopeSet, QUANTITIES  # noqa: E402
from errors import UnknownColumn  # noqa: E402
from trajectory_io import read_trajectory_csv  # noqa: E402
from integrator import TRAJECTORY_COLUMNS  # noqa: E402

logger = logging.getLogger(__name__)

COLUMN_LABELS = {
    "a": "a(t)",
    "H": "H(t)",
    "phi": "φ(t)",
    "phidot": "dφ/dt",
    "constraint": "normalized constraint residual",
    "power": "normalized power residual",
    "denominator": "Gauss-Bonnet denominator",
}
LINE_STYLES = {"trajectory": "-", "lower": "--", "upper": ":"}

PathLike = Union[str, Path]


@dataclass
class PlotSeries:
    """One polyline of a chart."""
    label: str
    t: np.ndarray
    y: np.ndarray
    role: str


def envelope_series(env: EnvelopeSet, quantity: str, times: Sequence[float],
                    a0: float = 1.0) -> List[PlotSeries]:
    """Lower and upper envelope polylines of a quantity at the given times."""
    if quantity not in QUANTITIES:
        raise UnknownColumn(f"no envelope for column '{quantity}'")
    times = np.asarray([t for t in times if env.mode is EnvelopeMode.THM21 or t >= 0.0], dtype=float)
    pairs = np.array([env.bounds(quantity, float(t), a0) for t in times]).reshape(-1, 2)
    label = COLUMN_LABELS[quantity]
    return [
        PlotSeries(f"lower bound of {label}", times, pairs[:, 0], "lower"),
        PlotSeries(f"upper bound of {label}", times, pairs[:, 1], "upper"),
    ]


def build_series(frame: pd.DataFrame, column: str, overlay: Optional[EnvelopeSet] = None,
                 log_t: bool = False) -> List[PlotSeries]:
    """
    Trajectory polyline of a column plus, with an overlay, its envelopes at the
    same abscissae. log_t keeps only t > 0.

    Raises:
        UnknownColumn: column is not a trajectory column, or has no envelope
    """
    if column not in TRAJECTORY_COLUMNS or column == "t":
        raise UnknownColumn(f"unknown column '{column}'; expected one of {TRAJECTORY_COLUMNS[1:]}")
    if log_t:
        frame = frame[frame["t"] > 0.0]
    t = frame["t"].to_numpy(dtype=float)
    series = [PlotSeries(COLUMN_LABELS[column], t, frame[column].to_numpy(dtype=float), "trajectory")]
    if overlay is not None:
        launch = frame.loc[frame["t"] == 0.0, "a"]
        a0 = float(launch.iloc[0]) if len(launch) else float(frame["a"].iloc[0])
        series.extend(envelope_series(overlay, column, t, a0))
    return series


def render_svg(series: Sequence[PlotSeries], path: PathLike, title: str, ylabel: str,
               log_t: bool = False) -> Path:
    """Draw the polylines as a standalone SVG line chart."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    try:
        for item in series:
            (line,) = ax.plot(item.t, item.y, LINE_STYLES.get(item.role, "-"), label=item.label, linewidth=1.4)
            line.set_gid(f"series-{item.role}")
        if log_t:
            ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best")
        fig.tight_layout()
        fig.savefig(path, format="svg")
    finally:
        plt.close(fig)
    logger.info(f"Wrote {path}")
    return path


def plot_column(csv_path: PathLike, column: str, output: PathLike,
                overlay: Optional[EnvelopeSet] = None, log_t: bool = False) -> List[PlotSeries]:
    """Read a trajectory CSV and chart one column; returns the plotted series."""
    frame = read_trajectory_csv(csv_path)
    series = build_series(frame, column, overlay, log_t)
    title = f"Evolution of {COLUMN_LABELS[column]}"
    if overlay is not None:
        title += f" (beta={overlay.beta:.4g}, alpha={overlay.alpha:.4g}, {overlay.mode.value})"
    render_svg(series, output, title, COLUMN_LABELS[column], log_t)
    return series
