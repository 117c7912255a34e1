"""Figure panels from sweep CSVs.

This package is a dumb view of the ``agingmimo sweep`` CSV files: it never
recomputes any model quantity.  Each input CSV becomes one curve (the
``value`` column on x, ``sse_bits`` on y), each panel is one axis, and next
to every image a ``<out>.points.json`` sidecar records exactly the plotted
arrays so reruns can be compared byte for byte.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  backend must be fixed first

__version__ = "0.1.0"

# x-axis caption per panel; the panel name matches the CSV's axis column
PANEL_X_LABELS = {
    "n_t": "transmit antennas",
    "n_r": "receive antennas",
    "doppler": "normalized Doppler",
    "rician": "Rician factor",
    "pathloss_db": "path loss (dB)",
}

Y_LABEL = "sum spectral efficiency (bits per slot)"

# columns the view actually plots, checked in this order
REQUIRED_COLUMNS = ("axis", "value", "sse_bits")


class FigureError(Exception):
    """Bad inputs for a panel: missing file, missing column, axis mismatch."""


@dataclasses.dataclass(frozen=True)
class SweepSeries:
    """One curve: the axis it was swept over and its plotted points."""

    axis: str
    x: tuple[float, ...]
    y: tuple[float, ...]


@dataclasses.dataclass(frozen=True)
class FigureSpec:
    """One panel: input CSVs, their legend labels, and the output path."""

    csvs: tuple[str, ...]
    panel: str
    labels: tuple[str, ...]
    out: str
    x_label: str | None = None
    y_label: str | None = None

    def __post_init__(self):
        if self.panel not in PANEL_X_LABELS:
            known = ", ".join(sorted(PANEL_X_LABELS))
            raise FigureError(f"unknown panel '{self.panel}', expected one of {known}")
        if not self.csvs:
            raise FigureError("need at least one input CSV")
        if len(self.labels) != len(self.csvs):
            raise FigureError(
                f"got {len(self.labels)} labels for {len(self.csvs)} CSVs")

    def resolved_x_label(self) -> str:
        return self.x_label if self.x_label is not None else PANEL_X_LABELS[self.panel]

    def resolved_y_label(self) -> str:
        return self.y_label if self.y_label is not None else Y_LABEL


def read_sweep_series(path: str) -> SweepSeries:
    """Parse one sweep CSV into a curve.

    Comment lines starting with ``#`` are skipped; the first remaining row
    is the header.  Raises :class:`FigureError` naming the first missing
    required column, and on empty or mixed-axis files.
    """
    if not os.path.exists(path):
        raise FigureError(f"input CSV does not exist: {path}")
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise FigureError(f"{path}: no header row")
    header = rows[0]
    for col in REQUIRED_COLUMNS:
        if col not in header:
            raise FigureError(f"{path}: missing column '{col}'")
    idx = {col: header.index(col) for col in REQUIRED_COLUMNS}
    data = rows[1:]
    if not data:
        raise FigureError(f"{path}: no data rows")
    axes = {row[idx["axis"]] for row in data}
    if len(axes) != 1:
        raise FigureError(f"{path}: mixed axis values {sorted(axes)}")
    try:
        x = tuple(float(row[idx["value"]]) for row in data)
        y = tuple(float(row[idx["sse_bits"]]) for row in data)
    except ValueError as exc:
        raise FigureError(f"{path}: non-numeric cell ({exc})") from None
    return SweepSeries(axis=axes.pop(), x=x, y=y)


def load_panel_series(spec: FigureSpec) -> list[SweepSeries]:
    """All curves for a panel, each checked against the panel's axis."""
    series = []
    for path in spec.csvs:
        one = read_sweep_series(path)
        if one.axis != spec.panel:
            raise FigureError(
                f"{path}: holds axis '{one.axis}' but the panel is '{spec.panel}'")
        series.append(one)
    return series


def points_payload(spec: FigureSpec, series: list[SweepSeries]) -> dict:
    """The sidecar content: exactly what gets drawn, nothing derived."""
    return {
        "panel": spec.panel,
        "x_label": spec.resolved_x_label(),
        "y_label": spec.resolved_y_label(),
        "series": [
            {"label": label, "x": list(one.x), "y": list(one.y)}
            for label, one in zip(spec.labels, series)
        ],
    }


def render_panel(spec: FigureSpec) -> dict:
    """Write the panel image and its points sidecar; return the payload.

    The sidecar is serialized with sorted keys and a trailing newline so a
    rerun over the same CSVs produces byte-identical files.
    """
    series = load_panel_series(spec)
    payload = points_payload(spec, series)

    parent = os.path.dirname(os.path.abspath(spec.out))
    os.makedirs(parent, exist_ok=True)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    try:
        for label, one in zip(spec.labels, series):
            ax.plot(one.x, one.y, marker="o", label=label)
        ax.set_xlabel(spec.resolved_x_label())
        ax.set_ylabel(spec.resolved_y_label())
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(spec.out, dpi=120)
    finally:
        plt.close(fig)

    sidecar = sidecar_path(spec.out)
    with open(sidecar, "w", newline="") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True))
        fh.write("\n")
    return payload


def sidecar_path(out: str) -> str:
    return out + ".points.json"


__all__ = [
    "FigureError",
    "FigureSpec",
    "PANEL_X_LABELS",
    "REQUIRED_COLUMNS",
    "SweepSeries",
    "Y_LABEL",
    "load_panel_series",
    "points_payload",
    "read_sweep_series",
    "render_panel",
    "sidecar_path",
    "__version__",
]
