"""Render dressedspin sweep CSVs into publication-style panels.

Three panel kinds are supported, one per CSV schema:

- ``ramp_sweep``: state probability against ramp time (log x), one line per
  population column.  Several input CSVs form line-style families (first
  file dashed, second solid, then dotted/dashdot), so the zero-detuning and
  split-detuning cases overlay in one panel.
- ``spectrum``: branch energies against the charge bias, each line colored
  by the branch's instantaneous state composition.
- ``crossover``: rotation-axis angle against the detuning ratio, one S-curve
  per tunnel coupling, ordered by coupling so the curves rise left to right.

Rendering is a pure function of the CSV bytes and the spec: figures use the
Agg backend at fixed DPI, glyphs are embedded in the SVG as paths, and
date metadata is stripped, so repeated renders are byte-identical.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import pyplot as plt
from matplotlib.collections import LineCollection
from matplotlib.colors import to_rgb

DPI = 150

matplotlib.rcParams.update(
    {
        "svg.fonttype": "path",  # embed glyphs, no font lookup at view time
        "svg.hashsalt": "dressedspin-figures",
        "figure.dpi": DPI,
        "savefig.dpi": DPI,
    }
)

PANEL_KINDS = ("ramp_sweep", "spectrum", "crossover")

# population / composition colors, keyed by the state tag inside the column name
STATE_COLORS = {
    "s02": "navy",
    "s11": "royalblue",
    "t0": "goldenrod",
    "t_zero": "goldenrod",
    "tplus": "saddlebrown",
    "t_plus": "saddlebrown",
    "tminus": "darkorange",
    "t_minus": "darkorange",
    "z_zbar": "seagreen",
    "zbar_z": "mediumpurple",
}

FAMILY_STYLES = ("--", "-", ":", "-.")


class SchemaError(ValueError):
    """Input CSV does not match the expected column schema."""


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: inputs, panel kind, axis ranges, output base path."""

    kind: str
    inputs: tuple[str, ...]
    output: str  # base path; .png and .svg are both written
    x_min: float | None = None
    x_max: float | None = None
    y_min: float | None = None
    y_max: float | None = None
    title: str | None = None

    def __post_init__(self):
        if self.kind not in PANEL_KINDS:
            raise SchemaError(f"unknown panel kind {self.kind!r}; expected one of {PANEL_KINDS}")
        if not self.inputs:
            raise SchemaError("figure spec lists no input CSVs")
        object.__setattr__(self, "inputs", tuple(self.inputs))


@dataclass
class Table:
    path: str
    columns: list[str]
    rows: list[list[str]]

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([float(r[idx]) for r in self.rows])

    def text_column(self, name: str) -> list[str]:
        idx = self.columns.index(name)
        return [r[idx] for r in self.rows]


def load_table(path: str) -> Table:
    """Read one CSV, skipping '#' comment lines; empty data is an error."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            columns = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, nothing to plot") from None
        rows = [r for r in reader if r]
    if not rows:
        raise SchemaError(f"{path}: no data rows, nothing to plot")
    return Table(path=path, columns=columns, rows=rows)


def require_columns(table: Table, *names: str):
    missing = [n for n in names if n not in table.columns]
    if missing:
        raise SchemaError(
            f"{table.path}: missing column(s) {missing}; found {table.columns}"
        )


def _label(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _state_color(column: str) -> str:
    for tag, color in STATE_COLORS.items():
        if column.endswith(tag):
            return color
    return "dimgray"


def _ramp_sweep_axes(spec: FigureSpec, ax) -> None:
    for i, path in enumerate(spec.inputs):
        table = load_table(path)
        require_columns(table, "ramp_time_s", "p_s02", "p_s11", "p_t0", "p_tplus", "p_tminus")
        t = table.column("ramp_time_s")
        style = FAMILY_STYLES[i % len(FAMILY_STYLES)]
        for col in table.columns[1:]:
            ax.plot(
                t,
                table.column(col),
                style,
                color=_state_color(col),
                label=f"{col} [{_label(path)}]",
                linewidth=1.6,
            )
    ax.set_xscale("log")
    ax.set_xlabel("ramp time (s)")
    ax.set_ylabel("state probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(fontsize=7, ncol=max(1, len(spec.inputs)), loc="center left")


def _spectrum_axes(spec: FigureSpec, ax) -> None:
    table = load_table(spec.inputs[0])
    require_columns(table, "eps_hz", "branch", "energy_hz")
    comp_cols = [c for c in table.columns if c.startswith("comp_")]
    if not comp_cols:
        raise SchemaError(f"{table.path}: no comp_* composition columns; found {table.columns}")
    eps = table.column("eps_hz")
    branch = table.column("branch").astype(int)
    energy = table.column("energy_hz")
    comps = np.stack([table.column(c) for c in comp_cols], axis=1)
    palette = np.array([to_rgb(_state_color(c)) for c in comp_cols])
    for b in np.unique(branch):
        sel = branch == b
        x = eps[sel] / 1e9
        y = energy[sel] / 1e6
        order = np.argsort(x)
        x, y = x[order], y[order]
        rgb = comps[sel][order] @ palette  # composition-weighted blend
        rgb = np.clip(rgb, 0.0, 1.0)
        points = np.column_stack([x, y]).reshape(-1, 1, 2)
        segments = np.concatenate([points[:-1], points[1:]], axis=1)
        lc = LineCollection(segments, colors=0.5 * (rgb[:-1] + rgb[1:]), linewidth=1.8)
        ax.add_collection(lc)
    ax.autoscale()
    # legend: one proxy line per composition color
    for c in comp_cols:
        ax.plot([], [], color=_state_color(c), label=c.removeprefix("comp_"))
    ax.set_xlabel("bias eps (GHz)")
    ax.set_ylabel("energy (MHz)")
    ax.legend(fontsize=7, loc="best")


def _crossover_axes(spec: FigureSpec, ax) -> None:
    table = load_table(spec.inputs[0])
    require_columns(table, "t_c_hz", "ratio", "theta_rad")
    t_c = table.column("t_c_hz")
    ratio = table.column("ratio")
    theta = table.column("theta_rad")
    for value in sorted(set(t_c)):  # ascending coupling: curves rise left to right
        sel = (t_c == value) & ~np.isnan(theta)
        order = np.argsort(ratio[sel])
        ax.plot(
            ratio[sel][order],
            theta[sel][order],
            "-",
            linewidth=1.8,
            label=f"t_c = {value / 1e9:g} GHz",
        )
    ax.set_xlabel("detuning difference / Rabi frequency")
    ax.set_ylabel("rotation-axis angle")
    ax.set_yticks([0.0, math.pi / 4, math.pi / 2], ["0", "pi/4", "pi/2"])
    ax.set_ylim(-0.05, math.pi / 2 + 0.05)
    ax.legend(fontsize=8, loc="lower right")


_PANELS = {
    "ramp_sweep": _ramp_sweep_axes,
    "spectrum": _spectrum_axes,
    "crossover": _crossover_axes,
}


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib figure for a spec (no files written)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        _PANELS[spec.kind](spec, ax)
        if spec.x_min is not None or spec.x_max is not None:
            ax.set_xlim(left=spec.x_min, right=spec.x_max)
        if spec.y_min is not None or spec.y_max is not None:
            ax.set_ylim(bottom=spec.y_min, top=spec.y_max)
        if spec.title:
            ax.set_title(spec.title)
        fig.tight_layout()
    except BaseException:
        plt.close(fig)
        raise
    return fig


def render(spec: FigureSpec) -> list[str]:
    """Render the panel to <output>.png and <output>.svg.

    All inputs are validated before anything is written, so a schema error
    leaves no partial output behind.  Returns the written paths.
    """
    fig = build_figure(spec)
    try:
        out_dir = os.path.dirname(spec.output)
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
        paths = []
        for ext in ("png", "svg"):
            path = f"{spec.output}.{ext}"
            fig.savefig(path, format=ext, metadata={"Date": None} if ext == "svg" else None)
            paths.append(path)
        return paths
    finally:
        plt.close(fig)
