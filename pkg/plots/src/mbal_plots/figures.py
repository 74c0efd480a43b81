"""The four figure kinds rendered from mbal-clo result CSVs.

Rendering goes through matplotlib's object-oriented Agg canvas, so it needs
no display, touches no global backend state, and only ever reads the input
files. Every figure is written at FIGSIZE x DPI (960x720 pixels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .aggregate import labeled_fraction_point, learning_curve_bands
from .schemas import load_compare_csv, load_psi_csv, load_run_csv

KINDS = ("learning_curve", "label_fraction", "ratio_bars", "psi_curve")
FIGSIZE = (8.0, 6.0)
DPI = 120


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSVs, figure kind, y-scale choice, output path.

    log_y selects a logarithmic risk axis for learning curves, a log-log
    view for psi curves, and a logarithmic ratio axis for ratio bars; the
    label-fraction figure is always linear because plateaus at zero are the
    interesting feature. Inputs must exist and the kind must be one of KINDS.
    """

    inputs: tuple[Path, ...]
    kind: str
    out: Path
    log_y: bool = True

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")
        for path in self.inputs:
            if not Path(path).is_file():
                raise ValueError(f"input file not found: {path}")


def _new_axes(title: str):
    fig = Figure(figsize=FIGSIZE, dpi=DPI)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(111)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _draw_learning_curve(spec: FigureSpec):
    runs = [load_run_csv(p) for p in spec.inputs]
    fig, ax = _new_axes(f"excess decision risk, {runs[0].problem}")
    for run in runs:
        bands = learning_curve_bands(run)
        (line,) = ax.plot(bands.x, bands.mean, marker=".", label=bands.label)
        ax.fill_between(bands.x, bands.lo, bands.hi, alpha=0.25, color=line.get_color())
    ax.set_xlabel("labeled samples past warm-up")
    ax.set_ylabel("mean excess SPO risk (90% CI)")
    if spec.log_y:
        ax.set_yscale("log")
    ax.legend()
    return fig


def _draw_label_fraction(spec: FigureSpec):
    points = sorted(
        (labeled_fraction_point(load_run_csv(p)) for p in spec.inputs),
        key=lambda pt: pt.q_tilde,
    )
    fig, ax = _new_axes("labeling rate vs. rejection quantile")
    q = [pt.q_tilde for pt in points]
    mean = [pt.mean for pt in points]
    yerr = [
        [max(pt.mean - pt.lo, 0.0) for pt in points],
        [max(pt.hi - pt.mean, 0.0) for pt in points],
    ]
    ax.errorbar(q, mean, yerr=yerr, marker="o", capsize=4)
    ax.set_xlabel("margin quantile q_tilde")
    ax.set_ylabel("fraction of stream labeled (90% CI)")
    ax.set_ylim(bottom=0.0)
    return fig


def _draw_ratio_bars(spec: FigureSpec):
    rows = [row for p in spec.inputs for row in load_compare_csv(p)]
    finite = [r for r in rows if math.isfinite(r.ratio)]
    if not finite:
        raise ValueError("no finite ratios to draw")
    fig, ax = _new_axes(f"supervised-over-active risk ratio at {finite[0].label_budget} labels")
    labels = [f"{r.problem}\n{r.surrogate}" for r in finite]
    ratios = [r.ratio for r in finite]
    # plain nested lists: a single-column ndarray trips matplotlib's yerr probe
    yerr = [
        [max(r.ratio - r.ci_lo, 0.0) for r in finite],
        [max((r.ci_hi - r.ratio) if math.isfinite(r.ci_hi) else 0.0, 0.0) for r in finite],
    ]
    ax.bar(range(len(finite)), ratios, yerr=yerr, capsize=4, color="tab:blue", alpha=0.8)
    ax.axhline(1.0, linestyle="--", color="black", linewidth=1)
    ax.set_xticks(range(len(finite)), labels)
    ax.set_ylabel("mean risk ratio (90% CI)")
    if spec.log_y:
        ax.set_yscale("log")
    return fig


def _draw_psi_curve(spec: FigureSpec):
    fig, ax = _new_axes("near-degeneracy profile")
    for path in spec.inputs:
        data = load_psi_csv(path)
        label = data.problem
        if math.isfinite(data.kappa_hat):
            label += f" (fitted exponent {data.kappa_hat:.2f})"
        if spec.log_y:
            keep = (data.b > 0) & (data.psi > 0)
            ax.loglog(data.b[keep], data.psi[keep], marker=".", label=label)
        else:
            ax.plot(data.b, data.psi, marker=".", label=label)
    ax.set_xlabel("margin b")
    ax.set_ylabel("fraction of costs within b of a decision change")
    ax.legend()
    return fig


_DRAWERS = {
    "learning_curve": _draw_learning_curve,
    "label_fraction": _draw_label_fraction,
    "ratio_bars": _draw_ratio_bars,
    "psi_curve": _draw_psi_curve,
}


def render(spec: FigureSpec) -> Path:
    """Render the figure described by spec and write it to spec.out."""
    fig = _DRAWERS[spec.kind](spec)
    out = Path(spec.out)
    fig.savefig(out)
    return out
