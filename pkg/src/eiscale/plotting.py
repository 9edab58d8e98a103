"""Matplotlib figures for EI curves: per-block EI against block size on a
base-2 log axis, with +-1 s.e.m. error bars and the peak annotated."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps SVG output byte-stable between runs
_SVG_META = {"Date": None, "Creator": "eiscale"}

plt.rcParams.update({
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "eiscale",
    "svg.fonttype": "path",
})


def _check_path(path) -> Path:
    path = Path(path)
    if path.suffix.lower() != ".svg":
        raise ValueError(f"only SVG output is supported, got {path.name}")
    return path


def _draw(ax, curve, label=None, peak=None, color=None):
    b, y, e = curve.scales, curve.means, curve.sems
    ok = np.isfinite(y)
    line = ax.errorbar(b[ok], y[ok], yerr=np.nan_to_num(e[ok]), fmt="o-", capsize=3,
                       ms=4, lw=1.2, label=label, color=color)
    if peak is not None:
        i = int(np.flatnonzero(b == peak)[0])
        ax.annotate(f"peak b={peak}", (b[i], y[i]), xytext=(0, 12),
                    textcoords="offset points", ha="center", fontsize=9,
                    color=line[0].get_color())
        ax.plot([b[i]], [y[i]], marker="*", ms=12, color=line[0].get_color(), zorder=5)


def _finish(fig, ax, scales, path):
    ax.set_xscale("log", base=2)
    ax.set_xticks(scales)
    ax.set_xticklabels([str(int(s)) for s in scales])
    ax.set_xlabel("block size b")
    ax.set_ylabel("per-block EI (bits)")
    ax.axhline(np.log2(3), ls=":", lw=0.8, color="0.5")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata=_SVG_META, bbox_inches="tight")
    except OSError as exc:
        raise OSError(f"could not write figure to {path}: {exc}") from exc
    finally:
        plt.close(fig)
    return path


def emit_svg(curve, report=None, path="curve.svg", *, title=None) -> Path:
    """Write one EI curve as an SVG figure.

    ``report`` is a ``ModelSelectionReport``; its peak (or, failing that,
    the raw argmax) is marked on the plot.
    """
    path = _check_path(path)
    if not curve.records:
        raise ValueError("cannot plot an empty curve")
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    peak = None
    if report is not None:
        peak = report.peak_scale
        ax.text(0.02, 0.97, f"best model: {report.best_model}"
                + (" (inconclusive)" if report.inconclusive else ""),
                transform=ax.transAxes, va="top", fontsize=8, color="0.3")
    if peak is None and np.isfinite(curve.means).any():
        peak = int(curve.scales[int(np.nanargmax(curve.means))])
    _draw(ax, curve, peak=peak)
    ax.set_title(title or f"{curve.system} (seed {curve.seed})", fontsize=10)
    return _finish(fig, ax, curve.scales, path)


def emit_sweep_svg(curves, labels, path) -> Path:
    """Overlay several curves (e.g. a temperature sweep) on one figure."""
    path = _check_path(path)
    curves = [(c, lab) for c, lab in zip(curves, labels) if c.records]
    if not curves:
        raise ValueError("no curves to plot")
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for curve, label in curves:
        peak = int(curve.scales[int(np.nanargmax(curve.means))]) if np.isfinite(curve.means).any() else None
        _draw(ax, curve, label=label, peak=peak)
    ax.legend(frameon=False, fontsize=8)
    scales = sorted({int(b) for c, _ in curves for b in c.scales})
    return _finish(fig, ax, scales, path)


def emit_theory_svg(model, params, grid, path, *, ell_star=None) -> Path:
    """Signal term f(l) and the EI lower bound for a response model."""
    from .theory import ei_lower_bound, signal_function

    path = _check_path(path)
    grid = np.asarray(grid, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(grid, ei_lower_bound(model, params, grid), lw=1.5, label="EI lower bound (bits)")
    ax2 = ax.twinx()
    ax2.plot(grid, signal_function(model, params.d, grid), lw=1.0, ls="--", color="C1",
             label="f(l) = s^2 l^d")
    ax2.set_ylabel("f(l)")
    if ell_star is not None:
        ax.axvline(ell_star, color="0.4", lw=0.8, ls=":")
        ax.annotate(f"l* = {ell_star:.3g}", (ell_star, ax.get_ylim()[1]), xytext=(4, -12),
                    textcoords="offset points", fontsize=9)
    ax.set_xlabel("scale l")
    ax.set_ylabel("bits")
    ax.set_title(f"{model.kind} response, param={model.param:g}, d={params.d}", fontsize=10)
    handles = ax.get_legend_handles_labels()[0] + ax2.get_legend_handles_labels()[0]
    ax.legend(handles, [h.get_label() for h in handles], frameon=False, fontsize=8)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata=_SVG_META, bbox_inches="tight")
    finally:
        plt.close(fig)
    return path
