"""Peak detection and monotone-versus-unimodal model selection for EI curves.

Three shape-constrained weighted least-squares fits (weights 1/sem^2) are
compared by AIC = chi^2 + 2k, where k counts the distinct fitted levels:

* ``MonotoneIncreasing``: isotonic non-decreasing fit;
* ``MonotoneDecreasing``: isotonic non-increasing fit;
* ``Unimodal``: umbrella fit (non-decreasing up to an interior mode, then
  non-increasing), best over all interior modes.

A gap below 2 between the best and runner-up AIC is reported as
inconclusive. The peak-location interval comes from a parametric bootstrap
that resamples each scale from N(mean, sem) and refits the umbrella.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import lsq_linear

from .experiment import EiCurve

INCREASING = "MonotoneIncreasing"
DECREASING = "MonotoneDecreasing"
UNIMODAL = "Unimodal"
MODELS = (INCREASING, DECREASING, UNIMODAL)


class BoundaryPeak(UserWarning):
    """The maximum sits at the smallest or largest scale measured."""


class InsufficientScales(ValueError):
    pass


def _argmax_first(values) -> int:
    v = np.asarray(values, dtype=float)
    return int(np.flatnonzero(v == np.nanmax(v))[0])


def detect_peak(curve: EiCurve) -> int:
    """Scale with the largest mean EI; ties go to the smaller scale."""
    if len(curve.records) < 3:
        raise InsufficientScales("peak detection needs at least 3 scales")
    order = np.argsort(curve.scales, kind="stable")
    scales, means = curve.scales[order], curve.means[order]
    i = _argmax_first(means)
    if i in (0, len(scales) - 1):
        warnings.warn(f"EI maximum at boundary scale b={scales[i]}", BoundaryPeak, stacklevel=2)
    return int(scales[i])


def umbrella_fit(y, w, mode: int) -> np.ndarray:
    """Weighted LS fit that rises up to index ``mode`` and falls after it.

    ``mode = n-1`` gives the isotonic non-decreasing fit and ``mode = 0`` the
    non-increasing one. Solved as bounded least squares on the level at
    index 0 plus non-negative steps.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    # f_i = c + sum of up-steps before i (i <= mode) minus down-steps after mode
    A = np.zeros((n, n))
    A[:, 0] = 1.0
    for i in range(1, n):
        k = min(i, mode)
        A[i, 1:k + 1] = 1.0
        if i > mode:
            A[i, mode + 1:i + 1] = -1.0
    sw = np.sqrt(np.asarray(w, dtype=float))
    lower = np.r_[-np.inf, np.zeros(n - 1)]
    res = lsq_linear(A * sw[:, None], y * sw, bounds=(lower, np.inf), method="bvls")
    return A @ res.x


def _n_levels(f, tol) -> int:
    return 1 + int(np.sum(np.abs(np.diff(f)) > tol))


@dataclass(frozen=True)
class ModelFit:
    name: str
    fitted: np.ndarray = field(repr=False)
    chi2: float
    n_params: int

    @property
    def aic(self) -> float:
        return self.chi2 + 2 * self.n_params


def fit_models(y, sem) -> dict[str, ModelFit]:
    y = np.asarray(y, dtype=float)
    w = 1.0 / np.asarray(sem, dtype=float) ** 2
    n = len(y)
    tol = 1e-9 * (np.ptp(y) + 1.0)

    def make(name, f):
        return ModelFit(name, f, float(np.sum(w * (y - f) ** 2)), _n_levels(f, tol))

    fits = {INCREASING: make(INCREASING, umbrella_fit(y, w, n - 1)),
            DECREASING: make(DECREASING, umbrella_fit(y, w, 0))}
    umbrellas = [make(UNIMODAL, umbrella_fit(y, w, m)) for m in range(1, n - 1)]
    fits[UNIMODAL] = min(umbrellas, key=lambda f: f.aic)
    return fits


def _unimodal_peak_index(y, sem) -> int:
    return _argmax_first(fit_models(y, sem)[UNIMODAL].fitted)


@dataclass(frozen=True)
class ModelSelectionReport:
    best_model: str
    aic_per_model: dict
    peak_scale: Optional[int]
    peak_ci: Optional[tuple[int, int]]
    delta_aic: float
    inconclusive: bool
    bootstrap_n: int
    sem_floor: float

    def to_dict(self) -> dict:
        return {
            "best_model": self.best_model,
            "aic_per_model": dict(self.aic_per_model),
            "peak_scale": self.peak_scale,
            "peak_ci": list(self.peak_ci) if self.peak_ci else None,
            "delta_aic": self.delta_aic,
            "inconclusive": self.inconclusive,
            "bootstrap_n": self.bootstrap_n,
            "sem_floor": self.sem_floor,
            "method": "weighted isotonic vs umbrella regression, AIC = chi2 + 2*levels; "
                      "parametric bootstrap N(mean, sem) for peak location",
        }


def select_model(curve: EiCurve, bootstrap_n: int = 1000, *, seed: int = 0,
                 sem_floor: float = 1e-4, ci: float = 0.95) -> ModelSelectionReport:
    """Choose between monotone and unimodal shapes for ``curve``.

    Standard errors below ``sem_floor`` bits are raised to it, so saturated
    scales with zero replicate spread still get a finite weight.
    """
    if len(curve.records) < 4:
        raise InsufficientScales("model selection needs at least 4 scales")
    order = np.argsort(curve.scales, kind="stable")
    scales = curve.scales[order]
    y = curve.means[order]
    if not np.all(np.isfinite(y)):
        raise ValueError("curve contains non-finite means")
    sem = np.maximum(curve.sems[order], sem_floor)

    fits = fit_models(y, sem)
    ranked = sorted(MODELS, key=lambda m: (fits[m].aic, MODELS.index(m)))
    best = ranked[0]
    delta = fits[ranked[1]].aic - fits[best].aic

    peak = peak_ci = None
    if best == UNIMODAL:
        peak = int(scales[_argmax_first(fits[UNIMODAL].fitted)])
        rng = np.random.default_rng(seed)
        picks = [_unimodal_peak_index(rng.normal(y, sem), sem) for _ in range(bootstrap_n)]
        if picks:
            lo, hi = np.quantile(picks, [(1 - ci) / 2, (1 + ci) / 2], method="inverted_cdf")
            peak_ci = (int(scales[int(lo)]), int(scales[int(hi)]))
    return ModelSelectionReport(
        best_model=best,
        aic_per_model={m: fits[m].aic for m in MODELS},
        peak_scale=peak,
        peak_ci=peak_ci,
        delta_aic=float(delta),
        inconclusive=bool(delta < 2.0),
        bootstrap_n=bootstrap_n,
        sem_floor=sem_floor,
    )
