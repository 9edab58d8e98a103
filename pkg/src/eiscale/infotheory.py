"""Joint label histograms, plug-in mutual information and the Panzeri-Treves
first-order bias correction. All information quantities are in bits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LABELS = (-1, 0, 1)


class NegativeSnr(ValueError):
    pass


@dataclass(frozen=True)
class JointHistogram:
    """3x3 counts; rows are the intervened label, columns the outcome label."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.shape != (3, 3):
            raise ValueError(f"expected 3x3 counts, got shape {c.shape}")
        if (c < 0).any():
            raise ValueError("counts must be non-negative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @classmethod
    def zeros(cls) -> JointHistogram:
        return cls(np.zeros((3, 3), dtype=np.int64))

    @classmethod
    def from_labels(cls, before, after) -> JointHistogram:
        """Count (before, after) pairs of labels in {-1, 0, +1}."""
        i = np.asarray(before, dtype=np.int64).ravel() + 1
        j = np.asarray(after, dtype=np.int64).ravel() + 1
        return cls(np.bincount(3 * i + j, minlength=9).reshape(3, 3))

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    def merge(self, other: JointHistogram) -> JointHistogram:
        return JointHistogram(self.counts + other.counts)

    __add__ = merge

    def __eq__(self, other):
        return isinstance(other, JointHistogram) and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash(self.counts.tobytes())


def merge(h1: JointHistogram, h2: JointHistogram) -> JointHistogram:
    return h1.merge(h2)


@dataclass(frozen=True)
class MiEstimate:
    plugin_bits: float
    corrected_bits: float
    n_samples: int
    bias_bits: float


def _counts(h) -> np.ndarray:
    return h.counts if isinstance(h, JointHistogram) else np.asarray(h)


def plugin_mi(h) -> float:
    c = _counts(h).astype(float)
    n = c.sum()
    if n < 1:
        raise ValueError("histogram is empty")
    p = c / n
    pr = p.sum(axis=1, keepdims=True)
    pc = p.sum(axis=0, keepdims=True)
    nz = p > 0
    mi = float(np.sum(p[nz] * np.log2(p[nz] / (pr * pc)[nz])))
    # rounding can leave -1e-17 on independent tables
    return max(mi, 0.0)


def panzeri_treves_bias(h) -> float:
    """First-order plug-in bias in bits from naive occupied-bin counts."""
    c = _counts(h)
    n = c.sum()
    r_rows = (c > 0).sum(axis=1)
    r_rows = r_rows[c.sum(axis=1) > 0]
    r_all = int((c.sum(axis=0) > 0).sum())
    return float(((r_rows - 1).sum() - (r_all - 1)) / (2 * n * math.log(2)))


def panzeri_treves_correct(h) -> MiEstimate:
    """Plug-in MI minus the PT bias, clamped to ``[0, plugin]``."""
    c = _counts(h)
    plugin = plugin_mi(c)
    bias = panzeri_treves_bias(c)
    corrected = min(max(plugin - bias, 0.0), plugin)
    return MiEstimate(plugin, corrected, int(c.sum()), bias)


def gaussian_capacity(snr):
    """Capacity of a linear Gaussian channel, 0.5 * log2(1 + snr)."""
    snr_arr = np.asarray(snr, dtype=float)
    if (snr_arr < 0).any():
        raise NegativeSnr(f"snr must be >= 0, got {snr}")
    out = 0.5 * np.log2(1.0 + snr_arr)
    return float(out) if out.ndim == 0 else out
