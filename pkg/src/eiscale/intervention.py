"""MaxEnt interventions and the block-mean readout.

Macro labels are -1, 0, +1. ``discretize`` returns them as an ``int8`` array
with one entry per block, in the row-major block order of ``BlockPartition``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lattice import BlockPartition


class UnfittedDiscretizer(RuntimeError):
    pass


class DegenerateSample(ValueError):
    """Tertile cut points coincide, so three bins cannot be formed."""


ISING = "ising"
ABM = "abm"


@dataclass(frozen=True)
class InterventionTarget:
    kind: str
    value: float

    def __post_init__(self):
        if self.kind == ISING:
            if not -1.0 <= self.value <= 1.0:
                raise ValueError(f"magnetization target must lie in [-1, 1], got {self.value}")
        elif self.kind == ABM:
            if not self.value >= 0:
                raise ValueError(f"pheromone target must be >= 0, got {self.value}")
        else:
            raise ValueError(f"unknown intervention kind {self.kind!r}")


def maxent_ising(partition: BlockPartition, target: InterventionTarget,
                 rng: np.random.Generator) -> np.ndarray:
    """I.i.d. spins with P(+1) = (1 + m)/2 at every site, same m in all blocks."""
    if target.kind != ISING:
        raise ValueError("maxent_ising needs a magnetization target")
    L = partition.shape.L
    p_up = (1.0 + target.value) / 2.0
    return np.where(rng.random((L, L)) < p_up, 1, -1).astype(np.int8)


def maxent_abm(partition: BlockPartition, target: InterventionTarget) -> np.ndarray:
    if target.kind != ABM:
        raise ValueError("maxent_abm needs a pheromone target")
    L = partition.shape.L
    return np.full((L, L), float(target.value))


def block_means(state: np.ndarray, partition: BlockPartition) -> np.ndarray:
    L, b = partition.shape.L, partition.b
    if state.shape != (L, L):
        raise ValueError(f"state shape {state.shape} does not match partition L={L}")
    n = L // b
    return state.reshape(n, b, n, b).mean(axis=(1, 3), dtype=np.float64).ravel()


@dataclass(frozen=True)
class Discretizer:
    """Three-bin readout with strict outer bins: x < lo -> -1, x > hi -> +1, else 0.

    ``kind`` is ``"fixed"`` for explicit thresholds or ``"tertiles"`` for cut
    points fitted to pooled data. An unfitted tertile discretizer has
    ``lo = hi = None``.
    """

    kind: str
    lo: Optional[float] = None
    hi: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("fixed", "tertiles"):
            raise ValueError(f"unknown discretizer kind {self.kind!r}")
        if self.fitted and not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got {self.lo}, {self.hi}")
        if self.kind == "fixed" and not self.fitted:
            raise ValueError("fixed thresholds require lo and hi")

    @classmethod
    def thresholds(cls, lo: float, hi: float) -> Discretizer:
        return cls("fixed", float(lo), float(hi))

    @classmethod
    def tertiles(cls) -> Discretizer:
        return cls("tertiles")

    @property
    def fitted(self) -> bool:
        return self.lo is not None and self.hi is not None


def fit_tertiles(samples) -> Discretizer:
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 3:
        raise ValueError("need at least 3 samples to fit tertiles")
    q1, q2 = np.quantile(x, [1 / 3, 2 / 3])
    if not q1 < q2:
        raise DegenerateSample(f"tertile cut points coincide at {q1}")
    return Discretizer("tertiles", float(q1), float(q2))


def discretize(means, disc: Discretizer) -> np.ndarray:
    if not disc.fitted:
        raise UnfittedDiscretizer("fit tertiles before discretizing")
    x = np.asarray(means, dtype=float)
    labels = np.zeros(x.shape, dtype=np.int8)
    labels[x < disc.lo] = -1
    labels[x > disc.hi] = 1
    return labels
