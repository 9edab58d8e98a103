"""Stigmergy agent-based model: biased walkers on a periodic pheromone field.

The field is an ``(L, L)`` float array; agents are an ``(N, 2)`` integer
array of ``(row, col)`` positions. Several agents may share a cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

# up, down, left, right
NEIGHBOUR_OFFSETS = np.array([(-1, 0), (1, 0), (0, -1), (0, 1)])


@dataclass(frozen=True)
class AbmParams:
    kappa: float = 2.0
    deposit: float = 0.5
    evap: float = 0.95
    diff_sigma: float = 1.0
    n_agents: int = 400

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if not 0 < self.evap <= 1:
            raise ValueError("evap must lie in (0, 1]")
        if self.deposit < 0:
            raise ValueError("deposit must be >= 0")
        if not self.diff_sigma > 0:
            raise ValueError("diff_sigma must be > 0")
        if self.n_agents < 0:
            raise ValueError("n_agents must be >= 0")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Discrete 1-D Gaussian truncated at radius ceil(3 sigma), summing to 1."""
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def diffuse(field: np.ndarray, sigma: float) -> np.ndarray:
    k = gaussian_kernel(sigma)
    out = correlate1d(field, k, axis=0, mode="wrap")
    return correlate1d(out, k, axis=1, mode="wrap")


def neighbour_levels(field: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Pheromone at the four von Neumann neighbours of each position, ``(N, 4)``."""
    L = field.shape[0]
    nb = (positions[:, None, :] + NEIGHBOUR_OFFSETS[None, :, :]) % L
    return field[nb[..., 0], nb[..., 1]]


def _softmax_rows(x: np.ndarray) -> np.ndarray:
    z = np.exp(x - x.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def move_probabilities(field: np.ndarray, pos, params: AbmParams) -> np.ndarray:
    """Probabilities of moving up/down/left/right, proportional to exp(kappa P)."""
    levels = neighbour_levels(field, np.atleast_2d(np.asarray(pos)))
    p = _softmax_rows(params.kappa * levels)
    return p[0] if np.ndim(pos) == 1 else p


def random_agents(L: int, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, L, size=(n, 2))


def abm_step(field: np.ndarray, agents: np.ndarray, params: AbmParams,
             rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Advance the world by one step and return ``(field, agents)`` as new arrays.

    All agents choose moves against the same pre-step field, then deposit,
    then the whole field evaporates and diffuses. One uniform is drawn per
    agent, in agent order.
    """
    L = field.shape[0]
    if len(agents):
        p = _softmax_rows(params.kappa * neighbour_levels(field, agents))
        u = rng.random(len(agents))
        choice = (np.cumsum(p, axis=1) <= u[:, None]).sum(axis=1)
        # guard against cumsum rounding below u
        choice = np.minimum(choice, 3)
        agents = (agents + NEIGHBOUR_OFFSETS[choice]) % L
    field = field.copy()
    if len(agents) and params.deposit:
        np.add.at(field, (agents[:, 0], agents[:, 1]), params.deposit)
    field *= params.evap
    return diffuse(field, params.diff_sigma), agents


def total_mass(field: np.ndarray) -> float:
    return float(field.sum())
