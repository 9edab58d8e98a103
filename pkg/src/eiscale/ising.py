"""Single-spin-flip Metropolis dynamics for the 2D Ising model.

Lattices are plain ``int8`` numpy arrays of shape ``(L, L)`` holding -1/+1.
The hot loop is compiled with numba; random numbers are drawn up front from a
``numpy.random.Generator`` so runs are reproducible from the stream alone.

Stream consumption per sweep, in order: ``L*L`` site indices from
``rng.integers(0, L*L)``, then ``L*L`` uniforms from ``rng.random()``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np


@dataclass(frozen=True)
class IsingParams:
    T: float
    J: float = 1.0

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError(f"temperature must be positive, got {self.T}")


def local_energy_delta(spins: np.ndarray, site: tuple[int, int], params: IsingParams) -> float:
    """Energy change from flipping ``site``: 2 J s_i (sum of 4 neighbours)."""
    L = spins.shape[0]
    i, j = site
    nb = (int(spins[(i + 1) % L, j]) + int(spins[(i - 1) % L, j])
          + int(spins[i, (j + 1) % L]) + int(spins[i, (j - 1) % L]))
    return 2.0 * params.J * int(spins[i, j]) * nb


@numba.njit(cache=True)
def _sweep_kernel(spins, sites, u, beta_j):
    L = spins.shape[0]
    accepted = 0
    for k in range(sites.shape[0]):
        i = sites[k] // L
        j = sites[k] % L
        s = spins[i, j]
        nb = (spins[(i + 1) % L, j] + spins[(i - 1) % L, j]
              + spins[i, (j + 1) % L] + spins[i, (j - 1) % L])
        # dE / T
        x = 2.0 * beta_j * s * nb
        if x <= 0.0 or u[k] < math.exp(-x):
            spins[i, j] = -s
            accepted += 1
    return accepted


@numba.njit(cache=True)
def _energy(spins, J):
    L = spins.shape[0]
    e = 0.0
    for i in range(L):
        for j in range(L):
            e -= J * spins[i, j] * (spins[(i + 1) % L, j] + spins[i, (j + 1) % L])
    return e


def energy(spins: np.ndarray, params: IsingParams) -> float:
    return float(_energy(spins, params.J))


def metropolis_sweep(spins: np.ndarray, params: IsingParams, rng: np.random.Generator,
                     *, inplace: bool = False) -> np.ndarray:
    """One sweep of ``L*L`` random-site Metropolis proposals.

    Returns the updated lattice (a copy unless ``inplace``).
    """
    out = spins if inplace else spins.copy()
    metropolis_sweep_stats(out, params, rng)
    return out


def metropolis_sweep_stats(spins: np.ndarray, params: IsingParams,
                           rng: np.random.Generator) -> int:
    """In-place sweep; returns the number of accepted flips."""
    n = spins.size
    sites = rng.integers(0, n, size=n)
    u = rng.random(n)
    return int(_sweep_kernel(spins, sites, u, params.J / params.T))


@numba.njit(cache=True)
def _run_kernel(spins, sites, u, beta_j, J, offset, record_every, out):
    n = spins.size
    r = 0
    for k in range(sites.shape[0] // n):
        _sweep_kernel(spins, sites[k * n:(k + 1) * n], u[k * n:(k + 1) * n], beta_j)
        if (offset + k + 1) % record_every == 0:
            out[r] = _energy(spins, J)
            r += 1
    return r


def run_sweeps(spins: np.ndarray, params: IsingParams, rng: np.random.Generator,
               n_sweeps: int, *, record_every: int = 1, chunk: int = 4096) -> np.ndarray:
    """Advance ``spins`` in place by ``n_sweeps`` and return recorded energies.

    Random numbers are drawn in chunks of ``chunk`` sweeps (all site indices
    for the chunk, then all uniforms), so the stream is consumed differently
    from repeated ``metropolis_sweep`` calls.
    """
    n = spins.size
    energies = np.empty(n_sweeps // record_every)
    done = r = 0
    while done < n_sweeps:
        k = min(chunk, n_sweeps - done)
        sites = rng.integers(0, n, size=k * n)
        u = rng.random(k * n)
        r += _run_kernel(spins, sites, u, params.J / params.T, params.J,
                         done, record_every, energies[r:])
        done += k
    return energies


def magnetization(spins: np.ndarray) -> float:
    return float(spins.mean())
