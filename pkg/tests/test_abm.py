import math

import numpy as np
import pytest

from eiscale.abm import (AbmParams, abm_step, diffuse, gaussian_kernel, move_probabilities,
                         random_agents, total_mass)

DEFAULTS = AbmParams()


def field_with_neighbours(levels, L=8, pos=(4, 4)):
    f = np.zeros((L, L))
    i, j = pos
    for (di, dj), v in zip([(-1, 0), (1, 0), (0, -1), (0, 1)], levels):
        f[(i + di) % L, (j + dj) % L] = v
    return f


def softmax_oracle(levels, kappa):
    w = [math.exp(kappa * v) for v in levels]
    return [x / sum(w) for x in w]


def test_uniform_field_gives_uniform_moves():
    p = move_probabilities(np.full((8, 8), 7.0), (2, 3), DEFAULTS)
    assert np.allclose(p, 0.25)


def test_strongly_biased_neighbours():
    p = move_probabilities(field_with_neighbours((10, 10, 10, 0)), (4, 4), DEFAULTS)
    oracle = softmax_oracle((10, 10, 10, 0), 2.0)
    assert np.allclose(p[:3], 1 / 3, atol=1e-9)
    assert p[3] == pytest.approx(oracle[3], rel=1e-9)
    assert p[3] == pytest.approx(6.87e-10, rel=1e-3)


def test_single_hot_neighbour():
    p = move_probabilities(field_with_neighbours((1, 0, 0, 0)), (4, 4), DEFAULTS)
    assert p[0] == pytest.approx(math.e ** 2 / (math.e ** 2 + 3), rel=1e-12)
    assert p[0] == pytest.approx(0.7112, abs=1e-4)


def test_no_overflow_at_large_kappa_p():
    p = move_probabilities(field_with_neighbours((400, 0, 0, 0)), (4, 4), AbmParams(kappa=2.0))
    assert np.all(np.isfinite(p)) and p[0] == pytest.approx(1.0)


def test_neighbour_wraps_periodically():
    p = move_probabilities(field_with_neighbours((0, 0, 0, 1), pos=(0, 7)), (0, 7), DEFAULTS)
    assert np.argmax(p) == 3


def test_kernel_normalised_and_truncated():
    k = gaussian_kernel(1.0)
    assert len(k) == 7 and k.sum() == pytest.approx(1.0, abs=1e-15)
    assert len(gaussian_kernel(1.2)) == 2 * 4 + 1


def test_single_agent_mass_after_step():
    f, a = abm_step(np.zeros((16, 16)), np.array([[3, 3]]), DEFAULTS, np.random.default_rng(0))
    assert total_mass(f) == pytest.approx(0.5 * 0.95, rel=1e-12)
    assert a.shape == (1, 2)


def test_uniform_field_without_agents():
    f, _ = abm_step(np.ones((16, 16)), np.empty((0, 2), int), DEFAULTS, np.random.default_rng(0))
    assert np.allclose(f, 0.95, atol=1e-12)


def test_mass_fixed_point_after_100_steps():
    rng = np.random.default_rng(1)
    f, a = np.zeros((64, 64)), random_agents(64, 400, rng)
    for _ in range(100):
        f, a = abm_step(f, a, DEFAULTS, rng)
    assert abs(total_mass(f) - 3800) / 3800 < 0.01


def test_diffusion_conserves_mass():
    f = np.random.default_rng(2).exponential(size=(32, 32))
    assert abs(diffuse(f, 1.0).sum() - f.sum()) / f.sum() < 1e-9


def test_field_stays_nonnegative():
    rng = np.random.default_rng(3)
    f, a = np.full((32, 32), 5.0), random_agents(32, 100, rng)
    for _ in range(20):
        f, a = abm_step(f, a, DEFAULTS, rng)
        assert (f >= 0).all() and np.isfinite(f).all()


def test_agents_move_one_step_on_grid():
    rng = np.random.default_rng(4)
    a0 = random_agents(16, 50, rng)
    _, a1 = abm_step(np.zeros((16, 16)), a0, DEFAULTS, rng)
    d = (a1 - a0 + 8) % 16 - 8
    assert np.all(np.abs(d).sum(axis=1) == 1)
    assert ((a1 >= 0) & (a1 < 16)).all()


def test_step_does_not_mutate_input():
    f = np.ones((8, 8))
    abm_step(f, np.array([[0, 0]]), DEFAULTS, np.random.default_rng(0))
    assert np.all(f == 1.0)


def test_unbiased_walk_msd():
    steps, n = 50, 10_000
    rng = np.random.default_rng(5)
    params = AbmParams(kappa=0.0, deposit=0.0)
    L = 64
    a = random_agents(L, n, rng)
    disp = np.zeros((n, 2))
    f = np.zeros((L, L))
    for _ in range(steps):
        f, a2 = abm_step(f, a, params, rng)
        disp += (a2 - a + L // 2) % L - L // 2
        a = a2
    msd = (disp ** 2).sum(axis=1)
    # Var of squared displacement of a 2D lattice walk ~ 2 steps^2
    assert abs(msd.mean() - steps) < 4 * msd.std() / np.sqrt(n)
    assert np.abs(disp.mean(axis=0)).max() < 4 * np.sqrt(steps / 2 / n)


def test_kappa_biases_towards_pheromone():
    L = 16
    f = np.zeros((L, L))
    f[:, 9] = 3.0
    a = np.tile([[5, 8]], (2000, 1))
    _, a1 = abm_step(f, a, DEFAULTS, np.random.default_rng(6))
    assert np.mean(a1[:, 1] == 9) > 0.95


@pytest.mark.parametrize("kw", [dict(kappa=-1), dict(evap=0), dict(evap=1.1),
                                dict(deposit=-0.1), dict(diff_sigma=0)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        AbmParams(**kw)
