import numpy as np
import pytest

from FoldyLaxPy.BoltzmannWalker import fit_escape_rate, mc_boltzmann
from FoldyLaxPy.FoldyLaxError import DomainError
from FoldyLaxPy.Transport import diffusion_modes


def test_free_flight_fills_a_shell():
    t_grid = np.array([0.0, 0.5, 1.0, 2.0])
    ensemble = mc_boltzmann(3, None, np.inf, 2.0, 0.0, 1000, t_grid, seed=4)
    np.testing.assert_allclose(ensemble.final_radii, 4.0, rtol=1e-12)
    np.testing.assert_allclose(ensemble.msd, (2.0 * t_grid) ** 2, rtol=1e-12, atol=1e-12)
    np.testing.assert_array_equal(ensemble.survival, 1.0)
    assert np.isnan(ensemble.escape_rate)


@pytest.mark.parametrize("d", [2, 3])
def test_msd_slope_in_an_infinite_medium(d):
    lscat, v = 1.0, 1.0
    t_grid = np.linspace(0, 200, 101)
    ensemble = mc_boltzmann(d, np.inf, lscat, v, 0.0, 4000, t_grid, seed=21)
    assert ensemble.msd_slope(20.0) == pytest.approx(2 * lscat * v, rel=0.1)


def test_msd_slope_needs_two_points():
    t_grid = np.linspace(0, 10, 11)
    ensemble = mc_boltzmann(2, None, 1.0, 1.0, 0.0, 1000, t_grid, seed=1)
    with pytest.raises(ValueError):
        ensemble.msd_slope(10.0)


@pytest.mark.slow
def test_escape_rate_matches_fundamental_mode():
    d, R, lscat, v = 3, 8.0, 1.0, 1.0
    t_grid = np.linspace(0, 150, 301)
    ensemble = mc_boltzmann(d, R, lscat, v, 0.0, 20000, t_grid, seed=7, threads=2)
    predicted = abs(diffusion_modes(d, R, lscat, 1).gammas[0]) * v
    assert ensemble.escape_rate == pytest.approx(predicted, rel=0.15)
    assert np.all(np.diff(ensemble.survival) <= 0)


@pytest.mark.slow
def test_disk_escape_rate_and_diffusive_spreading():
    d, R, lscat, v = 2, 12.6, 1.5, 1.0
    bounded = mc_boltzmann(d, R, lscat, v, 0.0, 100000, np.linspace(0, 400, 401), seed=12, threads=4)
    predicted = abs(diffusion_modes(d, R, lscat, 1).gammas[0]) * v
    assert bounded.escape_rate == pytest.approx(predicted, rel=0.1)
    free = mc_boltzmann(d, None, lscat, v, 0.0, 100000, np.linspace(0, 200, 101), seed=12, threads=4)
    assert free.msd_slope(30.0) == pytest.approx(2 * lscat * v, rel=0.05)


def test_walkers_leave_a_small_ball():
    t_grid = np.linspace(0, 50, 51)
    ensemble = mc_boltzmann(2, 2.0, 0.5, 1.0, 0.0, 2000, t_grid, seed=3)
    exited = np.isfinite(ensemble.exit_times)
    assert exited.mean() > 0.99
    assert np.all(ensemble.exit_times[exited] >= 2.0)
    assert np.all(ensemble.final_radii < 2.0)


def test_thread_count_invariance():
    t_grid = np.linspace(0, 30, 31)
    single = mc_boltzmann(2, 4.0, 1.0, 1.0, 0.0, 10000, t_grid, seed=5, threads=1)
    pooled = mc_boltzmann(2, 4.0, 1.0, 1.0, 0.0, 10000, t_grid, seed=5, threads=3)
    np.testing.assert_array_equal(single.survival, pooled.survival)
    np.testing.assert_array_equal(single.msd, pooled.msd)
    np.testing.assert_array_equal(single.exit_times, pooled.exit_times)


def test_seed_determines_the_run():
    t_grid = np.linspace(0, 10, 11)
    first = mc_boltzmann(3, 3.0, 1.0, 1.0, [0.5, 0.0, 0.0], 1000, t_grid, seed=9)
    again = mc_boltzmann(3, 3.0, 1.0, 1.0, [0.5, 0.0, 0.0], 1000, t_grid, seed=9)
    other = mc_boltzmann(3, 3.0, 1.0, 1.0, [0.5, 0.0, 0.0], 1000, t_grid, seed=10)
    np.testing.assert_array_equal(first.exit_times, again.exit_times)
    assert not np.array_equal(first.exit_times, other.exit_times)


def test_invalid_arguments():
    t_grid = np.linspace(0, 1, 5)
    with pytest.raises(ValueError):
        mc_boltzmann(2, 2.0, 1.0, 1.0, 0.0, 999, t_grid, seed=0)
    with pytest.raises(ValueError):
        mc_boltzmann(2, 2.0, 0.0, 1.0, 0.0, 1000, t_grid, seed=0)
    with pytest.raises(ValueError):
        mc_boltzmann(2, 2.0, 1.0, 1.0, 0.0, 1000, t_grid[::-1], seed=0)
    with pytest.raises(ValueError):
        mc_boltzmann(2, 2.0, 1.0, 1.0, [0.0, 0.0, 0.0], 1000, t_grid, seed=0)
    with pytest.raises(DomainError):
        mc_boltzmann(2, 2.0, 1.0, 1.0, 2.5, 1000, t_grid, seed=0)


def test_fit_escape_rate():
    t_grid = np.linspace(0, 60, 121)
    survival = np.exp(-0.1 * t_grid)
    assert fit_escape_rate(t_grid, survival, 10 ** 6) == pytest.approx(0.1, rel=1e-10)


def test_fit_escape_rate_short_tail():
    t_grid = np.linspace(0, 2, 3)
    survival = np.array([1.0, 0.5, 0.0])
    assert np.isnan(fit_escape_rate(t_grid, survival, 1000))
    assert np.isnan(fit_escape_rate(t_grid, np.zeros(3), 1000))
