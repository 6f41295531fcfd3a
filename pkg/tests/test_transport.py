import numpy as np
import pytest
from scipy import integrate

from FoldyLaxPy import RunConfig, Simulation
from FoldyLaxPy.FoldyLaxError import DomainError
from FoldyLaxPy.PointField import Medium
from FoldyLaxPy.Scattering import MaxPoint, TransportParams, mean_free_path, transport_params
from FoldyLaxPy.Transport import (band_depth, bethe_salpeter_radial, coherence_length, diffusion_modes,
                                  diffusion_time_profile, effective_radius, kernel_moments, profile_amplitude,
                                  radial_mesh, shell_weights, stationary_density_outside, stationary_profile,
                                  transport_kernel)
from FoldyLaxPy.utils import boundary_ratio, read_csv


def _params(d, lscat, k0=6.0):
    n = 1.0
    sigma = 1 / (n * lscat)
    return TransportParams(n=n, sigma=sigma, v=2 * k0, lscat=lscat, D=2 * k0 * lscat / d, d=d, k0=k0)


def test_effective_radius():
    assert effective_radius(2, 12.6, 1.5) == pytest.approx(13.592, abs=1e-3)
    assert effective_radius(2, 12.6, 1.5, form='firstorder') == pytest.approx(13.555, abs=1e-3)
    assert effective_radius(3, 4.0, 1.0, form='firstorder') == pytest.approx(4.5)
    assert effective_radius(3, 4.0, 1.0) == pytest.approx(4.0 / (1 - 1 / 8))
    assert effective_radius(1, 3.0, 0.5) == pytest.approx(3.5)
    assert effective_radius(2, 12.6, 0.0) == 12.6


def test_effective_radius_errors():
    with pytest.raises(DomainError):
        effective_radius(3, 1.0, 2.0)
    with pytest.raises(DomainError):
        effective_radius(3, 4.0, 8.0)
    with pytest.raises(DomainError):
        effective_radius(3, 1.0, 2.5)
    with pytest.raises(DomainError):
        effective_radius(4, 1.0, 3 * np.pi / 8)
    with pytest.raises(ValueError):
        effective_radius(3, 1.0, 0.5, form='second')


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("mu", [0.5, 2.0])
def test_kernel_moments(d, mu):
    moments = kernel_moments(d, mu)
    assert moments.zeroth == pytest.approx(1 / mu, rel=1e-10)
    assert moments.first == pytest.approx(0, abs=1e-12)
    assert moments.second == pytest.approx(2 / (d * mu ** 3), rel=1e-10)
    assert moments.half_zeroth == pytest.approx(1 / (2 * mu), rel=1e-10)
    assert moments.half_normal_first == pytest.approx(-boundary_ratio(d) / 2 / mu ** 2, rel=1e-10)


def test_transport_kernel_normalization():
    mu = 0.8
    for d in (1, 2, 3):
        surface = {1: 2, 2: 2 * np.pi, 3: 4 * np.pi}[d]
        total = integrate.quad(lambda r: surface * r ** (d - 1) * transport_kernel(d, mu, r), 0, np.inf)[0]
        assert total == pytest.approx(1 / mu, rel=1e-8)


def test_profile_amplitude():
    params = transport_params(1, MaxPoint(), 2, 6)
    assert profile_amplitude(params, 'kernel') == pytest.approx(2 * 4 / 6)
    assert profile_amplitude(params, 'wave') == pytest.approx(2 * 4 / 6 / 24)
    with pytest.raises(ValueError):
        profile_amplitude(params, 'flux')


def test_stationary_profile_two_dimensions():
    params = _params(2, 1.5)
    R = 12.6
    R_eff = effective_radius(2, R, 1.5)
    expected = 2 / 1.5 / (2 * np.pi) * np.log(R_eff / 5.0)
    assert stationary_profile(2, params, R, 5.0, normalization='kernel') == pytest.approx(expected, rel=1e-12)
    values = stationary_profile(2, params, R, np.array([1.0, 5.0, R]))
    assert np.all(np.diff(values) < 0) and values[-1] > 0


def test_stationary_profile_three_dimensions():
    params = _params(3, 2.0)
    R = 10.0
    R_eff = effective_radius(3, R, 2.0)
    expected = 3 / 2.0 / (4 * np.pi) * (1 / 4.0 - 1 / R_eff)
    assert stationary_profile(3, params, R, 4.0, normalization='kernel') == pytest.approx(expected, rel=1e-12)


def test_stationary_profile_errors():
    params = _params(2, 1.5)
    with pytest.raises(DomainError):
        stationary_profile(2, params, 5.0, 6.0)
    with pytest.raises(ValueError):
        stationary_profile(2, params, 5.0, 0.0)
    with pytest.raises(ValueError):
        stationary_profile(3, params, 5.0, 1.0)


def test_stationary_density_outside():
    params = _params(3, 1.0)
    inside = stationary_profile(3, params, 6.0, 6.0)
    assert stationary_density_outside(3, params, 6.0, 6.0) == pytest.approx(inside)
    assert stationary_density_outside(3, params, 6.0, 12.0) == pytest.approx(inside / 4)
    with pytest.raises(DomainError):
        stationary_density_outside(3, params, 6.0, 3.0)


def test_radial_mesh():
    edges = radial_mesh(5.0, cells=16)
    assert edges[0] == 0 and edges[-1] == pytest.approx(5.0)
    assert np.all(np.diff(np.diff(edges)) > 0)


def test_shell_weights_at_the_center():
    mu, R = 0.7, 3.0
    edges = radial_mesh(R, cells=32)
    weights = shell_weights(3, mu, edges, np.array([0.0, 1.5]))
    assert weights[0].sum() == pytest.approx(-np.expm1(-mu * R) / mu, rel=1e-10)
    assert -np.expm1(-mu * (R - 1.5)) / mu <= weights[1].sum() <= 1 / mu
    assert np.all(weights >= 0)


@pytest.mark.parametrize("d", [2, 3])
def test_bethe_salpeter_without_scattering(d):
    solution = bethe_salpeter_radial(d, 6.0, 0.0, 0.5, 5.0, gamma=0.3, cells=64)
    np.testing.assert_allclose(solution.density, transport_kernel(d, 0.3, solution.r), rtol=1e-14)
    assert solution.sweeps == 0


def test_bethe_salpeter_uniform_source_gain():
    n_sigma, gamma = 1.0, 1.0
    solution = bethe_salpeter_radial(3, 6.0, 1.0, n_sigma, 20.0, gamma=gamma, cells=128, source='uniform')
    assert solution.at(0.5) == pytest.approx((gamma + n_sigma) / gamma, rel=1e-2)
    assert solution.density[-1] < solution.density[0]


def test_bethe_salpeter_errors():
    with pytest.raises(DomainError):
        bethe_salpeter_radial(3, 6.0, 1.0, 1.0, 5.0, r0=1.0)
    with pytest.raises(ValueError):
        bethe_salpeter_radial(3, 6.0, 1.0, 1.0, 5.0, source='plane')
    with pytest.raises(ValueError):
        bethe_salpeter_radial(3, 6.0, 1.0, 1.0, 5.0, gamma=-1.0)


def test_bethe_salpeter_matches_diffusion_profile():
    lscat, R, d = 1.5, 12.6, 2
    params = _params(d, lscat)
    solution = bethe_salpeter_radial(d, params.k0, params.n, params.sigma, R)
    r = np.linspace(3 * lscat, R - 3 * lscat, 9)
    diffusion = stationary_profile(d, params, R, r, normalization='kernel')
    np.testing.assert_allclose(solution.at(r), diffusion, rtol=0.1)


def test_diffusion_modes_effective_radius():
    spectrum = diffusion_modes(2, 12.6, 1.5, count=3)
    assert spectrum.gammas[0] == pytest.approx(-0.02348, abs=1e-5)
    assert band_depth(spectrum) == pytest.approx(-0.01174, abs=1e-5)
    assert np.all(np.diff(spectrum.betas) > 0)
    np.testing.assert_allclose(spectrum.gammas, -1.5 / 2 * spectrum.betas ** 2)


def test_band_depth_three_dimensions():
    spectrum = diffusion_modes(3, 4.92, 2.865, count=2)
    assert spectrum.gammas[0] == pytest.approx(-0.1956, abs=2e-4)
    assert band_depth(spectrum, 1) == pytest.approx(-0.0978, abs=2e-4)
    with pytest.raises(ValueError):
        band_depth(spectrum, 3)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_robin_modes_close_to_effective_radius(d):
    robin = diffusion_modes(d, 20.0, 1.0, count=3, method='robin')
    effective = diffusion_modes(d, 20.0, 1.0, count=3)
    np.testing.assert_allclose(robin.betas, effective.betas, rtol=1e-2)
    assert robin.method == 'robin'


def test_robin_mode_three_dimensions():
    # sin x + c (x cos x - sin x) = 0 with c = lscat / (2 R)
    beta = diffusion_modes(3, 20.0, 1.0, count=1, method='robin').betas[0]
    x, c = beta * 20.0, 1.0 / 40.0
    assert np.sin(x) + c * (x * np.cos(x) - np.sin(x)) == pytest.approx(0, abs=1e-12)


def test_diffusion_modes_errors():
    with pytest.raises(ValueError):
        diffusion_modes(3, 5.0, 1.0, count=0)
    with pytest.raises(ValueError):
        diffusion_modes(3, 5.0, 1.0, count=1, method='galerkin')


def test_diffusion_time_profile_moments():
    D, t = 0.7, 3.0
    norm = integrate.quad(lambda r: 4 * np.pi * r ** 2 * diffusion_time_profile(3, D, t, r), 0, np.inf)[0]
    msd = integrate.quad(lambda r: 4 * np.pi * r ** 4 * diffusion_time_profile(3, D, t, r), 0, np.inf)[0]
    assert norm == pytest.approx(1, rel=1e-6)
    assert msd == pytest.approx(6 * D * t, rel=1e-6)


@pytest.mark.parametrize("d, tolerance", [(3, 0.02), (2, 0.05)])
def test_coherence_length_weak_scattering(d, tolerance):
    assert coherence_length(d, 10.0, 10.0) == pytest.approx(np.sqrt(2) * 10.0, rel=tolerance)


def test_coherence_length_requires_weak_scattering():
    with pytest.raises(DomainError):
        coherence_length(3, 1.0, 2.0)


def test_effective_radius_grows_toward_pole():
    assert effective_radius(3, 1.0, 1.9) == pytest.approx(1 / 0.05, rel=1e-12)
    assert effective_radius(3, 1.0, 1.0) == pytest.approx(2.0, rel=1e-14)
    assert effective_radius(4, 1.0, 1.0) == pytest.approx((1 - 8 / (3 * np.pi)) ** -0.5, rel=1e-12)


@pytest.mark.slow
def test_mean_intensity_follows_the_diffusion_profile(tmp_path):
    out = tmp_path / 'profile.csv'
    config = RunConfig(task='radial-profile', dim=2, num=500, k=10 + 0j, source='point', quantity='intensity',
                       configs=2 ** 8, bins=60, seed=4, threads=4, out=str(out))
    Simulation(config).run()
    _, columns = read_csv(out)
    R = Medium.with_unit_density(2, 500).R
    lscat = mean_free_path(1.0, MaxPoint(), 2, 10.0)
    r = columns['r']
    bulk = (r > lscat) & (r < R - lscat)
    np.testing.assert_allclose(columns['mean'][bulk], columns['diffusion'][bulk], rtol=0.15)
    center = r < 0.5
    np.testing.assert_allclose(columns['mean'][center], columns['coherent'][center], rtol=0.2)
