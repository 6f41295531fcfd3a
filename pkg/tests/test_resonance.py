import numpy as np
import pytest

from FoldyLaxPy.FoldyLaxError import ContourError, DomainError
from FoldyLaxPy.MultipleScattering import ScattererSystem
from FoldyLaxPy.PointField import Configuration, Medium, sample_configuration
from FoldyLaxPy.Resonance import (KWindow, ResonanceMap, count_zeros, density_from_potential,
                                  effective_resonances, effective_s_matrix, resonance_density_map,
                                  resonance_residual, two_scatterer_poles)
from FoldyLaxPy.Scattering import HardSphere, MaxPoint, effective_wavenumber, mean_free_path
from FoldyLaxPy.SpecialFunctions import bessel_order, hankel_zeros
from FoldyLaxPy.Transport import band_depth, diffusion_modes

PRINCIPAL_POLE = 1.33724 - 0.31813j


@pytest.fixture
def pair_system():
    return ScattererSystem(Configuration(positions=[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), MaxPoint())


def test_k_window():
    window = KWindow(1.0, 3.0, -1.0, 0.0, nx=4, ny=2)
    assert window.hx == 0.5 and window.hy == 0.5
    re, im = window.axes()
    np.testing.assert_allclose(re, [1.25, 1.75, 2.25, 2.75])
    assert window.nodes(border=1).shape == (4, 6)
    assert window.contains(2 - 0.5j) and not window.contains(2 + 0.5j)
    quadrants = window.quadrants()
    assert sum(q.nx * q.ny for q in quadrants) == 8
    with pytest.raises(ValueError):
        KWindow(1.0, 1.0, -1.0, 0.0)


def test_density_of_a_single_zero():
    k0 = 2.013 - 0.4871j
    window = KWindow(1.0, 3.0, -1.0, 0.0, nx=40, ny=40)
    density = density_from_potential(lambda k: np.log(abs(k - k0)), window)
    resonance_map = ResonanceMap(window=window, density=density, configs_averaged=1)
    assert resonance_map.zero_count() == pytest.approx(1.0, abs=0.02)
    assert sum(resonance_map.zero_count(q) for q in window.quadrants()) == pytest.approx(
        resonance_map.zero_count(), rel=1e-12)
    assert any(abs(k - k0) <= 1.5 * window.hx for k in resonance_map.local_maxima())
    im, column = resonance_map.cross_section(2.013)
    assert im.shape == column.shape == (40,)
    assert im[np.argmax(column)] == pytest.approx(k0.imag, abs=window.hy)


def test_density_survives_singular_nodes():
    window = KWindow(-1.5, 1.5, -1.5, 1.5, nx=3, ny=3)
    # k = 0 is a grid node of the bordered stencil
    density = density_from_potential(lambda k: np.log(abs(k)), window)
    assert np.all(np.isfinite(density))


def test_two_scatterer_poles():
    poles = two_scatterer_poles(1.0)
    assert poles[0] == pytest.approx(PRINCIPAL_POLE, abs=1e-5)
    assert poles[1] == pytest.approx(-PRINCIPAL_POLE.conjugate(), abs=1e-5)
    assert all(k.imag < 0 for k in poles)
    assert two_scatterer_poles(2.0)[0] == pytest.approx(poles[0] / 2, rel=1e-12)
    assert len(two_scatterer_poles(1.0, branches=2)) > len(poles)
    with pytest.raises(DomainError):
        two_scatterer_poles(1.0, d=2)
    with pytest.raises(DomainError):
        two_scatterer_poles(1.0, model=HardSphere(0.1))


def test_two_scatterer_poles_are_zeros_of_the_determinant(pair_system):
    for k in two_scatterer_poles(1.0, branches=1):
        assert pair_system.log_abs_det(k) < np.log(1e-12)


def test_count_zeros_of_the_determinant(pair_system):
    assert count_zeros(pair_system, KWindow(1.2, 1.5, -0.45, -0.2)) == 1
    assert count_zeros(pair_system, KWindow(-1.6, 1.6, -0.5, -0.1)) == 2
    assert count_zeros(pair_system, KWindow(2.0, 3.0, -0.5, -0.1)) == 0


def test_count_zeros_of_callables():
    assert count_zeros(lambda k: (k - 1) * (k - 2j), KWindow(0.0, 1.5, -1.0, 1.0)) == 1
    assert count_zeros(lambda k: (k - 0.5) ** 3, KWindow(0.0, 1.0, -1.0, 1.0)) == 3
    assert count_zeros(lambda k: np.log(k - 0.5), KWindow(0.0, 1.0, -1.0, 1.0), log=True) == 1


def test_count_zeros_enlarges_contour_through_a_zero():
    assert count_zeros(lambda k: k - 1, KWindow(1.0, 2.0, -1.0, 1.0)) == 1


def test_count_zeros_fails_on_singular_function():
    with pytest.raises(ContourError):
        count_zeros(lambda k: np.nan, KWindow(1.0, 2.0, -1.0, 1.0))


def test_count_zeros_of_a_medium():
    medium = Medium(d=3, N=4, R=1.0, master_seed=3)
    window = KWindow(0.5, 2.5, -0.6, -0.1)
    system = ScattererSystem(sample_configuration(medium, 2), medium.model)
    assert count_zeros(medium, window, config_index=2) == count_zeros(system, window)


def test_map_matches_argument_principle(pair_system):
    window = KWindow(0.8, 2.0, -0.8, -0.05, nx=30, ny=30)
    resonance_map = ResonanceMap(window=window, density=density_from_potential(pair_system.log_abs_det, window),
                                 configs_averaged=1)
    assert resonance_map.zero_count() == pytest.approx(count_zeros(pair_system, window), abs=0.5)
    assert any(abs(k - PRINCIPAL_POLE) <= 1.5 * window.hx for k in resonance_map.local_maxima())


def test_resonance_density_map_mirror_symmetry():
    medium = Medium(d=3, N=5, R=1.0, master_seed=8)
    window = KWindow(-2.0, 2.0, -1.0, -0.2, nx=16, ny=8)
    resonance_map = resonance_density_map(medium, window, num_configs=2, threads=2)
    assert resonance_map.configs_averaged == 2
    assert resonance_map.density.shape == (8, 16)
    np.testing.assert_allclose(resonance_map.density, resonance_map.density[:, ::-1], rtol=1e-6, atol=1e-6)


def test_resonance_density_map_thread_count_invariance():
    medium = Medium(d=2, N=6, R=1.5, master_seed=1)
    window = KWindow(1.0, 3.0, -0.8, -0.1, nx=6, ny=4)
    single = resonance_density_map(medium, window, num_configs=3, threads=1).density
    np.testing.assert_array_equal(single, resonance_density_map(medium, window, num_configs=3, threads=3).density)


@pytest.mark.parametrize("d, window", [(3, KWindow(-1.0, 1.0, -0.5, 0.5)), (2, KWindow(-1.0, 1.0, -1.0, -0.1))])
def test_resonance_density_map_rejects_bad_windows(d, window):
    with pytest.raises(DomainError):
        resonance_density_map(Medium(d=d, N=3, R=1.0), window, num_configs=1)


@pytest.mark.parametrize("d, ell", [(2, 0), (2, 1), (3, 0), (3, 2)])
def test_s_matrix_without_contrast(d, ell):
    assert effective_s_matrix(d, ell, 1.7, 1.7, 2.0) == pytest.approx(1.0, rel=1e-10)


def test_s_matrix_is_unitary_without_losses():
    for ell in (0, 1, 2):
        assert abs(effective_s_matrix(3, ell, 1.1, 2.3, 1.5)) == pytest.approx(1.0, rel=1e-10)


def test_resonance_residual_in_three_dimensions():
    medium = Medium(d=3, N=100, R=3.0, model=HardSphere(0.1))
    k = 1.2 - 0.3j
    kappa = effective_wavenumber(medium.density, medium.model, 3, k)
    expected = abs(kappa / np.tan(kappa * medium.R) - 1j * k)
    assert resonance_residual(3, 0, medium, k) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("ell", [0, 1, 2])
def test_effective_resonances_are_roots(ell):
    medium = Medium.with_unit_density(3, 100, model=HardSphere(0.1))
    roots = effective_resonances(3, ell, medium)
    assert roots == sorted(roots, key=abs)
    for i, k in enumerate(roots):
        assert k.imag < 0
        assert resonance_residual(3, ell, medium, k) < 1e-9
        assert all(abs(k - other) > 1e-6 for other in roots[i + 1:])


def test_effective_resonances_dimension_mismatch():
    with pytest.raises(ValueError):
        effective_resonances(2, 0, Medium(d=3, N=10, R=1.0))


def test_effective_resonances_satisfy_the_hard_wall_equation():
    medium = Medium.with_unit_density(3, 100, model=HardSphere(0.1))
    roots = effective_resonances(3, 0, medium, ring_points=64)
    assert roots
    for k in roots:
        kappa = effective_wavenumber(medium.density, medium.model, 3, k)
        assert abs(kappa / np.tan(kappa * medium.R) - 1j * k) < 1e-8


@pytest.mark.parametrize("ell", [1, 2])
def test_effective_resonances_approach_hankel_zeros_in_a_dense_medium(ell):
    zeros = hankel_zeros(bessel_order(3, ell)).refined
    distances = []
    for N in (10000, 100000):
        roots = effective_resonances(3, ell, Medium(d=3, N=N, R=1.0))
        distances.append(max(min(abs(k - z) for k in roots) for z in zeros))
    assert distances[1] < 0.02
    assert distances[1] < distances[0]


@pytest.mark.slow
def test_map_density_matches_zero_counts_per_quadrant():
    medium = Medium.with_unit_density(3, 20, master_seed=5)
    window = KWindow(1.0, 5.0, -1.5, 0.0, nx=200, ny=100)
    resonance_map = resonance_density_map(medium, window, num_configs=1)
    for quadrant in window.quadrants():
        assert resonance_map.zero_count(quadrant) == pytest.approx(count_zeros(medium, quadrant), abs=0.5)


@pytest.mark.slow
def test_low_energy_effective_resonances_sit_on_map_peaks():
    medium = Medium.with_unit_density(3, 100, model=HardSphere(0.1), master_seed=2)
    window = KWindow(0.2, 2.4, -1.1, -0.02, nx=120, ny=60)
    peaks = resonance_density_map(medium, window, num_configs=64, threads=4).local_maxima()
    in_window = [k for ell in (0, 1, 2) for k in effective_resonances(3, ell, medium) if window.contains(k)]
    assert in_window
    for k in in_window:
        assert min(abs(k - peak) for peak in peaks) < 0.3


@pytest.mark.slow
def test_band_depth_of_the_fundamental_diffusion_mode():
    medium = Medium.with_unit_density(3, 500, master_seed=11)
    lscat = mean_free_path(medium.density, medium.model, 3, 6.0)
    depth = band_depth(diffusion_modes(3, medium.R, lscat, 1))
    assert depth == pytest.approx(-0.098, abs=1e-3)
    window = KWindow(5.9, 6.1, -0.3, -0.005, nx=4, ny=59)
    resonance_map = resonance_density_map(medium, window, num_configs=64, threads=4)
    _, im = window.axes()
    profile = resonance_map.density.mean(axis=1)
    assert im[np.argmax(profile)] == pytest.approx(depth, rel=0.3)
