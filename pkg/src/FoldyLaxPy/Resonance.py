"""
Resonance structure in the complex k-plane.

The density of resonances is obtained from the zero potential ln|det M(k)|: since det M is
analytic, its two-dimensional Laplacian is 2 pi times a sum of delta functions at the zeros.
The Laplacian is taken with a 5-point stencil and averaged over configurations; the
argument principle on rectangles gives the matching counts.
"""
import logging
from dataclasses import dataclass

import numpy as np

from FoldyLaxPy.Ensemble import run_ensemble
from FoldyLaxPy.FoldyLaxError import AtResonanceError, ContourError, ConvergenceError, DomainError
from FoldyLaxPy.MultipleScattering import ScattererSystem
from FoldyLaxPy.PointField import Medium, sample_configuration
from FoldyLaxPy.Scattering import MaxPoint, ScatteringModel, amplitude_derivative, effective_wavenumber
from FoldyLaxPy.SpecialFunctions import (bessel, bessel_order, hankel_zero_count, hankel_zero_seeds,
                                         hankel_zeros, lambert_w, sph_bessel_gen,
                                         sph_bessel_gen_derivative)

logger = logging.getLogger(__name__)

SINGULAR_NODE_SHIFT = 1 / 7
CONTOUR_INITIAL_POINTS = 64
CONTOUR_MIN_STEP = 1e-10
CONTOUR_PERTURBATIONS = 3
WINDING_TOLERANCE = 0.1
SEED_RING_POINTS = 16
ROOT_MAX_ITERATIONS = 60
ROOT_NEWTON_FAILURES = 3
ROOT_RESIDUAL_TOLERANCE = 1e-9
ROOT_DEDUP_TOLERANCE = 1e-6


@dataclass(frozen=True)
class KWindow:
    """
    Rectangle of the complex k-plane sampled on an nx x ny grid of cell centers.

    Attributes:
        re_min (float): Lower bound of Re k.
        re_max (float): Upper bound of Re k.
        im_min (float): Lower bound of Im k.
        im_max (float): Upper bound of Im k.
        nx (int): Number of cells along Re k.
        ny (int): Number of cells along Im k.
    """
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int = 1
    ny: int = 1

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError(f"Empty k window {self}")
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"Grid sizes must be positive, got {self.nx}x{self.ny}")

    @property
    def hx(self) -> float:
        return (self.re_max - self.re_min) / self.nx

    @property
    def hy(self) -> float:
        return (self.im_max - self.im_min) / self.ny

    def axes(self, border: int = 0) -> tuple:
        """
        Cell-center coordinates along Re k and Im k, extended by `border` cells on each side.
        """
        re = self.re_min + (np.arange(-border, self.nx + border) + 0.5) * self.hx
        im = self.im_min + (np.arange(-border, self.ny + border) + 0.5) * self.hy
        return re, im

    def nodes(self, border: int = 0) -> np.ndarray:
        re, im = self.axes(border)
        return re[None, :] + 1j * im[:, None]

    def contains(self, k: complex) -> bool:
        return self.re_min <= k.real <= self.re_max and self.im_min <= k.imag <= self.im_max

    def quadrants(self) -> list:
        """
        Splits the window into four sub-windows along grid lines.
        """
        hx_mid, hy_mid = self.nx // 2, self.ny // 2
        re_mid = self.re_min + hx_mid * self.hx
        im_mid = self.im_min + hy_mid * self.hy
        return [KWindow(self.re_min, re_mid, self.im_min, im_mid, hx_mid, hy_mid),
                KWindow(re_mid, self.re_max, self.im_min, im_mid, self.nx - hx_mid, hy_mid),
                KWindow(self.re_min, re_mid, im_mid, self.im_max, hx_mid, self.ny - hy_mid),
                KWindow(re_mid, self.re_max, im_mid, self.im_max, self.nx - hx_mid, self.ny - hy_mid)]


@dataclass(eq=False)
class ResonanceMap:
    """
    Ensemble-averaged resonance density 2 pi rho(k) per unit area of the k-plane.
    Negative values from stencil noise are kept.

    Attributes:
        window (KWindow): The sampled window.
        density (np.ndarray): (ny, nx) density at the cell centers.
        configs_averaged (int): Number of configurations in the average.
    """
    window: KWindow
    density: np.ndarray
    configs_averaged: int

    def zero_count(self, sub: KWindow = None) -> float:
        """
        Integral of the density over the cells whose centers fall in `sub` (whole map by
        default), divided by 2 pi.
        """
        re, im = self.window.axes()
        mask = np.ones(self.density.shape, dtype=bool)
        if sub is not None:
            inside_re = (re >= sub.re_min) & (re <= sub.re_max)
            inside_im = (im >= sub.im_min) & (im <= sub.im_max)
            mask = inside_im[:, None] & inside_re[None, :]
        area = self.window.hx * self.window.hy
        return float(self.density[mask].sum() * area / (2 * np.pi))

    def local_maxima(self) -> list:
        """
        Interior cells strictly larger than their eight neighbours, as complex k.
        """
        center = self.density[1:-1, 1:-1]
        is_max = np.ones(center.shape, dtype=bool)
        ny, nx = self.density.shape
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx or dy:
                    is_max &= center > self.density[1 + dy:ny - 1 + dy, 1 + dx:nx - 1 + dx]
        nodes = self.window.nodes()[1:-1, 1:-1]
        return [complex(k) for k in nodes[is_max]]

    def cross_section(self, re_k: float) -> tuple:
        """
        Density along Im k at the column closest to Re k = re_k.

        Returns:
            tuple: (Im k values, density values)
        """
        re, im = self.window.axes()
        column = int(np.argmin(np.abs(re - re_k)))
        return im, self.density[:, column]


def _potential_grid(potential, window: KWindow) -> np.ndarray:
    nodes = window.nodes(border=1)
    values = np.empty(nodes.shape)
    shift = (window.hx + 1j * window.hy) * SINGULAR_NODE_SHIFT
    for index, k in np.ndenumerate(nodes):
        value = potential(k)
        if not np.isfinite(value):
            logger.debug("Singular node at k = %s, shifted by %s", k, shift)
            value = potential(k + shift)
        values[index] = value
    return values


def density_from_potential(potential, window: KWindow) -> np.ndarray:
    """
    5-point Laplacian of a zero potential ln|f(k)| at the cell centers of a window.
    For analytic f, the sum of the result times the cell area is 2 pi times the number of
    zeros inside, up to discretization of the boundary flux.

    Args:
        potential (Callable): Maps a complex k to ln|f(k)|.
        window (KWindow): The grid.

    Returns:
        np.ndarray: (ny, nx) density 2 pi rho.
    """
    v = _potential_grid(potential, window)
    center = v[1:-1, 1:-1]
    return ((v[1:-1, 2:] + v[1:-1, :-2] - 2 * center) / window.hx ** 2
            + (v[2:, 1:-1] + v[:-2, 1:-1] - 2 * center) / window.hy ** 2)


def _check_window(d: int, window: KWindow) -> None:
    re_margin = 1.5 * window.hx
    im_margin = 1.5 * window.hy
    spans_zero_re = window.re_min - re_margin <= 0 <= window.re_max + re_margin
    if spans_zero_re and window.im_min - im_margin <= 0 <= window.im_max + im_margin:
        raise DomainError("The k window must avoid k = 0")
    if d % 2 == 0 and spans_zero_re and window.im_min - im_margin < 0:
        raise DomainError("The k window crosses the branch cut on the negative imaginary axis")


def resonance_density_map(medium: Medium, k_window: KWindow, num_configs: int, threads: int = 1) -> ResonanceMap:
    """
    Ensemble average over configurations 0..num_configs-1 of the resonance density
    2 pi rho = Laplacian of ln|det M(k)|.

    Args:
        medium (Medium): The medium.
        k_window (KWindow): The window and grid.
        num_configs (int): Number of configurations.
        threads (int): Number of worker threads.

    Returns:
        ResonanceMap: The averaged density.
    """
    _check_window(medium.d, k_window)

    def _one(index):
        system = ScattererSystem(sample_configuration(medium, index), medium.model)
        return density_from_potential(system.log_abs_det, k_window)

    density = run_ensemble(num_configs, _one, threads=threads)
    return ResonanceMap(window=k_window, density=density, configs_averaged=num_configs)


def two_scatterer_poles(r12: float, branches: int = 0, d: int = 3, model: ScatteringModel = None) -> list:
    """
    Resonances of two MaxPoint scatterers in d = 3 at distance r12. The determinantal
    equation 1/F^2 = G^2 reduces to i k r = -+exp(i k r), whose roots are
    k = i W_b(+-1) / r12 on the Lambert W branches b. Mirror images -conj(k) are included.

    Args:
        r12 (float): The distance between the scatterers.
        branches (int): Use Lambert W branches -branches-1 .. branches.
        d (int): Must be 3.
        model (ScatteringModel): Must be MaxPoint.

    Returns:
        list: Poles in the lower half-plane sorted by modulus, the principal pair
        (+-1.33724 - 0.31813i) / r12 first.
    """
    if d != 3 or not isinstance(model or MaxPoint(), MaxPoint):
        raise DomainError("Closed-form two-scatterer poles exist only for MaxPoint in d = 3")
    if not r12 > 0:
        raise ValueError(f"Distance must be positive, got {r12}")
    candidates = []
    for rhs in (-1, 1):
        for branch in range(-branches - 1, branches + 1):
            k = 1j * lambert_w(rhs, branch) / r12
            candidates.extend([k, -k.conjugate()])
    poles = []
    for k in candidates:
        if k.imag < 0 and all(abs(k - p) > ROOT_DEDUP_TOLERANCE for p in poles):
            poles.append(complex(k))
    return sorted(poles, key=lambda k: (round(abs(k), 9), -k.real))


def _as_system(target, config_index: int):
    if isinstance(target, ScattererSystem):
        return target
    if isinstance(target, Medium):
        return ScattererSystem(sample_configuration(target, config_index), target.model)
    return None


def _wrap(angle):
    return (angle + np.pi) % (2 * np.pi) - np.pi


def _winding(phase, corners: list) -> float:
    total = 0.0
    min_step = CONTOUR_MIN_STEP * sum(abs(corners[i + 1] - corners[i]) for i in range(4))
    for a, b in zip(corners[:-1], corners[1:]):
        points = a + (b - a) * np.linspace(0, 1, CONTOUR_INITIAL_POINTS + 1)
        phases = [phase(k) for k in points]
        stack = list(zip(points[:-1], points[1:], phases[:-1], phases[1:]))[::-1]
        while stack:
            ka, kb, pa, pb = stack.pop()
            if not (np.isfinite(pa) and np.isfinite(pb)):
                raise ContourError(f"Function singular on the contour near k = {ka}")
            step = _wrap(pb - pa)
            if abs(step) < np.pi / 2:
                total += step
                continue
            if abs(kb - ka) <= min_step:
                raise ContourError(f"Zero on the contour near k = {ka}")
            km = 0.5 * (ka + kb)
            pm = phase(km)
            stack.append((km, kb, pm, pb))
            stack.append((ka, km, pa, pm))
    return total / (2 * np.pi)


def count_zeros(target, rectangle: KWindow, log: bool = False, config_index: int = 0) -> int:
    """
    Number of zeros inside a rectangle by the argument principle: the phase is followed
    counter-clockwise along the boundary with adaptive bisection until every increment is
    below pi/2. A non-integral winding triggers up to three slightly enlarged retries.

    Args:
        target: A callable f(k), a ScattererSystem (det M) or a Medium (det M of
            configuration `config_index`).
        rectangle (KWindow): The rectangle; its grid sizes are ignored.
        log (bool): The callable returns log f(k) instead of f(k).
        config_index (int): Configuration used when target is a Medium.

    Returns:
        int: The winding number.

    Raises:
        ContourError: If a zero sits on the contour after all retries.
    """
    system = _as_system(target, config_index)
    if system is not None:
        def phase(k):
            return system.log_det(k).imag
    elif log:
        def phase(k):
            return complex(target(k)).imag
    else:
        def phase(k):
            return float(np.angle(complex(target(k))))
    width = rectangle.re_max - rectangle.re_min
    height = rectangle.im_max - rectangle.im_min
    last_error = None
    for attempt in range(CONTOUR_PERTURBATIONS + 1):
        dx = attempt * 1e-3 * width
        dy = attempt * 1e-3 * height
        corners = [complex(rectangle.re_min - dx, rectangle.im_min - dy),
                   complex(rectangle.re_max + dx, rectangle.im_min - dy),
                   complex(rectangle.re_max + dx, rectangle.im_max + dy),
                   complex(rectangle.re_min - dx, rectangle.im_max + dy)]
        corners.append(corners[0])
        try:
            winding = _winding(phase, corners)
        except ContourError as e:
            last_error = e
            continue
        if abs(winding - round(winding)) <= WINDING_TOLERANCE:
            return int(round(winding))
        last_error = ContourError(f"Non-integral winding number {winding:.3f}")
        logger.debug("Winding %.3f on attempt %d, enlarging the contour", winding, attempt)
    raise last_error


def _wronskian(f: complex, df: complex, g: complex, dg: complex, k: complex, kappa: complex) -> complex:
    # W[f(kr), g(kappa r)] = f kappa g' - k f' g
    return f * kappa * dg - k * df * g


def effective_s_matrix(d: int, ell: int, k, kappa, R: float) -> complex:
    """
    S-matrix element of partial wave ell for a homogeneous ball of radius R and
    wavenumber kappa in free space,

        S = -W[h-(kr), j(kappa r)] / W[h+(kr), j(kappa r)]   at r = R.

    Args:
        d (int): The dimension.
        ell (int): The angular momentum.
        k (complex): The outer wavenumber.
        kappa (complex): The inner (effective) wavenumber.
        R (float): The ball radius.

    Returns:
        complex: S_ell(k).

    Raises:
        AtResonanceError: If k is a pole of S (vanishing denominator).
    """
    k, kappa = complex(k), complex(kappa)
    inner = kappa * R
    outer = k * R
    j = sph_bessel_gen(d, ell, 'j', inner)
    dj = sph_bessel_gen_derivative(d, ell, 'j', inner)
    numerator = _wronskian(sph_bessel_gen(d, ell, 'h-', outer), sph_bessel_gen_derivative(d, ell, 'h-', outer),
                           j, dj, k, kappa)
    denominator = _wronskian(sph_bessel_gen(d, ell, 'h+', outer), sph_bessel_gen_derivative(d, ell, 'h+', outer),
                             j, dj, k, kappa)
    if denominator == 0:
        raise AtResonanceError(f"S-matrix pole at k = {k}", k=k)
    return -numerator / denominator


def _bessel_pair(kind: str, nu: float, z: complex) -> tuple:
    # C_nu, C_{nu+1} and their derivatives
    c0 = bessel(kind, nu, z)
    c1 = bessel(kind, nu + 1, z)
    return c0, c1, nu / z * c0 - c1, c0 - (nu + 1) / z * c1


def _resonance_equation(d: int, ell: int, n: float, model: ScatteringModel, R: float, k: complex) -> tuple:
    """
    Cross-multiplied resonance condition and its k-derivative,

        g(k) = kappa J_{nu+1}(kappa R) H+_nu(kR) - k H+_{nu+1}(kR) J_nu(kappa R),

    finite at the zeros of H+_nu(kR).
    """
    nu = bessel_order(d, ell)
    kappa = effective_wavenumber(n, model, d, k)
    j0, j1, dj0, dj1 = _bessel_pair('J', nu, kappa * R)
    h0, h1, dh0, dh1 = _bessel_pair('H+', nu, k * R)
    value = kappa * j1 * h0 - k * h1 * j0
    dkappa = (2 * k - n * amplitude_derivative(model, d, k)) / (2 * kappa)
    derivative = (dkappa * (j1 * h0 + kappa * R * dj1 * h0 - k * R * h1 * dj0)
                  + kappa * R * j1 * dh0 - h1 * j0 - k * R * dh1 * j0)
    return value, derivative


def _ratio_residual(d: int, ell: int, n: float, model: ScatteringModel, R: float, k: complex) -> float:
    nu = bessel_order(d, ell)
    kappa = effective_wavenumber(n, model, d, k)
    inner, outer = kappa * R, k * R
    j0, h0 = bessel('J', nu, inner), bessel('H+', nu, outer)
    if j0 == 0 or h0 == 0:
        return np.inf
    return abs(kappa * bessel('J', nu + 1, inner) / j0 - k * bessel('H+', nu + 1, outer) / h0)


def resonance_residual(d: int, ell: int, medium: Medium, k) -> float:
    """
    |kappa J_{nu+1}(kappa R)/J_nu(kappa R) - k H+_{nu+1}(kR)/H+_nu(kR)| at k, infinite at a
    pole of either ratio.
    """
    return _ratio_residual(d, ell, medium.density, medium.model, medium.R, complex(k))


def _find_root(equation, residual, seed: complex) -> tuple:
    k = complex(seed)
    value, derivative = equation(k)
    previous = None
    failures = 0
    for _ in range(ROOT_MAX_ITERATIONS):
        if value == 0:
            break
        if not np.isfinite(value):
            raise ConvergenceError(f"Resonance equation singular at k = {k}", last_iterate=k)
        if failures < ROOT_NEWTON_FAILURES or previous is None:
            if derivative == 0 or not np.isfinite(derivative):
                raise ConvergenceError(f"Vanishing derivative at k = {k}", last_iterate=k, residual=abs(value))
            k_next = k - value / derivative
        else:
            k_prev, value_prev = previous
            if value == value_prev:
                break
            k_next = k - value * (k - k_prev) / (value - value_prev)
        value_next, derivative_next = equation(k_next)
        failures = failures + 1 if abs(value_next) >= abs(value) else 0
        previous = (k, value)
        step = abs(k_next - k)
        k, value, derivative = k_next, value_next, derivative_next
        if step <= 1e-14 * max(1.0, abs(k)):
            break
    error = residual(k)
    if not error < ROOT_RESIDUAL_TOLERANCE:
        raise ConvergenceError(f"Resonance search from {seed} stalled", last_iterate=k, residual=error)
    return k, error


def _resonance_seeds(nu: float, R: float, ring_points: int) -> list:
    seeds = []
    if nu > 0 and hankel_zero_count(nu) > 0 and not (nu < 1 and float(2 * nu).is_integer()):
        try:
            seeds.extend(z / R for z in hankel_zeros(nu).refined)
        except ConvergenceError as e:
            logger.info("Hankel zero refinement failed for nu = %g (%s), using raw seeds", nu, e)
            seeds.extend(z / R for z in hankel_zero_seeds(nu))
    theta = -np.pi * (np.arange(ring_points) + 0.5) / ring_points
    seeds.extend(np.exp(1j * theta) / R)
    return [complex(s) for s in seeds]


def effective_resonances(d: int, ell: int, medium: Medium, ring_points: int = SEED_RING_POINTS) -> list:
    """
    Resonances of partial wave ell of the effective medium, roots of

        kappa J_{nu+1}(kappa R) / J_nu(kappa R) = k H+_{nu+1}(kR) / H+_nu(kR),  nu = ell + (d-2)/2.

    Newton's method (secant after three non-decreasing steps) runs on the cross-multiplied
    form from the refined Hankel zeros z/R and a ring of seeds on |k| R = 1 in the lower
    half-plane; a root is kept when the ratio form above is met to ROOT_RESIDUAL_TOLERANCE.

    Args:
        d (int): The dimension, equal to medium.d.
        ell (int): The angular momentum.
        medium (Medium): Provides n, R and the scattering model.
        ring_points (int): Number of low-|k| seeds.

    Returns:
        list: Distinct roots in the lower half-plane, sorted by modulus.
    """
    if d != medium.d:
        raise ValueError(f"Dimension {d} differs from the medium dimension {medium.d}")
    nu = bessel_order(d, ell)
    n, model, R = medium.density, medium.model, medium.R

    def equation(k):
        return _resonance_equation(d, ell, n, model, R, k)

    def residual(k):
        return _ratio_residual(d, ell, n, model, R, k)

    roots = []
    for seed in _resonance_seeds(nu, R, ring_points):
        try:
            with np.errstate(all='ignore'):
                k, error = _find_root(equation, residual, seed)
        except (ConvergenceError, DomainError, ZeroDivisionError, OverflowError) as e:
            logger.info("Resonance seed %s (ell = %d) dropped: %s", seed, ell, e)
            continue
        if k.imag >= 0 or abs(k) < 1e-8:
            logger.debug("Root %s (ell = %d) outside the lower half-plane, dropped", k, ell)
            continue
        if all(abs(k - root) > ROOT_DEDUP_TOLERANCE for root in roots):
            roots.append(k)
    return sorted(roots, key=abs)
