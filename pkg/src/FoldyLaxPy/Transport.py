"""
Incoherent transport in the ball-shaped medium: transport kernel, diagonal Bethe-Salpeter
equation on a radial mesh, diffusion approximation (stationary profile, decay modes and
resonance band depth) and the coherence length of the averaged density matrix.

Lengths are in units of varsigma, rates gamma in 1/varsigma (a time rate is gamma v).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from FoldyLaxPy.FoldyLaxError import ConvergenceError, DomainError
from FoldyLaxPy.GreenFunctions import GreenSign, check_dimension, dos_free, green_free
from FoldyLaxPy.Scattering import TransportParams
from FoldyLaxPy.SpecialFunctions import bessel_j_zero, sph_bessel_gen, sph_bessel_gen_derivative
from FoldyLaxPy.utils import ball_surface, ball_volume, boundary_ratio

logger = logging.getLogger(__name__)

RADIAL_CELLS = 256
MESH_STRETCH = 3.0
ANGULAR_NODES = 64
NEUMANN_TOLERANCE = 1e-10
NEUMANN_MAX_SWEEPS = 20000
COHERENCE_SEGMENTS = 60
WEAK_SCATTERING_MIN = 10.0
BRACKET_WIDENING = 0.1
EFFECTIVE_RADIUS_POLE_TOLERANCE = 1e-12


def effective_radius(d: int, R: float, lscat: float, form: str = 'exact') -> float:
    """
    Radius at which the diffusive density extrapolates to zero under the Robin condition
    rho(R) / rho'(R) = -(2 V_{d-1} / S_d) lscat.

    Args:
        d (int): The dimension.
        R (float): The ball radius.
        lscat (float): The mean free path.
        form (str): 'exact' (power law, exponential in d = 2) or 'firstorder'
            (R + (2 V_{d-1} / S_d) lscat).

    Returns:
        float: R_eff >= R.

    Raises:
        DomainError: If the exact form has no finite value (d = 3 with lscat / R >= 2).
    """
    check_dimension(d)
    if not (R > 0 and lscat >= 0):
        raise ValueError(f"Need R > 0 and lscat >= 0, got R = {R}, lscat = {lscat}")
    ratio = boundary_ratio(d)
    if form == 'firstorder':
        return R + ratio * lscat
    if form != 'exact':
        raise ValueError(f"Unknown effective radius form: {form}")
    if d == 2:
        return R * math.exp(ratio * lscat / R)
    base = 1 + (2 - d) * ratio * lscat / R
    if base <= EFFECTIVE_RADIUS_POLE_TOLERANCE:
        raise DomainError(f"No finite effective radius in d = {d} for lscat / R = {lscat / R:.4g}")
    return R * base ** (1 / (2 - d))


def _laplace_fundamental(d: int, r, R_eff: float):
    # Solution of -lap(phi) = delta(r) vanishing at R_eff
    r = np.asarray(r, dtype=float)
    if d == 2:
        return np.log(R_eff / r) / (2 * np.pi)
    return -(r ** (2 - d) - R_eff ** (2 - d)) / ((2 - d) * ball_surface(d))


def profile_amplitude(params: TransportParams, normalization: str = 'wave') -> float:
    """
    Source amplitude A of the Poisson equation lap(rho) = -A delta(r).

    'kernel' gives A = d n sigma for a K(r|0) source; 'wave' rescales it by pi N(k0) / k0
    for a |<G>|^2 source, which is what the ensemble mean of |psi|^2 follows.
    """
    amplitude = params.d * params.n * params.sigma
    if normalization == 'kernel':
        return amplitude
    if normalization == 'wave':
        return amplitude * np.pi * dos_free(params.d, params.k0) / params.k0
    raise ValueError(f"Unknown normalization: {normalization}")


def stationary_profile(d: int, params: TransportParams, R: float, r, normalization: str = 'wave'):
    """
    Stationary density of the diffusion approximation for a source at the center,

        rho(r) = -(A / S_d) (r^{2-d} - R_eff^{2-d}) / (2 - d),    -(A / 2pi) ln(r / R_eff) in d = 2,

    with the exact effective radius.

    Args:
        d (int): The dimension, equal to params.d.
        params (TransportParams): Density, cross section, mean free path and k0.
        R (float): The ball radius.
        r (float | np.ndarray): Radii in (0, R].
        normalization (str): 'wave' or 'kernel', see `profile_amplitude`.

    Returns:
        float | np.ndarray: rho(r).

    Raises:
        DomainError: If some r lies outside (0, R]; use `stationary_density_outside` there.
    """
    if d != params.d:
        raise ValueError(f"Dimension {d} differs from the transport parameters ({params.d})")
    r_array = np.asarray(r, dtype=float)
    if np.any(r_array <= 0):
        raise ValueError("Radii must be positive")
    if np.any(r_array > R):
        raise DomainError(f"The diffusion profile only holds inside the medium, r <= {R}")
    R_eff = effective_radius(d, R, params.lscat)
    value = profile_amplitude(params, normalization) * _laplace_fundamental(d, r_array, R_eff)
    return float(value) if r_array.ndim == 0 else value


def stationary_density_outside(d: int, params: TransportParams, R: float, r, normalization: str = 'wave'):
    """
    Power-law continuation rho(R) (R / r)^{d-1} of the stationary profile for r >= R.
    """
    r_array = np.asarray(r, dtype=float)
    if np.any(r_array < R):
        raise DomainError(f"The outer density only holds for r >= {R}")
    value = stationary_profile(d, params, R, R, normalization) * (R / r_array) ** (d - 1)
    return float(value) if r_array.ndim == 0 else value


def transport_kernel(d: int, mu: float, r):
    """
    Transport kernel K(r) = exp(-mu r) / (S_d r^{d-1}), mu = gamma + n sigma.
    """
    check_dimension(d)
    r = np.asarray(r, dtype=float)
    value = np.exp(-mu * r) / (ball_surface(d) * r ** (d - 1))
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class KernelMoments:
    """
    Moments of the transport kernel.

    Attributes:
        zeroth (float): Full-space integral, 1 / mu.
        first (float): First moment along one axis, zero by symmetry.
        second (float): Diagonal second moment, 2 / (d mu^3).
        half_zeroth (float): Integral over a half-space through the origin, 1 / (2 mu).
        half_normal_first (float): Normal first moment over that half-space,
            -(V_{d-1} / S_d) / mu^2.
    """
    zeroth: float
    first: float
    second: float
    half_zeroth: float
    half_normal_first: float


def _angular_mean(function, d: int, upper: float = np.pi) -> float:
    # Mean over directions of function(theta), theta measured from a fixed axis, restricted to theta <= upper
    if d == 1:
        return 0.5 * sum(function(theta) for theta in (0.0, np.pi) if theta <= upper)
    weight = integrate.quad(lambda theta: np.sin(theta) ** (d - 2), 0, np.pi, epsabs=0, epsrel=1e-13)[0]
    value = integrate.quad(lambda theta: function(theta) * np.sin(theta) ** (d - 2), 0, upper,
                           epsabs=1e-15, epsrel=1e-13)[0]
    return value / weight


def _radial_moment(mu: float, power: int) -> float:
    # Integral over all directions of r^power K(r), i.e. int_0^inf r^power exp(-mu r) dr
    return integrate.quad(lambda r: r ** power * np.exp(-mu * r), 0, np.inf, epsabs=0, epsrel=1e-12)[0]


def kernel_moments(d: int, mu: float) -> KernelMoments:
    """
    Full-space and half-space moments of the transport kernel by numerical quadrature.

    Args:
        d (int): The dimension.
        mu (float): Attenuation gamma + n sigma, mu > 0.

    Returns:
        KernelMoments: The moments.
    """
    check_dimension(d)
    if not mu > 0:
        raise ValueError(f"Attenuation must be positive, got {mu}")
    m0, m1, m2 = (_radial_moment(mu, p) for p in (0, 1, 2))
    return KernelMoments(zeroth=m0,
                         first=m1 * _angular_mean(np.cos, d),
                         second=m2 * _angular_mean(lambda t: np.cos(t) ** 2, d),
                         half_zeroth=m0 * _angular_mean(lambda t: 1.0, d, upper=np.pi / 2),
                         half_normal_first=-m1 * _angular_mean(np.cos, d, upper=np.pi / 2))


@dataclass(eq=False)
class RadialDensity:
    """
    Radially symmetric solution of the diagonal Bethe-Salpeter equation.

    Attributes:
        edges (np.ndarray): Cell edges from 0 to R.
        r (np.ndarray): Cell midpoints, where the density is given.
        density (np.ndarray): rho at the midpoints.
        direct (np.ndarray): The unscattered term at the midpoints.
        sweeps (int): Neumann sweeps performed.
        residual (float): Last sweep update relative to max |rho|.
    """
    edges: np.ndarray
    r: np.ndarray
    density: np.ndarray
    direct: np.ndarray
    sweeps: int = 0
    residual: float = 0.0

    def at(self, r):
        """
        Density interpolated linearly between midpoints.
        """
        return np.interp(r, self.r, self.density)


def radial_mesh(R: float, cells: int = RADIAL_CELLS, stretch: float = MESH_STRETCH) -> np.ndarray:
    """
    Cell edges R (e^{s x} - 1) / (e^s - 1) for x uniform in [0, 1], refined near r = 0.
    """
    x = np.linspace(0, 1, cells + 1)
    return R * np.expm1(stretch * x) / np.expm1(stretch)


def _path_measure(mu: float, lo, hi):
    # int_lo^hi exp(-mu s) ds
    if mu == 0:
        return hi - lo
    return np.exp(-mu * lo) * -np.expm1(-mu * (hi - lo)) / mu


def _ball_path_integral(d: int, mu: float, r: float, rho: float, nodes: np.ndarray, weights: np.ndarray) -> float:
    """
    (1 / S_d) times the integral over directions Omega of int exp(-mu s) ds along the
    part of the ray r + s Omega (s >= 0) lying inside the ball of radius rho.
    """
    if rho <= 0:
        return 0.0
    if d == 1:
        total = 0.0
        for cos_theta in (1.0, -1.0):
            lo = max(0.0, -r * cos_theta - rho)
            hi = max(0.0, -r * cos_theta + rho)
            total += _path_measure(mu, lo, hi)
        return 0.5 * total
    factor = ball_surface(d - 1) / ball_surface(d)
    if rho >= r:
        theta = 0.5 * np.pi * (nodes + 1)
        jacobian = 0.5 * np.pi * weights
        cos_theta, sin_theta = np.cos(theta), np.sin(theta)
        q = np.sqrt(np.maximum(rho ** 2 - (r * sin_theta) ** 2, 0.0))
        lo = np.maximum(0.0, -r * cos_theta - q)
        hi = np.maximum(0.0, -r * cos_theta + q)
        return factor * float(np.sum(jacobian * sin_theta ** (d - 2) * _path_measure(mu, lo, hi)))
    # Only inward rays with sin(alpha) <= rho / r meet the ball, alpha = pi - theta.
    # alpha = alpha_max (1 - u^2) removes the square-root edge at alpha_max.
    alpha_max = math.asin(rho / r)
    u = 0.5 * (nodes + 1)
    alpha = alpha_max * (1 - u ** 2)
    jacobian = 0.5 * weights * 2 * alpha_max * u
    q = np.sqrt(np.maximum(rho ** 2 - (r * np.sin(alpha)) ** 2, 0.0))
    lo = r * np.cos(alpha) - q
    hi = r * np.cos(alpha) + q
    return factor * float(np.sum(jacobian * np.sin(alpha) ** (d - 2) * _path_measure(mu, lo, hi)))


def shell_weights(d: int, mu: float, edges: np.ndarray, targets: np.ndarray,
                  angular_nodes: int = ANGULAR_NODES) -> np.ndarray:
    """
    Matrix W_ij = int over the shell edges[j] < |r'| < edges[j+1] of K(|r_i - r'|) dr',
    with r_i = targets[i] on any axis.
    """
    nodes, weights = np.polynomial.legendre.leggauss(angular_nodes)
    ball = np.array([[_ball_path_integral(d, mu, r, rho, nodes, weights) for rho in edges] for r in targets])
    return np.diff(ball, axis=1)


def _shell_average_kernel(d: int, mu: float, edges: np.ndarray) -> np.ndarray:
    # Cell average of K(r|0): int_a^b exp(-mu r) dr / (V_d (b^d - a^d))
    mass = _path_measure(mu, edges[:-1], edges[1:])
    return mass / (ball_volume(d) * (edges[1:] ** d - edges[:-1] ** d))


def bethe_salpeter_radial(d: int, k0: float, n: float, sigma: float, R: float, gamma: float = 0.0,
                          r0: float = 0.0, cells: int = RADIAL_CELLS, source: str = 'point',
                          tolerance: float = NEUMANN_TOLERANCE,
                          max_sweeps: int = NEUMANN_MAX_SWEEPS) -> RadialDensity:
    """
    Solves rho = S + n sigma K * rho inside the ball by Neumann iteration on a radial mesh,
    K(r) = exp(-(gamma + n sigma) r) / (S_d r^{d-1}). The density is constant per cell;
    the shell integrals of K are taken by Gauss-Legendre quadrature over directions.

    Args:
        d (int): The dimension.
        k0 (float): The wavenumber the parameters were evaluated at (recorded only).
        n (float): Scatterer density, n >= 0.
        sigma (float): Cross section.
        R (float): The ball radius.
        gamma (float): Laplace variable, gamma >= 0.
        r0 (float): Source position; only the center is supported.
        cells (int): Number of radial cells.
        source (str): 'point' for S = K(r|0), 'uniform' for S = 1.
        tolerance (float): Stop when the sweep update is below tolerance * max |rho|.
        max_sweeps (int): Sweep limit.

    Returns:
        RadialDensity: The density at the cell midpoints.

    Raises:
        ConvergenceError: If the iteration has not converged after max_sweeps.
    """
    check_dimension(d)
    if gamma < 0 or n < 0 or sigma < 0:
        raise ValueError("gamma, n and sigma must be non-negative")
    if r0 != 0:
        raise DomainError("The radial solver only handles a source at the center")
    if source not in ('point', 'uniform'):
        raise ValueError(f"Unknown source: {source}")
    mu = gamma + n * sigma
    edges = radial_mesh(R, cells)
    r = 0.5 * (edges[:-1] + edges[1:])
    if source == 'point':
        direct = transport_kernel(d, mu, r)
        direct_cells = _shell_average_kernel(d, mu, edges)
    else:
        direct = np.ones_like(r)
        direct_cells = direct
    rate = n * sigma
    if rate == 0:
        return RadialDensity(edges=edges, r=r, density=direct, direct=direct)
    if not mu > 0:
        raise ValueError("Attenuation gamma + n sigma must be positive")
    operator = rate * shell_weights(d, mu, edges, r)
    first = operator @ direct_cells
    scattered = first.copy()
    residual = np.inf
    for sweep in range(1, max_sweeps + 1):
        updated = first + operator @ scattered
        scale = max(float(np.max(np.abs(direct + updated))), 1e-300)
        residual = float(np.max(np.abs(updated - scattered))) / scale
        scattered = updated
        if residual <= tolerance:
            logger.debug("Bethe-Salpeter converged in %d sweeps (d = %d, n sigma R = %.3g)", sweep, d, rate * R)
            return RadialDensity(edges=edges, r=r, density=direct + scattered, direct=direct, sweeps=sweep,
                                 residual=residual)
    raise ConvergenceError(f"Neumann iteration not converged after {max_sweeps} sweeps",
                           last_iterate=direct + scattered, residual=residual)


@dataclass
class DiffusionSpectrum:
    """
    Decay modes of the diffusion equation in the ball.

    Attributes:
        modes (list): (beta_n, gamma_n) pairs, beta increasing, gamma_n = -(lscat / d) beta_n^2.
        d (int): The dimension.
        R (float): The ball radius.
        lscat (float): The mean free path.
        R_eff (float): The exact effective radius.
        method (str): 'effective_radius' or 'robin'.
    """
    modes: list = field(default_factory=list)
    d: int = 3
    R: float = 1.0
    lscat: float = 0.0
    R_eff: float = 1.0
    method: str = 'effective_radius'

    @property
    def betas(self) -> np.ndarray:
        return np.array([beta for beta, _ in self.modes])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([gamma for _, gamma in self.modes])


def _robin_function(d: int, c_ell_over_R: float):
    def h(x):
        return (sph_bessel_gen(d, 0, 'j', x) + c_ell_over_R * x * sph_bessel_gen_derivative(d, 0, 'j', x)).real
    return h


def _robin_root(d: int, n: int, c_ell_over_R: float) -> float:
    nu0 = (d - 2) / 2
    lower = bessel_j_zero(nu0 + 1, n - 1) if n > 1 else 0.0
    upper = bessel_j_zero(nu0, n)
    h = _robin_function(d, c_ell_over_R)
    for attempt in range(2):
        if np.sign(h(lower)) != np.sign(h(upper)):
            return optimize.brentq(h, lower, upper, xtol=1e-14)
        width = upper - lower
        lower = max(0.0, lower - BRACKET_WIDENING * width)
        upper = upper + BRACKET_WIDENING * width
        logger.debug("Widening the Robin bracket of mode %d to [%g, %g]", n, lower, upper)
    raise ConvergenceError(f"No sign change bracketing diffusion mode {n}", last_iterate=(lower, upper))


def diffusion_modes(d: int, R: float, lscat: float, count: int, method: str = 'effective_radius') -> DiffusionSpectrum:
    """
    Decay modes rho_n(r) = j^{(d)}_0(beta_n r) of (lscat / d) lap(rho) = gamma rho in the
    ball, gamma_n = -(lscat / d) beta_n^2.

    'effective_radius' puts the node at the exact effective radius,
    beta_n = j_{(d-2)/2, n} / R_eff. 'robin' solves the Robin condition
    (2 V_{d-1} / S_d) lscat beta j'(beta R) + j(beta R) = 0 by Brent's method between
    consecutive zeros of j' and j.

    Args:
        d (int): The dimension.
        R (float): The ball radius.
        lscat (float): The mean free path.
        count (int): Number of modes, count >= 1.
        method (str): 'effective_radius' or 'robin'.

    Returns:
        DiffusionSpectrum: The modes.
    """
    if count < 1:
        raise ValueError(f"Mode count must be >= 1, got {count}")
    R_eff = effective_radius(d, R, lscat)
    nu0 = (d - 2) / 2
    if method == 'effective_radius':
        betas = [bessel_j_zero(nu0, n) / R_eff for n in range(1, count + 1)]
    elif method == 'robin':
        c_ell_over_R = boundary_ratio(d) * lscat / R
        betas = [_robin_root(d, n, c_ell_over_R) / R for n in range(1, count + 1)]
    else:
        raise ValueError(f"Unknown diffusion mode method: {method}")
    modes = [(beta, -lscat / d * beta ** 2) for beta in betas]
    return DiffusionSpectrum(modes=modes, d=d, R=R, lscat=lscat, R_eff=R_eff, method=method)


def band_depth(spectrum: DiffusionSpectrum, n: int = 1) -> float:
    """
    Depth Im k = gamma_n / 2 of the resonance band carried by diffusion mode n.
    """
    if not 1 <= n <= len(spectrum.modes):
        raise ValueError(f"Mode {n} not in the spectrum ({len(spectrum.modes)} modes)")
    return spectrum.modes[n - 1][1] / 2


def diffusion_time_profile(d: int, D: float, t: float, r):
    """
    Free-space diffusion kernel (4 pi D t)^{-d/2} exp(-r^2 / (4 D t)), whose mean squared
    displacement 2 d D t equals 2 lscat v t.
    """
    if not (D > 0 and t > 0):
        raise ValueError("D and t must be positive")
    r = np.asarray(r, dtype=float)
    value = (4 * np.pi * D * t) ** (-d / 2) * np.exp(-r ** 2 / (4 * D * t))
    return float(value) if value.ndim == 0 else value


def _segmented_quad(function, length: float, segments: int) -> float:
    total = 0.0
    for i in range(segments):
        result = integrate.quad(function, i * length, (i + 1) * length, limit=400, epsabs=0, epsrel=1e-10,
                                full_output=1)
        value, error = result[0], result[1]
        if len(result) > 3 and error > 1e-6 * max(abs(value), 1e-300):
            raise ConvergenceError(f"Quadrature failed on segment {i}: {result[3]}", last_iterate=value,
                                   residual=error)
        total += value
    return total


def coherence_moments(d: int, k0: float, lscat: float) -> tuple:
    """
    Radial integrals of |rho_inf(r)|^2 and r^2 |rho_inf(r)|^2 over all space, with
    rho_inf(r) = -Im G+(k0, r) exp(-r / (2 lscat)).

    Returns:
        tuple: (norm, second moment)
    """
    check_dimension(d)
    surface = ball_surface(d)

    def density(r):
        value = -green_free(d, GreenSign.PLUS, k0, r).imag * math.exp(-r / (2 * lscat))
        return surface * r ** (d - 1) * value * value

    norm = _segmented_quad(density, lscat, COHERENCE_SEGMENTS)
    second = _segmented_quad(lambda r: r * r * density(r), lscat, COHERENCE_SEGMENTS)
    return norm, second


def coherence_length(d: int, k0: float, lscat: float) -> float:
    """
    Coherence length sqrt(int r^2 |rho_inf|^2 / int |rho_inf|^2) of the averaged density
    matrix, tending to sqrt(2) lscat in the weak-scattering regime.

    Args:
        d (int): The dimension.
        k0 (float): The wavenumber.
        lscat (float): The mean free path, with k0 lscat >= 10.

    Returns:
        float: The coherence length.
    """
    if not (k0 > 0 and lscat > 0):
        raise ValueError("k0 and lscat must be positive")
    if k0 * lscat < WEAK_SCATTERING_MIN:
        raise DomainError(f"Coherence length requires weak scattering, k0 lscat = {k0 * lscat:.3g} < "
                          f"{WEAK_SCATTERING_MIN:g}")
    norm, second = coherence_moments(d, k0, lscat)
    return math.sqrt(second / norm)
