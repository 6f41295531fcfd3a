"""
Complex-argument special functions: Bessel and Hankel functions of real order, the
generalized spherical Bessel functions of dimension d, the Lambert W function, zeros of
J_nu and zeros of the outgoing Hankel function H+_nu in the lower half-plane.
"""
import logging
import math
import sys
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from FoldyLaxPy.FoldyLaxError import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

BESSEL_KINDS = ('J', 'Y', 'I', 'K', 'H+', 'H-')
SPHERICAL_KINDS = ('h+', 'h-', 'j')

HANKEL_MAX_ITERATIONS = 50
HANKEL_STEP_TOLERANCE = 1e-12
HANKEL_RESIDUAL_TOLERANCE = 1e-10
HANKEL_BASIN_RADIUS = 0.5
LAMBERT_TOLERANCE = 1e-12
ZERO_SCAN_STEP = 0.25

_SCIPY_BESSEL = {
    'J': special.jv,
    'Y': special.yv,
    'I': special.iv,
    'K': special.kv,
    'H+': special.hankel1,
    'H-': special.hankel2,
}


def bessel_order(d: int, ell: int) -> float:
    """
    Returns the Bessel order nu = ell + (d - 2)/2 attached to angular momentum ell in d dimensions.

    Args:
        d (int): The dimension, d >= 1.
        ell (int): The angular momentum, ell >= 0.

    Returns:
        float: The order nu >= -1/2.
    """
    if d < 1 or ell < 0:
        raise ValueError(f"Invalid (d, ell) = ({d}, {ell})")
    return ell + (d - 2) / 2


def _is_half_integer(nu: float) -> bool:
    return float(2 * nu).is_integer() and not float(nu).is_integer()


def gamma_complex(z: complex) -> complex:
    """
    Gamma function at a complex argument.

    Args:
        z (complex): The argument, not a nonpositive integer.

    Returns:
        complex: Gamma(z).

    Raises:
        DomainError: If z is a pole of the gamma function.
    """
    z = complex(z)
    if z.imag == 0 and z.real <= 0 and float(z.real).is_integer():
        raise DomainError(f"Gamma has a pole at z = {z.real:g}")
    return complex(special.gamma(z))


def _half_integer_sum(ell: int, z: complex, sign: int) -> complex:
    # sum_k (ell+k)! / (k! (ell-k)!) (sign i / 2z)^k
    total = 0j
    for k in range(ell + 1):
        coefficient = math.factorial(ell + k) // (math.factorial(k) * math.factorial(ell - k))
        total += coefficient * (sign * 1j / (2 * z)) ** k
    return total


def _half_integer_bessel(kind: str, nu: float, z: complex) -> complex:
    """
    Closed forms of the Bessel functions of half-integer order nu = ell + 1/2, ell >= 0,
    and of order -1/2.
    """
    if nu < 0:
        root = np.sqrt(2 / (np.pi * z))
        return {
            'J': root * np.cos(z),
            'Y': root * np.sin(z),
            'I': root * np.cosh(z),
            'K': np.sqrt(np.pi / (2 * z)) * np.exp(-z),
            'H+': root * np.exp(1j * z),
            'H-': root * np.exp(-1j * z),
        }[kind]
    ell = int(round(nu - 0.5))
    root = np.sqrt(2 * z / np.pi)
    if kind == 'H+':
        return root * (-1j) ** (ell + 1) * np.exp(1j * z) / z * _half_integer_sum(ell, z, 1)
    if kind == 'H-':
        return root * (1j) ** (ell + 1) * np.exp(-1j * z) / z * _half_integer_sum(ell, z, -1)
    if kind == 'K':
        total = 0j
        for k in range(ell + 1):
            coefficient = math.factorial(ell + k) // (math.factorial(k) * math.factorial(ell - k))
            total += coefficient / (2 * z) ** k
        return np.sqrt(np.pi / (2 * z)) * np.exp(-z) * total
    if kind == 'J':
        return root * special.spherical_jn(ell, z)
    if kind == 'Y':
        return root * special.spherical_yn(ell, z)
    return root * special.spherical_in(ell, z)


def _evaluate(kind: str, nu: float, z: complex) -> complex:
    if _is_half_integer(nu) and nu >= -0.5:
        return complex(_half_integer_bessel(kind, nu, z))
    return complex(_SCIPY_BESSEL[kind](nu, z))


def _saturate(value: complex) -> complex:
    big = sys.float_info.max
    return complex(np.nan_to_num(value.real, nan=big, posinf=big, neginf=-big),
                   np.nan_to_num(value.imag, nan=big, posinf=big, neginf=-big))


def bessel(kind: str, nu: float, z: complex, return_flag: bool = False):
    """
    Bessel function of the given kind, real order nu >= -1/2 and complex argument, on the
    principal branch. Half-integer orders use closed forms; other orders use the AMOS
    routines wrapped by scipy.special.

    Args:
        kind (str): One of 'J', 'Y', 'I', 'K', 'H+' (first Hankel), 'H-' (second Hankel).
        nu (float): The order.
        z (complex): The argument.
        return_flag (bool): Also return whether the value overflowed and was saturated.

    Returns:
        complex: The function value, or (value, overflowed) if return_flag is True.

    Raises:
        ValueError: If the kind is unknown or nu < -1/2.
        DomainError: If z = 0 for a kind singular at the origin.
    """
    if kind not in BESSEL_KINDS:
        raise ValueError(f"Unknown Bessel kind: {kind}")
    nu = float(nu)
    if nu < -0.5:
        raise ValueError(f"Bessel order must be >= -1/2, got {nu}")
    z = complex(z)
    if z == 0:
        if kind in ('Y', 'K', 'H+', 'H-') or nu < 0:
            raise DomainError(f"Bessel {kind}_{nu:g} is singular at z = 0")
        value = 1 + 0j if nu == 0 else 0j
    else:
        value = _evaluate(kind, nu, z)
    overflowed = not (math.isfinite(value.real) and math.isfinite(value.imag))
    if overflowed:
        logger.warning("Bessel %s_%g(%s) overflowed, value saturated", kind, nu, z)
        value = _saturate(value)
    if return_flag:
        return value, overflowed
    return value


def hankel_plus_continued(nu: float, z: complex) -> complex:
    """
    Outgoing Hankel function continued into the lower half-plane through the modified
    Bessel functions of the rotated argument e^{i pi/2} z:

        H+_nu(z) = (2/pi) i^{-nu-1} [i pi I_nu(e^{i pi/2} z) + e^{i pi nu} K_nu(e^{i pi/2} z)]

    Args:
        nu (float): The order.
        z (complex): The argument with arg z in [-pi, 0].

    Returns:
        complex: H+_nu(z).

    Raises:
        DomainError: If z lies in the open upper half-plane or at the origin.
    """
    z = complex(z)
    if z.imag > 0 or z == 0:
        raise DomainError(f"Continuation formula requires arg z in [-pi, 0], got z = {z}")
    w = 1j * z
    phase = np.exp(-0.5j * np.pi * (nu + 1))
    return complex(2 / np.pi * phase * (1j * np.pi * special.iv(nu, w)
                                        + np.exp(1j * np.pi * nu) * special.kv(nu, w)))


def _spherical_prefactor(d: int, z: complex) -> complex:
    nu0 = (d - 2) / 2
    return special.gamma(d / 2) * 2.0 ** nu0 * z ** (-nu0)


def sph_bessel_gen(d: int, ell: int, kind: str, z: complex) -> complex:
    """
    Generalized spherical Bessel functions of dimension d,

        h+-(z) = Gamma(d/2) (2/z)^{(d-2)/2} H+-_{ell+(d-2)/2}(z),    j = (h+ + h-)/2,

    normalized so that j^{(d)}_0(0) = 1 (j^{(3)}_0 = sin z / z, j^{(2)}_0 = J_0, j^{(1)}_0 = cos z).

    Args:
        d (int): The dimension, d >= 1.
        ell (int): The angular momentum, ell >= 0.
        kind (str): 'h+', 'h-' or 'j'.
        z (complex): The argument.

    Returns:
        complex: The function value.

    Raises:
        DomainError: If z = 0 for the Hankel kinds.
    """
    if kind not in SPHERICAL_KINDS:
        raise ValueError(f"Unknown spherical Bessel kind: {kind}")
    nu = bessel_order(d, ell)
    z = complex(z)
    if z == 0:
        if kind != 'j':
            raise DomainError(f"Spherical Hankel {kind} is singular at z = 0")
        return 1 + 0j if ell == 0 else 0j
    base = {'h+': 'H+', 'h-': 'H-', 'j': 'J'}[kind]
    return complex(_spherical_prefactor(d, z) * _evaluate(base, nu, z))


def sph_bessel_gen_derivative(d: int, ell: int, kind: str, z: complex) -> complex:
    """
    Derivative with respect to z of `sph_bessel_gen`, from the recurrence
    C'_nu = (nu/z) C_nu - C_{nu+1}:

        f'(z) = Gamma(d/2) (2/z)^{(d-2)/2} [(ell/z) C_nu(z) - C_{nu+1}(z)]
    """
    if kind not in SPHERICAL_KINDS:
        raise ValueError(f"Unknown spherical Bessel kind: {kind}")
    nu = bessel_order(d, ell)
    z = complex(z)
    if z == 0:
        if kind != 'j':
            raise DomainError(f"Spherical Hankel {kind} is singular at z = 0")
        return complex(1 / d) if ell == 1 else 0j
    base = {'h+': 'H+', 'h-': 'H-', 'j': 'J'}[kind]
    bracket = ell / z * _evaluate(base, nu, z) - _evaluate(base, nu + 1, z)
    return complex(_spherical_prefactor(d, z) * bracket)


def lambert_w(z: complex, branch: int = 0) -> complex:
    """
    Lambert W function on the given branch (Halley iteration inside scipy.special.lambertw),
    polished by one extra Halley step when the defining identity is not met.

    Args:
        z (complex): The argument.
        branch (int): The branch index, 0 for the principal branch.

    Returns:
        complex: W with W e^W = z.
    """
    z = complex(z)
    w = complex(special.lambertw(z, branch))
    if z == 0:
        return w
    residual = w * np.exp(w) - z
    if abs(residual) > LAMBERT_TOLERANCE * max(1.0, abs(z)):
        ew = np.exp(w)
        f = w * ew - z
        w = complex(w - f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2)))
    return w


def lambert_w0(z: complex) -> complex:
    """
    Principal branch of the Lambert W function, W(0) = 0.

    Args:
        z (complex): The argument.

    Returns:
        complex: W_0(z).
    """
    return lambert_w(z, 0)


def bessel_j_zero(nu: float, n: int) -> float:
    """
    n-th positive zero of J_nu. Integer orders use scipy.special.jn_zeros; other orders
    are bracketed by a monotone sign-change scan from x = nu (J_nu > 0 below its first zero)
    and polished with Brent's method.

    Args:
        nu (float): The order, nu >= -1/2.
        n (int): The zero index, n >= 1.

    Returns:
        float: j_{nu,n}.
    """
    if n < 1:
        raise ValueError(f"Zero index must be >= 1, got {n}")
    nu = float(nu)
    if nu < -0.5:
        raise ValueError(f"Bessel order must be >= -1/2, got {nu}")
    if nu.is_integer() and nu >= 0:
        return float(special.jn_zeros(int(nu), n)[n - 1])
    x = max(nu, 1e-6)
    value = special.jv(nu, x)
    found = 0
    while True:
        x_next = x + ZERO_SCAN_STEP
        value_next = special.jv(nu, x_next)
        if np.sign(value_next) != np.sign(value):
            found += 1
            if found == n:
                return float(optimize.brentq(lambda t: special.jv(nu, t), x, x_next, xtol=1e-15))
        x, value = x_next, value_next


@dataclass
class HankelZeroSet:
    """
    Zeros of H+_nu on the arc in the lower half-plane.

    Attributes:
        nu (float): The order.
        seeds (list): Lambert-W approximations of the zeros.
        refined (list): Newton-refined zeros, in the order of the seeds.
        residuals (list): |H+_nu| at each refined zero.
    """
    nu: float
    seeds: list = field(default_factory=list)
    refined: list = field(default_factory=list)
    residuals: list = field(default_factory=list)


def hankel_zero_count(nu: float) -> int:
    """
    Number of zeros of H+_nu on the lower arc, floor(nu + 1/4).
    """
    return int(math.floor(nu + 0.25))


def hankel_zero_seeds(nu: float) -> list:
    """
    Approximate zeros of H+_nu from the large-order asymptotics,

        z_n = -2 i nu sqrt(W_0(2 exp(2 i tau_n - 2)) / 2),
        tau_n = pi (nu + 1/2 + 2n) / (2 nu),   n = -floor(nu + 1/4), ..., -1,

    so that every tau_n lies in [-pi/2, pi/2].

    Args:
        nu (float): The order, nu > 0.

    Returns:
        list: floor(nu + 1/4) complex seeds.
    """
    if nu <= 0:
        raise DomainError(f"Hankel zero seeds require nu > 0, got {nu}")
    count = hankel_zero_count(nu)
    seeds = []
    for n in range(-count, 0):
        tau = np.pi * (nu + 0.5 + 2 * n) / (2 * nu)
        x = np.sqrt(lambert_w0(2 * np.exp(2j * tau - 2)) / 2)
        seeds.append(complex(-2j * nu * x))
    return seeds


def _hankel_plus_with_derivative(nu: float, z: complex) -> tuple:
    value = _evaluate('H+', nu, z)
    derivative = 0.5 * (_evaluate('H+', nu - 1, z) - _evaluate('H+', nu + 1, z))
    return value, derivative


def hankel_zero_refine(nu: float, seed: complex, max_iterations: int = HANKEL_MAX_ITERATIONS) -> complex:
    """
    Refines a zero of H+_nu by Newton's method with H+'_nu = (H+_{nu-1} - H+_{nu+1})/2.
    A seed is in the basin of its zero if the iteration stays within HANKEL_BASIN_RADIUS of it.
    The iterate is accepted when |H+_nu(z)| / max(1, |z H+'_nu(z)|) is below
    HANKEL_RESIDUAL_TOLERANCE; at high order the closed forms stall at a rounding floor
    well above zero, so the absolute residual is only reported.

    Args:
        nu (float): The order.
        seed (complex): The starting point, usually from hankel_zero_seeds.
        max_iterations (int): Newton iteration budget.

    Returns:
        complex: The refined zero.

    Raises:
        DomainError: If H+_nu has no zeros (nu = 1/2).
        ConvergenceError: If Newton does not converge or leaves the basin of the seed.
    """
    if _is_half_integer(nu) and abs(nu) < 1:
        raise DomainError(f"H+_{nu:g} is proportional to exp(iz) and has no zeros")
    seed = complex(seed)
    z = seed
    for iteration in range(max_iterations):
        value, derivative = _hankel_plus_with_derivative(nu, z)
        if value == 0:
            break
        if derivative == 0 or not np.isfinite(derivative):
            raise ConvergenceError(f"Vanishing Hankel derivative at z = {z}", last_iterate=z,
                                   residual=abs(value))
        step = value / derivative
        z = z - step
        if abs(step) <= HANKEL_STEP_TOLERANCE * max(1.0, abs(z)):
            break
    value, derivative = _hankel_plus_with_derivative(nu, z)
    relative = abs(value) / max(1.0, abs(z * derivative))
    if not relative < HANKEL_RESIDUAL_TOLERANCE:
        raise ConvergenceError(f"Newton did not converge for H+_{nu:g} from seed {seed}",
                               last_iterate=z, residual=abs(value))
    if abs(z - seed) >= HANKEL_BASIN_RADIUS:
        raise ConvergenceError(f"Newton left the basin of seed {seed} (reached {z})",
                               last_iterate=z, residual=abs(_evaluate('H+', nu, z)))
    logger.debug("H+_%g zero %s refined from seed %s in %d iterations", nu, z, seed, iteration + 1)
    return z


def hankel_zeros(nu: float) -> HankelZeroSet:
    """
    Seeds and refines all zeros of H+_nu on the lower arc.

    Args:
        nu (float): The order, nu > 0.

    Returns:
        HankelZeroSet: The seeds, refined zeros and residuals.
    """
    zero_set = HankelZeroSet(nu=nu, seeds=hankel_zero_seeds(nu))
    for seed in zero_set.seeds:
        z = hankel_zero_refine(nu, seed)
        zero_set.refined.append(z)
        zero_set.residuals.append(abs(_evaluate('H+', nu, z)))
    refined = np.array(zero_set.refined)
    for i in range(len(refined)):
        if np.any(np.abs(refined[i + 1:] - refined[i]) <= 0.1):
            logger.warning("Two seeds of H+_%g converged to the same zero %s", nu, refined[i])
    return zero_set
