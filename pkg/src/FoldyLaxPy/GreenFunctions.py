"""
Free-space Green functions of the Helmholtz operator in d dimensions at complex wavenumber,

    G+-(k, r) = -(1/2pi) (-+ik / 2pi r)^{(d-2)/2} K_{(d-2)/2}(-+ikr),

and the free density of states. G+ is the outgoing sheet; its branch cut lies on the
negative imaginary k axis (arg k = -pi/2) because K_nu is always evaluated at -ikr.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special

from FoldyLaxPy.FoldyLaxError import DomainError
from FoldyLaxPy.utils import ball_surface

logger = logging.getLogger(__name__)

SUPPORTED_DIMENSIONS = (1, 2, 3, 4)


class GreenSign(Enum):
    """
    Selects the Riemann sheet of the free Green function.
    """
    PLUS = 1
    MINUS = -1


@dataclass(frozen=True)
class ComplexK:
    """
    Complex wavenumber k = re + i im in units of 1/varsigma.

    Attributes:
        re (float): Real part.
        im (float): Imaginary part; gamma = 2 im is the associated decay rate.
    """
    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"Wavenumber must be finite, got ({self.re}, {self.im})")

    @classmethod
    def from_complex(cls, k: complex) -> 'ComplexK':
        k = complex(k)
        return cls(k.real, k.imag)

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    @property
    def gamma(self) -> float:
        return 2 * self.im

    def __complex__(self):
        return self.value


def check_dimension(d: int) -> None:
    """
    Raises DomainError unless d is one of the supported dimensions.
    """
    if d not in SUPPORTED_DIMENSIONS:
        raise DomainError(f"Dimension must be one of {SUPPORTED_DIMENSIONS}, got {d}")


def _sign_value(sign) -> int:
    if isinstance(sign, GreenSign):
        return sign.value
    if sign in (1, '+', 'plus'):
        return 1
    if sign in (-1, '-', 'minus'):
        return -1
    raise ValueError(f"Unknown Green function sign: {sign}")


def green_free(d: int, sign, k, r):
    """
    Free Green function G+-(k, r) at distance r. The closed forms e^{+-ikr}/(+-2ik) in d=1
    and -e^{+-ikr}/(4 pi r) in d=3 are used; even dimensions evaluate K_nu(-+ikr).

    Args:
        d (int): The dimension, 1 to 4.
        sign (GreenSign): PLUS for the outgoing sheet, MINUS for the incoming one.
        k (complex | ComplexK): The wavenumber, k != 0.
        r (float | np.ndarray): Distance(s), r > 0 (r >= 0 in d=1).

    Returns:
        complex | np.ndarray: The Green function, with the shape of r.

    Raises:
        DomainError: If k = 0, d is unsupported, or r = 0 with d >= 2.
    """
    check_dimension(d)
    s = _sign_value(sign)
    k = complex(k)
    if k == 0:
        raise DomainError("The free Green function diverges at k = 0")
    r_array = np.asarray(r, dtype=float)
    if np.any(r_array < 0):
        raise ValueError("Distances must be non-negative")
    if d >= 2 and np.any(r_array == 0):
        raise DomainError(f"The free Green function is singular at r = 0 in d = {d}")
    if d == 1:
        value = s * np.exp(s * 1j * k * r_array) / (2j * k)
    elif d == 3:
        value = -np.exp(s * 1j * k * r_array) / (4 * np.pi * r_array)
    else:
        nu = (d - 2) / 2
        value = (-1 / (2 * np.pi) * np.power(-s * 1j * k / (2 * np.pi * r_array), nu)
                 * special.kv(nu, -s * 1j * k * r_array))
    if r_array.ndim == 0:
        return complex(value)
    return value


def green_asym(d: int, sign, k, r):
    """
    Far-field form of the free Green function,

        G+-(k, r) ~ +-(1/2ik) (-+ik / 2pi r)^{(d-1)/2} e^{+-ikr},

    exact in d = 1 and d = 3.

    Args:
        d (int): The dimension.
        sign (GreenSign): The sheet.
        k (complex | ComplexK): The wavenumber.
        r (float | np.ndarray): Distance(s) with |k| r >= 1.

    Returns:
        complex | np.ndarray: The asymptotic Green function.
    """
    check_dimension(d)
    s = _sign_value(sign)
    k = complex(k)
    r_array = np.asarray(r, dtype=float)
    if k == 0 or np.any(abs(k) * r_array < 1):
        raise DomainError("The asymptotic Green function requires |k| r >= 1")
    value = (s / (2j * k) * np.power(-s * 1j * k / (2 * np.pi * r_array), (d - 1) / 2)
             * np.exp(s * 1j * k * r_array))
    if r_array.ndim == 0:
        return complex(value)
    return value


def dos_free(d: int, k) -> float:
    """
    Free density of states per unit volume and unit energy, S_d |k|^{d-2} / (2 (2pi)^d).

    Args:
        d (int): The dimension.
        k (float | complex): The wavenumber; complex values use the modulus |k|.

    Returns:
        float: N(|k|).
    """
    check_dimension(d)
    modulus = abs(complex(k))
    if modulus == 0:
        raise DomainError("The density of states requires k != 0")
    return ball_surface(d) * modulus ** (d - 2) / (2 * (2 * np.pi) ** d)


def dos_free_continued(d: int, k) -> complex:
    """
    Analytic continuation S_d k^{d-2} / (2 (2pi)^d) of the density of states to complex k.
    Integer powers only, so no branch cut is introduced.
    """
    check_dimension(d)
    k = complex(k)
    if k == 0:
        raise DomainError("The density of states requires k != 0")
    return ball_surface(d) * k ** (d - 2) / (2 * (2 * np.pi) ** d)
