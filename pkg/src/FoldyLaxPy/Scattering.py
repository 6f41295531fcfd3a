"""
Single point scatterer: s-wave amplitude from the phase shift, cross sections, mean free
path, effective wavenumber of the disordered medium and its average Green function.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from FoldyLaxPy.FoldyLaxError import DomainError
from FoldyLaxPy.GreenFunctions import GreenSign, dos_free, dos_free_continued, green_free
from FoldyLaxPy.SpecialFunctions import bessel

logger = logging.getLogger(__name__)


class ScatteringModel:
    """
    Base class of the single-scatterer models, defined by cot delta(k) of the s-wave phase shift.
    """

    def cot_delta(self, d: int, k: complex) -> complex:
        raise NotImplementedError

    def cot_delta_derivative(self, d: int, k: complex) -> complex:
        """
        Derivative of cot delta with respect to k, by central differences unless overridden.
        """
        k = complex(k)
        h = 1e-6 * max(1.0, abs(k))
        return (self.cot_delta(d, k + h) - self.cot_delta(d, k - h)) / (2 * h)

    @property
    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class MaxPoint(ScatteringModel):
    """
    Point scatterer saturating the cross-section upper bound, cot delta = 0.
    """

    def cot_delta(self, d: int, k: complex) -> complex:
        return 0j

    def cot_delta_derivative(self, d: int, k: complex) -> complex:
        return 0j

    @property
    def label(self) -> str:
        return 'max'


@dataclass(frozen=True)
class HardSphere(ScatteringModel):
    """
    Impenetrable sphere of radius alpha seen through its s-wave only. The s-wave vanishes
    at r = alpha, giving cot delta(k) = Y_nu(k alpha) / J_nu(k alpha) with nu = (d-2)/2
    (delta = -k alpha in d = 3).

    Attributes:
        alpha (float): The sphere radius in units of varsigma.
    """
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"Hard-sphere radius must be positive, got {self.alpha}")

    def _order(self, d: int) -> float:
        return (d - 2) / 2

    def cot_delta(self, d: int, k: complex) -> complex:
        z = complex(k) * self.alpha
        j = bessel('J', self._order(d), z)
        if j == 0:
            raise DomainError(f"J_{self._order(d):g}(k alpha) vanishes at k = {k}")
        return bessel('Y', self._order(d), z) / j

    def cot_delta_derivative(self, d: int, k: complex) -> complex:
        # Wronskian J Y' - J' Y = 2 / (pi z)
        k = complex(k)
        j = bessel('J', self._order(d), k * self.alpha)
        return 2 / (np.pi * k * j ** 2)

    @property
    def label(self) -> str:
        return f"hardsphere:{self.alpha!r}"


@dataclass(frozen=True)
class CustomCotDelta(ScatteringModel):
    """
    User supplied phase shift, cot delta = function(k).

    Attributes:
        function (Callable): Maps a complex k to cot delta(k).
    """
    function: Callable

    def cot_delta(self, d: int, k: complex) -> complex:
        return complex(self.function(complex(k)))

    @property
    def label(self) -> str:
        return 'custom'


def parse_model(text: str) -> ScatteringModel:
    """
    Parses a model flag, `max` or `hardsphere:<alpha>`.

    Args:
        text (str): The flag value.

    Returns:
        ScatteringModel: The parsed model.

    Raises:
        ValueError: If the flag is not recognized.
    """
    text = str(text).strip().lower()
    if text in ('max', 'maxpoint'):
        return MaxPoint()
    name, _, argument = text.partition(':')
    if name == 'hardsphere' and argument:
        return HardSphere(float(argument))
    raise ValueError(f"Unknown scattering model: {text}, expected max or hardsphere:<alpha>")


def amplitude(model: ScatteringModel, d: int, k) -> complex:
    """
    Scattering amplitude F(k) = 1 / (pi N(k) (i - cot delta(k))), continued to complex k
    through N(k) proportional to k^{d-2}. For MaxPoint, F = 1 / (i pi N(k)).

    Args:
        model (ScatteringModel): The single-scatterer model.
        d (int): The dimension.
        k (complex | ComplexK): The wavenumber, k != 0.

    Returns:
        complex: F(k).

    Raises:
        DomainError: If k = 0.
    """
    k = complex(k)
    if k == 0:
        raise DomainError("The scattering amplitude diverges at k = 0")
    return 1 / (np.pi * dos_free_continued(d, k) * (1j - model.cot_delta(d, k)))


def amplitude_derivative(model: ScatteringModel, d: int, k) -> complex:
    """
    Derivative dF/dk = F (c' / (i - c) - (d - 2) / k) with c = cot delta.
    """
    k = complex(k)
    f = amplitude(model, d, k)
    c = model.cot_delta(d, k)
    return f * (model.cot_delta_derivative(d, k) / (1j - c) - (d - 2) / k)


def _real_wavenumber(k) -> float:
    k_real = complex(k).real
    if not k_real > 0:
        raise DomainError(f"Cross sections require Re k > 0, got {k}")
    return k_real


def cross_section(model: ScatteringModel, d: int, k) -> float:
    """
    Total cross section sigma = (pi / k) N(k) |F(k)|^2. A complex k is replaced by Re k.

    Args:
        model (ScatteringModel): The single-scatterer model.
        d (int): The dimension.
        k (float): The wavenumber.

    Returns:
        float: sigma in units of varsigma^{d-1}.
    """
    k_real = _real_wavenumber(k)
    return np.pi / k_real * dos_free(d, k_real) * abs(amplitude(model, d, k_real)) ** 2


def cross_section_max(d: int, k) -> float:
    """
    Upper bound of the cross section, 1 / (pi k N(k)), reached when cot delta = 0.
    """
    k_real = _real_wavenumber(k)
    return 1 / (np.pi * k_real * dos_free(d, k_real))


def mean_free_path(n: float, model: ScatteringModel, d: int, k) -> float:
    """
    Scattering mean free path 1 / (n sigma(k)).

    Args:
        n (float): Scatterer density, n > 0.
        model (ScatteringModel): The single-scatterer model.
        d (int): The dimension.
        k (float): The wavenumber.

    Returns:
        float: lscat in units of varsigma.
    """
    if not n > 0:
        raise ValueError(f"Density must be positive, got {n}")
    sigma = cross_section(model, d, k)
    if not sigma > 0:
        raise DomainError(f"Vanishing cross section at k = {k}")
    return 1 / (n * sigma)


def effective_wavenumber(n: float, model: ScatteringModel, d: int, k) -> complex:
    """
    Effective wavenumber kappa = sqrt(k^2 - n F(k)) of the average wave, on the root with
    Im kappa >= 0. A root landing exactly on the real axis is logged since the choice is
    then ambiguous. Without scatterers (n F = 0) kappa = k on either half-plane.

    Args:
        n (float): Scatterer density, n >= 0.
        model (ScatteringModel): The single-scatterer model.
        d (int): The dimension.
        k (complex | ComplexK): The wavenumber, k != 0.

    Returns:
        complex: kappa.
    """
    k = complex(k)
    if k == 0:
        raise DomainError("The effective wavenumber requires k != 0")
    if n < 0:
        raise ValueError(f"Density must be non-negative, got {n}")
    shift = n * amplitude(model, d, k) if n > 0 else 0j
    if shift == 0:
        return k
    kappa = complex(np.sqrt(k * k - shift))
    if kappa.imag < 0:
        kappa = -kappa
    elif kappa.imag == 0 and n > 0:
        logger.warning("Effective wavenumber %s on the real axis, principal root returned", kappa)
    return kappa


def average_green(d: int, n: float, model: ScatteringModel, k, r):
    """
    Configuration-averaged Green function of the effective medium, G+(kappa(k), r).
    """
    return green_free(d, GreenSign.PLUS, effective_wavenumber(n, model, d, k), r)


def collision_probability(varsigma: float, lscat: float) -> float:
    """
    Probability 1 - exp(-varsigma / lscat) to collide within one unit length.

    Args:
        varsigma (float): The unit length.
        lscat (float): The mean free path, possibly infinite.

    Returns:
        float: The collision probability.
    """
    if not (varsigma > 0 and lscat > 0):
        raise ValueError("Both lengths must be positive")
    return -math.expm1(-varsigma / lscat)


@dataclass(frozen=True)
class TransportParams:
    """
    Incoherent transport parameters of a medium at energy k0^2.

    Attributes:
        n (float): Scatterer density per varsigma^d.
        sigma (float): Cross section sigma(k0).
        v (float): Group velocity, 2 k0 with hbar = 2m = 1.
        lscat (float): Mean free path 1 / (n sigma).
        D (float): Diffusion coefficient v lscat / d.
        d (int): The dimension.
        k0 (float): The wavenumber.
    """
    n: float
    sigma: float
    v: float
    lscat: float
    D: float
    d: int
    k0: float


def transport_params(n: float, model: ScatteringModel, d: int, k0: float, v: float = None) -> TransportParams:
    """
    Builds the transport parameters at wavenumber k0 (velocity 2 k0 unless given).
    """
    sigma = cross_section(model, d, k0)
    lscat = mean_free_path(n, model, d, k0)
    velocity = 2 * float(k0) if v is None else float(v)
    return TransportParams(n=n, sigma=sigma, v=velocity, lscat=lscat, D=velocity * lscat / d, d=d,
                           k0=float(k0))
