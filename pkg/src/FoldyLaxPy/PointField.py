import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from FoldyLaxPy.GreenFunctions import check_dimension
from FoldyLaxPy.Scattering import MaxPoint, ScatteringModel
from FoldyLaxPy.utils import ball_volume, make_rng, write_csv

logger = logging.getLogger(__name__)

# log(sys.float_info.max)
_LOG_FLOAT_MAX = 709.78


@dataclass(frozen=True)
class Medium:
    """
    Disordered medium: N point scatterers uniformly distributed in a d-ball of radius R.

    Attributes:
        d (int): The dimension.
        N (int): The number of scatterers.
        R (float): The ball radius in units of varsigma.
        model (ScatteringModel): The single-scatterer model.
        master_seed (int): The 64-bit seed from which every configuration is derived.
    """
    d: int
    N: int
    R: float
    model: ScatteringModel = field(default_factory=MaxPoint)
    master_seed: int = 0

    def __post_init__(self):
        check_dimension(self.d)
        if self.N < 1:
            raise ValueError(f"A medium needs at least one scatterer, got N = {self.N}")
        if not self.R > 0:
            raise ValueError(f"Ball radius must be positive, got {self.R}")

    @classmethod
    def with_unit_density(cls, d: int, N: int, model: ScatteringModel = None, master_seed: int = 0) -> 'Medium':
        """
        Builds the medium whose unit length is varsigma = 1, i.e. V_d R^d = N.
        """
        return cls(d=d, N=N, R=radius_for_unit_density(d, N), model=model or MaxPoint(),
                   master_seed=master_seed)

    @property
    def volume(self) -> float:
        return ball_volume(self.d) * self.R ** self.d

    @property
    def density(self) -> float:
        """
        Mean scatterer density n = N / V.
        """
        return self.N / self.volume

    @property
    def unit_length(self) -> float:
        """
        Unit length varsigma = (V_d R^d / N)^{1/d}, the mean inter-scatterer spacing.
        """
        return (self.volume / self.N) ** (1 / self.d)


@dataclass(eq=False)
class Configuration:
    """
    One realization of the medium.

    Attributes:
        positions (np.ndarray): (N, d) scatterer positions.
        seed_index (int): The configuration index it was sampled from, -1 if built by hand.
    """
    positions: np.ndarray
    seed_index: int = -1

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 2:
            raise ValueError("Positions must be an (N, d) array")

    @property
    def N(self) -> int:
        return self.positions.shape[0]

    @property
    def d(self) -> int:
        return self.positions.shape[1]


def sample_configuration(medium: Medium, index: int) -> Configuration:
    """
    Draws configuration `index` of the medium: N independent points uniform in the d-ball,
    each an isotropic direction (normalized Gaussian vector) at radius R u^{1/d}, u uniform
    in [0, 1). The stream is seeded with SplitMix64(master_seed XOR index).

    Args:
        medium (Medium): The medium.
        index (int): The configuration index, index >= 0.

    Returns:
        Configuration: The sampled configuration.
    """
    rng = make_rng(medium.master_seed, index)
    directions = rng.standard_normal((medium.N, medium.d))
    norms = np.linalg.norm(directions, axis=1)
    while np.any(norms == 0):
        zero = norms == 0
        directions[zero] = rng.standard_normal((int(zero.sum()), medium.d))
        norms = np.linalg.norm(directions, axis=1)
    radii = medium.R * rng.random(medium.N) ** (1 / medium.d)
    return Configuration(positions=directions / norms[:, None] * radii[:, None], seed_index=index)


def radius_for_unit_density(d: int, N: int) -> float:
    """
    Ball radius R = (N / V_d)^{1/d} for which the unit length varsigma equals 1.

    Args:
        d (int): The dimension.
        N (int): The number of scatterers, N >= 1.

    Returns:
        float: R in units of varsigma.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return (N / ball_volume(d)) ** (1 / d)


def log_cycle_count(N: int, p: int) -> float:
    """
    Logarithm of the number of closed orbits through p distinct scatterers among N.
    """
    _check_cycle_length(N, p)
    if p == 2:
        return math.log(N * (N - 1) / 2)
    return math.lgamma(N + 1) - math.log(2 * p) - math.lgamma(N - p + 1)


def log_cycle_count_total(N: int) -> float:
    """
    Logarithm of the total number of closed orbits, sum over p of cycle_counts(N, p).
    """
    if N < 2:
        raise ValueError(f"N must be >= 2, got {N}")
    return float(special.logsumexp([log_cycle_count(N, p) for p in range(2, N + 1)]))


def _check_cycle_length(N: int, p: int) -> None:
    if not 2 <= p <= N:
        raise ValueError(f"Orbit length must satisfy 2 <= p <= N, got p = {p}, N = {N}")


def cycle_counts(N: int, p: int, log: bool = False):
    """
    Number of closed orbits visiting p distinct scatterers among N: N (N-1) / 2 for p = 2,
    N! / (2p (N-p)!) for p >= 3.

    Args:
        N (int): The number of scatterers.
        p (int): The orbit length, 2 <= p <= N.
        log (bool): Return the natural logarithm instead.

    Returns:
        int | float: The exact count, or its logarithm.
    """
    _check_cycle_length(N, p)
    if log:
        return log_cycle_count(N, p)
    if p == 2:
        return N * (N - 1) // 2
    return math.comb(N, p) * math.factorial(p - 1) // 2


def cycle_count_total(N: int, log: bool = False) -> float:
    """
    Total number of closed orbits, tending to (N-1)! e / 2 for large N. When the value
    exceeds the floating-point range its logarithm is returned instead, with a warning.

    Args:
        N (int): The number of scatterers, N >= 2.
        log (bool): Return the natural logarithm.

    Returns:
        float: The total count or its logarithm.
    """
    log_total = log_cycle_count_total(N)
    if log:
        return log_total
    if log_total > _LOG_FLOAT_MAX:
        logger.warning("Total orbit count for N = %d overflows, returning its logarithm", N)
        return log_total
    return float(sum(cycle_counts(N, p) for p in range(2, N + 1)))


def export_configuration(config: Configuration, destination) -> None:
    """
    Writes the positions as CSV rows `x1,...,xd`.

    Args:
        config (Configuration): The configuration.
        destination: A path, a text stream, or None for stdout.
    """
    columns = {f"x{i + 1}": config.positions[:, i] for i in range(config.d)}
    write_csv(destination, {'seed_index': config.seed_index, 'N': config.N, 'dim': config.d}, columns)
