"""
Foldy-Lax solver. For N point scatterers at x_i the on-scatterer amplitudes solve M a = phi
with the multiple-scattering matrix

    M_ii = 1 / F(k),    M_ij = -G+(k, |x_i - x_j|),

and the wave function is psi(r) = phi(r) + sum_i a_i G+(k, |r - x_i|). Resonances are the
complex k where det M(k) = 0; the determinant is carried as a logarithm.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial import distance

from FoldyLaxPy.FoldyLaxError import DegenerateConfigurationError, DomainError, SingularMatrixError
from FoldyLaxPy.GreenFunctions import GreenSign, green_free
from FoldyLaxPy.PointField import Configuration
from FoldyLaxPy.Scattering import ScatteringModel, amplitude
from FoldyLaxPy.utils import parse_floats

logger = logging.getLogger(__name__)

EXCLUSION_RADIUS = 1e-3
NEAR_RESONANCE_RCOND = 1e-12
POINT_CHUNK = 4096


@dataclass(frozen=True)
class PlaneWave:
    """
    Incident plane wave exp(i k direction . r).

    Attributes:
        direction (tuple): Propagation direction, normalized on use.
    """
    direction: tuple

    def evaluate(self, k: complex, points: np.ndarray) -> np.ndarray:
        unit = np.asarray(self.direction, dtype=float)
        norm = np.linalg.norm(unit)
        if norm == 0:
            raise ValueError("Plane-wave direction must be non-zero")
        points = np.atleast_2d(points)
        if points.shape[1] != unit.size:
            raise ValueError(f"Plane-wave direction has {unit.size} components, points have {points.shape[1]}")
        return np.exp(1j * complex(k) * (points @ (unit / norm)))


@dataclass(frozen=True)
class PointSource:
    """
    Point source at r0 radiating G+(k, |r - r0|). Points within EXCLUSION_RADIUS of the
    source evaluate to NaN in d >= 2.

    Attributes:
        r0 (tuple): The source position.
    """
    r0: tuple

    def evaluate(self, k: complex, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        origin = np.asarray(self.r0, dtype=float)
        if points.shape[1] != origin.size:
            raise ValueError(f"Source has {origin.size} coordinates, points have {points.shape[1]}")
        d = origin.size
        r = np.linalg.norm(points - origin, axis=1)
        masked = (r < EXCLUSION_RADIUS) if d >= 2 else np.zeros(r.shape, dtype=bool)
        value = green_free(d, GreenSign.PLUS, k, np.where(masked, 1.0, r))
        return np.where(masked, np.nan, value)


def parse_source(text: str, d: int):
    """
    Parses a source flag, `plane:<d1,..,dd>`, `point:<x1,..,xd>`, or `point` / `plane`
    alone for a point source at the origin / a plane wave along the first axis.

    Args:
        text (str): The flag value.
        d (int): The dimension.

    Returns:
        PlaneWave | PointSource: The incident wave.
    """
    kind, _, argument = str(text).strip().lower().partition(':')
    if kind == 'plane':
        direction = parse_floats(argument, d) if argument else tuple(float(i == 0) for i in range(d))
        return PlaneWave(direction)
    if kind == 'point':
        return PointSource(parse_floats(argument, d) if argument else (0.0,) * d)
    raise ValueError(f"Unknown source: {text}, expected plane:<direction> or point:<position>")


@dataclass(eq=False)
class MSMatrix:
    """
    Multiple-scattering matrix M(k) of a configuration.

    Attributes:
        entries (np.ndarray): Dense complex symmetric N x N matrix.
        k (complex): The wavenumber.
        positions (np.ndarray): (N, d) scatterer positions the matrix was built from.
    """
    entries: np.ndarray
    k: complex
    positions: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(eq=False)
class Factorization:
    """
    LU factorization of M(k) with partial pivoting, reusable for several right-hand sides.

    Attributes:
        lu (np.ndarray): Packed LU factors, as returned by scipy.linalg.lu_factor.
        piv (np.ndarray): Pivot indices.
        logdet (complex): log|det M| + i arg det M, the argument accumulated over pivots.
        rcond (float): Reciprocal 1-norm condition number estimate.
    """
    lu: np.ndarray
    piv: np.ndarray
    logdet: complex
    rcond: float

    @property
    def singular(self) -> bool:
        return self.lu is not None and bool(np.any(np.diag(self.lu) == 0))

    @property
    def near_resonance(self) -> bool:
        return self.rcond < NEAR_RESONANCE_RCOND


@dataclass(frozen=True, eq=False)
class SolveResult:
    """
    Solution of M a = phi.

    Attributes:
        amplitudes (np.ndarray): The complex amplitudes a_i.
        logdet (complex): log det M(k).
        residual (float): ||M a - phi|| / ||phi||.
        near_resonance (bool): True if M(k) is ill-conditioned.
        condition (float): Estimated 1-norm condition number.
    """
    amplitudes: np.ndarray
    logdet: complex
    residual: float
    near_resonance: bool = False
    condition: float = 1.0


@dataclass(frozen=True)
class MapGridSpec:
    """
    Pixel grid of a field map. Pixel (j, i) sits at the center of its cell; in d >= 3 the
    map lies in the plane spanned by the first two axes.

    Attributes:
        nx (int): Number of pixels along x.
        ny (int): Number of pixels along y.
        window (tuple): (xmin, xmax, ymin, ymax).
    """
    nx: int
    ny: int
    window: tuple

    def __post_init__(self):
        xmin, xmax, ymin, ymax = self.window
        if self.nx < 1 or self.ny < 1 or not (xmax > xmin and ymax > ymin):
            raise ValueError(f"Invalid map grid {self.nx}x{self.ny} on {self.window}")

    def axes(self) -> tuple:
        xmin, xmax, ymin, ymax = self.window
        x = xmin + (np.arange(self.nx) + 0.5) * (xmax - xmin) / self.nx
        y = ymin + (np.arange(self.ny) + 0.5) * (ymax - ymin) / self.ny
        return x, y

    def points(self, d: int) -> np.ndarray:
        """
        Returns the (ny * nx, d) pixel positions in row-major order.
        """
        x, y = self.axes()
        xx, yy = np.meshgrid(x, y)
        points = np.zeros((self.nx * self.ny, d))
        points[:, 0] = xx.ravel()
        if d >= 2:
            points[:, 1] = yy.ravel()
        return points


class ScattererSystem:
    """
    A configuration together with its scattering model. Pair distances are computed once
    so that M(k) can be rebuilt cheaply at many wavenumbers.

    Args:
        config (Configuration): The scatterer positions.
        model (ScatteringModel): The single-scatterer model.

    Raises:
        DegenerateConfigurationError: If two scatterers coincide.
    """

    def __init__(self, config: Configuration, model: ScatteringModel):
        self.config = config
        self.model = model
        self.d = config.d
        self._upper = np.triu_indices(config.N, 1)
        self._distances = distance.pdist(config.positions) if config.N > 1 else np.zeros(0)
        if self._distances.size and self._distances.min() <= 0:
            flat = int(np.argmin(self._distances))
            pair = (int(self._upper[0][flat]), int(self._upper[1][flat]))
            raise DegenerateConfigurationError(f"Scatterers {pair[0]} and {pair[1]} coincide", pair=pair)

    def matrix(self, k) -> MSMatrix:
        """
        Builds M(k).
        """
        k = complex(k)
        n = self.config.N
        entries = np.empty((n, n), dtype=complex)
        if n:
            green = green_free(self.d, GreenSign.PLUS, k, self._distances)
            entries[self._upper] = -green
            entries[self._upper[1], self._upper[0]] = -green
            np.fill_diagonal(entries, 1 / amplitude(self.model, self.d, k))
        return MSMatrix(entries=entries, k=k, positions=self.config.positions)

    def log_det(self, k) -> complex:
        """
        log det M(k), see `factorize`.
        """
        return factorize(self.matrix(k)).logdet

    def log_abs_det(self, k) -> float:
        return self.log_det(k).real


def build_matrix(config: Configuration, model: ScatteringModel, k) -> MSMatrix:
    """
    Builds the multiple-scattering matrix M(k) of a configuration.

    Args:
        config (Configuration): The scatterer positions.
        model (ScatteringModel): The single-scatterer model.
        k (complex | ComplexK): The wavenumber.

    Returns:
        MSMatrix: The symmetric matrix with M_ii = 1/F(k) and M_ij = -G+(k, |x_i - x_j|).

    Raises:
        DegenerateConfigurationError: If two scatterers coincide.
    """
    return ScattererSystem(config, model).matrix(k)


def factorize(msmatrix: MSMatrix) -> Factorization:
    """
    LU-factorizes M(k) and accumulates log det M = sum log U_ii + i pi (number of row swaps).
    Never raises on singular matrices; the log-determinant is then -inf.

    Args:
        msmatrix (MSMatrix): The matrix.

    Returns:
        Factorization: The reusable factorization.
    """
    n = msmatrix.n
    if n == 0:
        return Factorization(lu=None, piv=None, logdet=0j, rcond=1.0)
    lu, piv = linalg.lu_factor(msmatrix.entries, check_finite=False)
    pivots = np.diag(lu)
    swaps = int(np.count_nonzero(piv != np.arange(n)))
    if np.any(pivots == 0):
        return Factorization(lu=lu, piv=piv, logdet=complex(-np.inf, 0.0), rcond=0.0)
    logdet = complex(np.sum(np.log(pivots)) + 1j * np.pi * swaps)
    gecon, = linalg.lapack.get_lapack_funcs(('gecon',), (lu,))
    rcond, _ = gecon(lu, np.linalg.norm(msmatrix.entries, 1))
    return Factorization(lu=lu, piv=piv, logdet=logdet, rcond=float(rcond))


def solve(msmatrix: MSMatrix, source, factorization: Factorization = None) -> SolveResult:
    """
    Solves M a = phi for the amplitudes.

    Args:
        msmatrix (MSMatrix): The matrix M(k).
        source (PlaneWave | PointSource | np.ndarray): The incident wave, or phi(x_i) directly.
        factorization (Factorization): A factorization of the same matrix to reuse.

    Returns:
        SolveResult: Amplitudes, log-determinant, residual and near-resonance flag.

    Raises:
        SingularMatrixError: If a pivot vanishes exactly.
        DomainError: If the incident wave is singular at a scatterer.
    """
    if factorization is None:
        factorization = factorize(msmatrix)
    if isinstance(source, np.ndarray):
        phi = source.astype(complex)
    else:
        phi = source.evaluate(msmatrix.k, msmatrix.positions) if msmatrix.n else np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(phi)):
        raise DomainError("The incident wave is singular at a scatterer position")
    if msmatrix.n == 0:
        return SolveResult(amplitudes=np.zeros(0, dtype=complex), logdet=0j, residual=0.0)
    if factorization.singular:
        raise SingularMatrixError(f"M(k) is exactly singular at k = {msmatrix.k}", k=msmatrix.k)
    amplitudes = linalg.lu_solve((factorization.lu, factorization.piv), phi, check_finite=False)
    scale = np.linalg.norm(phi)
    residual = float(np.linalg.norm(msmatrix.entries @ amplitudes - phi) / (scale if scale > 0 else 1.0))
    condition = 1 / factorization.rcond if factorization.rcond > 0 else np.inf
    if factorization.near_resonance:
        logger.warning("M(k) near resonance at k = %s, condition estimate %.3e", msmatrix.k, condition)
    return SolveResult(amplitudes=amplitudes, logdet=factorization.logdet, residual=residual,
                       near_resonance=factorization.near_resonance, condition=condition)


def _scattered_field(positions: np.ndarray, amplitudes: np.ndarray, k: complex, points: np.ndarray) -> tuple:
    d = points.shape[1]
    field = np.zeros(points.shape[0], dtype=complex)
    masked = np.zeros(points.shape[0], dtype=bool)
    if positions.shape[0] == 0:
        return field, masked
    for start in range(0, points.shape[0], POINT_CHUNK):
        block = slice(start, start + POINT_CHUNK)
        r = distance.cdist(points[block], positions)
        if d >= 2:
            near = r < EXCLUSION_RADIUS
            masked[block] = near.any(axis=1)
            r = np.where(near, 1.0, r)
        field[block] = green_free(d, GreenSign.PLUS, k, r) @ amplitudes
    return field, masked


def wavefunction(config: Configuration, result: SolveResult, source, k, r):
    """
    Evaluates psi(r) = phi(r) + sum_i a_i G+(k, |r - x_i|). Points closer than
    EXCLUSION_RADIUS to a scatterer (d >= 2) are masked with NaN.

    Args:
        config (Configuration): The configuration.
        result (SolveResult): The amplitudes solved for this source.
        source (PlaneWave | PointSource): The incident wave.
        k (complex | ComplexK): The wavenumber.
        r (np.ndarray): One point (d,) or several points (M, d).

    Returns:
        complex | np.ndarray: psi at the point(s).
    """
    k = complex(k)
    single = np.ndim(r) == 1
    points = np.atleast_2d(np.asarray(r, dtype=float))
    if points.shape[1] != config.d:
        raise ValueError(f"Points have {points.shape[1]} coordinates, configuration has {config.d}")
    scattered, masked = _scattered_field(config.positions, result.amplitudes, k, points)
    psi = source.evaluate(k, points) + scattered
    psi = np.where(masked, np.nan, psi)
    return complex(psi[0]) if single else psi


def full_green(config: Configuration, model: ScatteringModel, k, r, r0):
    """
    Full Green function g(r | r0) = G+(r - r0) + sum_ij G+(r, x_i) [M^-1]_ij G+(x_j, r0),
    obtained from one solve with the source vector G+(x_j, r0).

    Args:
        config (Configuration): The configuration.
        model (ScatteringModel): The single-scatterer model.
        k (complex | ComplexK): The wavenumber.
        r (np.ndarray): Observation point(s).
        r0 (np.ndarray): Source point.

    Returns:
        complex | np.ndarray: g(r | r0).
    """
    source = PointSource(tuple(np.asarray(r0, dtype=float)))
    result = solve(build_matrix(config, model, k), source)
    return wavefunction(config, result, source, k, r)


def intensity_grid(config: Configuration, model: ScatteringModel, k, source, grid: MapGridSpec,
                   threads: int = 1) -> np.ndarray:
    """
    Maps |psi|^2 on a pixel grid, solving once and evaluating row blocks in parallel.

    Args:
        config (Configuration): The configuration.
        model (ScatteringModel): The single-scatterer model.
        k (complex | ComplexK): The wavenumber.
        source (PlaneWave | PointSource): The incident wave.
        grid (MapGridSpec): The pixel grid.
        threads (int): Number of worker threads.

    Returns:
        np.ndarray: (ny, nx) intensities, NaN on masked pixels.
    """
    k = complex(k)
    result = solve(build_matrix(config, model, k), source)
    points = grid.points(config.d)
    rows = [points[j * grid.nx:(j + 1) * grid.nx] for j in range(grid.ny)]

    def _row(row_points):
        return np.abs(wavefunction(config, result, source, k, row_points)) ** 2

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        intensities = list(executor.map(_row, rows))
    return np.vstack(intensities)


def angular_fluctuation_scale(k: float, R: float) -> float:
    """
    Angular scale pi / (k R) of the speckle fluctuations of |psi|^2 outside a medium of radius R.
    """
    return np.pi / (k * R)
