"""
Monte Carlo solution of the linear Boltzmann equation for isotropic point scatterers:
walkers fly at speed v along straight segments of exponentially distributed length
(mean lscat), restart in an isotropic direction, and are absorbed when they leave the ball.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from FoldyLaxPy.FoldyLaxError import DomainError
from FoldyLaxPy.GreenFunctions import check_dimension
from FoldyLaxPy.utils import make_rng

logger = logging.getLogger(__name__)

WALKER_CHUNK = 8192
MIN_WALKERS = 1000
FIT_MIN_SURVIVORS = 100
FIT_DECADE = 10.0


def _isotropic_directions(rng: np.random.Generator, count: int, d: int) -> np.ndarray:
    directions = rng.standard_normal((count, d))
    norms = np.linalg.norm(directions, axis=1)
    while np.any(norms == 0):
        zero = norms == 0
        directions[zero] = rng.standard_normal((int(zero.sum()), d))
        norms = np.linalg.norm(directions, axis=1)
    return directions / norms[:, None]


class Walkers:
    """
    Positions, directions and clocks of a batch of walkers.
    """

    def __init__(self, rng: np.random.Generator, count: int, r0: np.ndarray):
        self.rng = rng
        self.position = np.tile(r0, (count, 1))
        self.direction = _isotropic_directions(rng, count, len(r0))
        self.time = np.zeros(count)
        self.exit_time = np.full(count, np.inf)
        self.active = np.ones(count, dtype=bool)

    def sample_steps(self, lscat: float, count: int) -> np.ndarray:
        if np.isinf(lscat):
            return np.full(count, np.inf)
        return self.rng.exponential(lscat, count)

    def scatter(self, mask: np.ndarray) -> None:
        self.direction[mask] = _isotropic_directions(self.rng, int(mask.sum()), self.direction.shape[1])


def _distance_to_sphere(position: np.ndarray, direction: np.ndarray, R: float) -> np.ndarray:
    # Positive root s of |p + s u| = R for p inside the ball
    b = np.einsum('ij,ij->i', position, direction)
    c = np.einsum('ij,ij->i', position, position) - R * R
    return -b + np.sqrt(np.maximum(b * b - c, 0.0))


@dataclass(eq=False)
class ChunkRecord:
    """
    Per-chunk sums, combined in chunk order.
    """
    squared_sum: np.ndarray
    alive: np.ndarray
    exit_times: np.ndarray
    final_radii: np.ndarray


def _run_chunk(d: int, R: float, lscat: float, v: float, r0: np.ndarray, count: int, t_grid: np.ndarray,
               seed: int, chunk: int) -> ChunkRecord:
    walkers = Walkers(make_rng(seed, chunk), count, r0)
    grid_size = len(t_grid)
    t_max = t_grid[-1]
    squared_sum = np.zeros(grid_size)
    alive = np.zeros(grid_size, dtype=np.int64)
    final_radii = []
    while np.any(walkers.active):
        index = np.flatnonzero(walkers.active)
        start = walkers.time[index]
        position = walkers.position[index]
        direction = walkers.direction[index]
        length = walkers.sample_steps(lscat, len(index))
        exits = np.zeros(len(index), dtype=bool)
        if R is not None:
            boundary = _distance_to_sphere(position, direction, R)
            exits = length >= boundary
            length = np.where(exits, boundary, length)
        end = start + length / v

        # Grid times t_g with start <= t_g < end, expanded to (walker, grid) pairs
        first = np.searchsorted(t_grid, start, side='left')
        last = np.searchsorted(t_grid, end, side='left')
        counts = last - first
        total = int(counts.sum())
        if total:
            owner = np.repeat(np.arange(len(index)), counts)
            offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
            grid_index = first[owner] + offsets
            flight = (t_grid[grid_index] - start[owner]) * v
            sampled = position[owner] + direction[owner] * flight[:, None]
            displacement = np.sum((sampled - r0) ** 2, axis=1)
            np.add.at(squared_sum, grid_index, displacement)
            np.add.at(alive, grid_index, 1)
            at_end = grid_index == grid_size - 1
            final_radii.append(np.linalg.norm(sampled[at_end], axis=1))

        finite = np.isfinite(length)
        moved = position.copy()
        moved[finite] += direction[finite] * length[finite, None]
        walkers.position[index] = moved
        walkers.time[index] = end
        walkers.exit_time[index[exits]] = end[exits]
        done = exits | ~np.isfinite(end) | (end > t_max)
        walkers.active[index[done]] = False
        walkers.scatter(np.isin(np.arange(count), index[~done]))
    radii = np.concatenate(final_radii) if final_radii else np.zeros(0)
    return ChunkRecord(squared_sum=squared_sum, alive=alive, exit_times=walkers.exit_time, final_radii=radii)


@dataclass(eq=False)
class WalkerEnsemble:
    """
    Records of a Monte Carlo run.

    Attributes:
        num_walkers (int): Number of walkers.
        seed (int): The 64-bit master seed.
        t_grid (np.ndarray): Recording times.
        survival (np.ndarray): Fraction of walkers still inside the medium at each time.
        msd (np.ndarray): Mean squared displacement from r0 of the surviving walkers, NaN
            once none survive.
        exit_times (np.ndarray): Absorption time of each walker, inf if it never left.
        final_radii (np.ndarray): Distances to the origin of the survivors at t_grid[-1].
        escape_rate (float): Exponential decay rate of the survival tail, NaN if the tail is
            too short to fit.
    """
    num_walkers: int
    seed: int
    t_grid: np.ndarray
    survival: np.ndarray
    msd: np.ndarray
    exit_times: np.ndarray
    final_radii: np.ndarray
    escape_rate: float = float('nan')

    def msd_slope(self, t_min: float) -> float:
        """
        Least-squares slope of the mean squared displacement for t >= t_min.
        """
        window = (self.t_grid >= t_min) & np.isfinite(self.msd)
        if window.sum() < 2:
            raise ValueError(f"Fewer than two recorded times after t = {t_min}")
        return float(np.polyfit(self.t_grid[window], self.msd[window], 1)[0])


def fit_escape_rate(t_grid: np.ndarray, survival: np.ndarray, num_walkers: int,
                    min_survivors: int = FIT_MIN_SURVIVORS) -> float:
    """
    Decay rate from a linear fit of log survival over the last decade of the curve that
    still counts at least `min_survivors` walkers.

    Returns:
        float: The escape rate, NaN with a warning if fewer than three points qualify.
    """
    counts = survival * num_walkers
    valid = np.flatnonzero(counts >= min_survivors)
    if len(valid) == 0:
        logger.warning("No recording time with %d surviving walkers", min_survivors)
        return float('nan')
    floor = survival[valid[-1]]
    window = valid[survival[valid] <= FIT_DECADE * floor]
    if len(window) < 3:
        logger.warning("Survival tail too short for an escape rate fit (%d points)", len(window))
        return float('nan')
    slope = np.polyfit(t_grid[window], np.log(survival[window]), 1)[0]
    return float(-slope)


def mc_boltzmann(d: int, R, lscat: float, v: float, r0, num_walkers: int, t_grid, seed: int,
                 threads: int = 1) -> WalkerEnsemble:
    """
    Event-driven walk of independent particles. Walkers are processed in fixed chunks whose
    random streams are derived from (seed, chunk index), so the result does not depend on
    the number of threads.

    Args:
        d (int): The dimension.
        R (float | None): Ball radius, None or inf for an infinite medium.
        lscat (float): Mean free path, inf for free flight.
        v (float): Speed.
        r0 (float | Sequence): Start point, a radius on the first axis or a d-vector.
        num_walkers (int): Number of walkers, at least 1000.
        t_grid (Sequence): Increasing recording times starting at t >= 0.
        seed (int): The master seed.
        threads (int): Worker threads.

    Returns:
        WalkerEnsemble: Survival, msd, exit times and the fitted escape rate.
    """
    check_dimension(d)
    if not lscat > 0:
        raise ValueError(f"Mean free path must be positive, got {lscat}")
    if not v > 0:
        raise ValueError(f"Speed must be positive, got {v}")
    if num_walkers < MIN_WALKERS:
        raise ValueError(f"At least {MIN_WALKERS} walkers are required, got {num_walkers}")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2 or np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be an increasing sequence of non-negative times")
    if R is not None and np.isinf(R):
        R = None
    start = np.zeros(d)
    if np.ndim(r0) == 0:
        start[0] = float(r0)
    else:
        start = np.asarray(r0, dtype=float)
        if start.shape != (d,):
            raise ValueError(f"Start point must have {d} coordinates")
    if R is not None and np.linalg.norm(start) >= R:
        raise DomainError(f"Start point {start} is not inside the ball of radius {R}")

    sizes = [min(WALKER_CHUNK, num_walkers - offset) for offset in range(0, num_walkers, WALKER_CHUNK)]

    def _one(chunk):
        return _run_chunk(d, R, lscat, v, start, sizes[chunk], t_grid, seed, chunk)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        records = list(executor.map(_one, range(len(sizes))))
    squared_sum = np.zeros(len(t_grid))
    alive = np.zeros(len(t_grid), dtype=np.int64)
    for record in records:
        squared_sum += record.squared_sum
        alive += record.alive
    exit_times = np.concatenate([record.exit_times for record in records])
    survival = np.array([np.count_nonzero(exit_times > t) for t in t_grid]) / num_walkers
    with np.errstate(invalid='ignore', divide='ignore'):
        msd = np.where(alive > 0, squared_sum / np.maximum(alive, 1), np.nan)
    ensemble = WalkerEnsemble(num_walkers=num_walkers, seed=seed, t_grid=t_grid, survival=survival, msd=msd,
                              exit_times=exit_times,
                              final_radii=np.concatenate([record.final_radii for record in records]))
    if R is not None:
        ensemble.escape_rate = fit_escape_rate(t_grid, survival, num_walkers)
    logger.debug("Walked %d particles in %d chunks, escape rate %.5g", num_walkers, len(sizes),
                 ensemble.escape_rate)
    return ensemble
