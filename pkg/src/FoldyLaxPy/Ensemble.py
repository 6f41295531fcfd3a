"""
Deterministic ensemble averaging over configuration indices and radial statistics.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from FoldyLaxPy.FoldyLaxError import EnsembleError

logger = logging.getLogger(__name__)

MIN_BINS = 8


def tree_sum(values: list):
    """
    Sums a list pairwise in index order: ((v0 + v1) + (v2 + v3)) + ... The association
    depends on the list length only.
    """
    if not values:
        raise ValueError("Nothing to sum")
    level = list(values)
    while len(level) > 1:
        paired = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            paired.append(level[-1])
        level = paired
    return level[0]


def map_configurations(num_configs: int, task, threads: int = 1) -> list:
    """
    Runs task(index) for index = 0..num_configs-1 on a thread pool.

    Args:
        num_configs (int): Number of configurations, >= 1.
        task (Callable): Maps a configuration index to a result.
        threads (int): Worker threads.

    Returns:
        list: The results in index order.

    Raises:
        EnsembleError: If a task fails; carries the failing index.
    """
    if num_configs < 1:
        raise ValueError(f"At least one configuration is required, got {num_configs}")

    def _guarded(index):
        try:
            return task(index)
        except Exception as e:
            raise EnsembleError(f"Configuration {index} failed: {type(e).__name__}: {e}", index=index) from e

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        results = list(executor.map(_guarded, range(num_configs)))
    logger.debug("Completed %d configurations on %d threads", num_configs, threads)
    return results


def run_ensemble(num_configs: int, task, threads: int = 1):
    """
    Configuration average of task(index) over indices 0..num_configs-1. The reduction is
    a pairwise sum in index order, so the mean is bitwise independent of `threads`.

    Args:
        num_configs (int): Number of configurations, >= 1.
        task (Callable): Maps a configuration index to a float or numpy array.
        threads (int): Worker threads.

    Returns:
        float | np.ndarray: The ensemble mean.
    """
    results = map_configurations(num_configs, task, threads)
    return tree_sum(results) / num_configs


@dataclass(eq=False)
class EnsembleStats:
    """
    Per-bin statistics of a radially sampled quantity.

    Attributes:
        edges (np.ndarray): Bin edges covering [0, r_max].
        mean (np.ndarray): Mean per bin.
        q1 (np.ndarray): First quartile per bin.
        q3 (np.ndarray): Third quartile per bin.
        count (np.ndarray): Number of samples per bin.
    """
    edges: np.ndarray
    mean: np.ndarray
    q1: np.ndarray
    q3: np.ndarray
    count: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def empty(self) -> np.ndarray:
        """
        Mask of the bins without samples, excluded from comparisons.
        """
        return self.count == 0

    def columns(self) -> dict:
        return {'r': self.centers, 'mean': self.mean, 'q1': self.q1, 'q3': self.q3, 'count': self.count}


def radial_bin(radii, values, bins: int, r_max: float = None) -> EnsembleStats:
    """
    Bins samples (radius, value) into `bins` equal-width bins over [0, r_max] and returns
    the mean and interquartile range of each bin. Empty bins carry NaN statistics.

    Args:
        radii (Sequence): Sample radii.
        values (Sequence): Sample values, same length. NaN samples are ignored.
        bins (int): Number of bins, >= 8.
        r_max (float): Upper edge; the largest radius by default.

    Returns:
        EnsembleStats: The binned statistics.
    """
    if bins < MIN_BINS:
        raise ValueError(f"At least {MIN_BINS} bins are required, got {bins}")
    radii = np.asarray(radii, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if radii.shape != values.shape:
        raise ValueError("Radii and values must have the same length")
    keep = np.isfinite(values) & np.isfinite(radii)
    radii, values = radii[keep], values[keep]
    if r_max is None:
        r_max = float(radii.max()) if len(radii) else 1.0
    edges = np.linspace(0, r_max, bins + 1)
    index = np.clip(np.digitize(radii, edges) - 1, 0, bins - 1)
    inside = radii <= r_max
    mean = np.full(bins, np.nan)
    q1 = np.full(bins, np.nan)
    q3 = np.full(bins, np.nan)
    count = np.zeros(bins, dtype=np.int64)
    for b in range(bins):
        sample = values[inside & (index == b)]
        count[b] = len(sample)
        if len(sample):
            mean[b] = sample.mean()
            q1[b], q3[b] = np.percentile(sample, [25, 75])
    if np.any(count == 0):
        logger.warning("%d of %d radial bins are empty", int(np.sum(count == 0)), bins)
    return EnsembleStats(edges=edges, mean=mean, q1=q1, q3=q3, count=count)
