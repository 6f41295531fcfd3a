import logging

import numpy as np

from FoldyLaxPy.Ensemble import EnsembleStats, map_configurations, radial_bin
from FoldyLaxPy.GreenFunctions import dos_free
from FoldyLaxPy.MultipleScattering import (MapGridSpec, PointSource, build_matrix, intensity_grid, parse_source,
                                           solve, wavefunction)
from FoldyLaxPy.PointField import sample_configuration
from FoldyLaxPy.RunConfig import RunConfig
from FoldyLaxPy.Scattering import average_green, transport_params
from FoldyLaxPy.Transport import bethe_salpeter_radial, stationary_density_outside, stationary_profile
from FoldyLaxPy.utils import sibling_path, write_csv, write_pgm

logger = logging.getLogger(__name__)

PROFILE_SAMPLES_PER_BIN = 8
PROFILE_EXTENT = 1.5


class WaveTasks:
    def __init__(self, config: RunConfig):
        self.config = config

    def _window(self, R: float) -> tuple:
        if self.config.window is not None:
            return self.config.window
        half = 1.2 * R
        return (-half, half, -half, half)

    def wavefield(self) -> np.ndarray:
        """
        Maps |psi|^2 of configuration `config_index` on the pixel grid. Writes CSV rows
        (x, y, intensity) to `out` and, when `out` is a path, the P2 graymap next to it.

        Returns:
            np.ndarray: (ny, nx) intensities, NaN on masked pixels.
        """
        config = self.config
        medium = config.medium()
        nx, ny = config.grid
        grid = MapGridSpec(nx=nx, ny=ny, window=self._window(medium.R))
        source = parse_source(config.source, medium.d)
        logger.info("Wave field of configuration %d, k = %s, %dx%d pixels", config.config_index, config.k, nx, ny)
        configuration = sample_configuration(medium, config.config_index)
        intensity = intensity_grid(configuration, medium.model, config.k, source, grid, threads=config.threads)
        x, y = grid.axes()
        xx, yy = np.meshgrid(x, y)
        header = config.header()
        write_csv(config.out, header, {'x': xx.ravel(), 'y': yy.ravel(), 'intensity': intensity.ravel()})
        if config.out is not None:
            write_pgm(sibling_path(config.out, '.pgm'), intensity, header)
        return intensity

    def _profile_sample(self, medium, source, radii: np.ndarray, index: int) -> np.ndarray:
        k = self.config.k
        configuration = sample_configuration(medium, index)
        points = np.zeros((len(radii), medium.d))
        points[:, 0] = radii
        result = solve(build_matrix(configuration, medium.model, k), source)
        psi = wavefunction(configuration, result, source, k, points)
        if self.config.quantity == 'green':
            return psi.real
        return np.abs(psi) ** 2

    def radial_profile(self) -> EnsembleStats:
        """
        Ensemble statistics of Re g(r|0) (`quantity = green`) or |psi|^2 (`intensity`) along
        the positive first axis, over configurations 0..configs-1, binned up to 1.5 R.
        Theory columns: Re G+(kappa, r) for the Green function; |G+(kappa, r)|^2, the
        diffusion profile and the Bethe-Salpeter density for the intensity.

        Returns:
            EnsembleStats: The binned statistics.
        """
        config = self.config
        if config.quantity not in ('green', 'intensity'):
            raise ValueError(f"Unknown radial quantity: {config.quantity}, expected green or intensity")
        medium = config.medium()
        source = PointSource((0.0,) * medium.d) if config.quantity == 'green' else parse_source(config.source,
                                                                                                 medium.d)
        r_max = PROFILE_EXTENT * medium.R
        samples = config.bins * PROFILE_SAMPLES_PER_BIN
        radii = (np.arange(samples) + 0.5) * r_max / samples
        logger.info("Radial profile of %s over %d configurations", config.quantity, config.configs)
        values = map_configurations(config.configs, lambda index: self._profile_sample(medium, source, radii, index),
                                    threads=config.threads)
        stats = radial_bin(np.tile(radii, config.configs), np.concatenate(values), config.bins, r_max=r_max)

        r = stats.centers
        coherent = average_green(medium.d, medium.density, medium.model, config.k, r)
        columns = stats.columns()
        if config.quantity == 'green':
            columns['theory'] = coherent.real
        else:
            k0 = config.k.real
            params = transport_params(medium.density, medium.model, medium.d, k0)
            inside = r <= medium.R
            diffusion = np.empty(len(r))
            diffusion[inside] = stationary_profile(medium.d, params, medium.R, r[inside])
            diffusion[~inside] = stationary_density_outside(medium.d, params, medium.R, r[~inside])
            density = bethe_salpeter_radial(medium.d, k0, params.n, params.sigma, medium.R, gamma=config.gamma)
            wave_scale = np.pi * dos_free(medium.d, k0) / k0
            columns['coherent'] = np.abs(coherent) ** 2
            columns['diffusion'] = diffusion
            columns['bethe_salpeter'] = np.where(inside, wave_scale * density.at(r), np.nan)
        write_csv(config.out, config.header(), columns)
        return stats
