import logging

import numpy as np

from FoldyLaxPy.BoltzmannWalker import WalkerEnsemble, mc_boltzmann
from FoldyLaxPy.RunConfig import RunConfig
from FoldyLaxPy.Scattering import mean_free_path
from FoldyLaxPy.Transport import DiffusionSpectrum, band_depth, diffusion_modes
from FoldyLaxPy.utils import write_csv

logger = logging.getLogger(__name__)


class TransportTasks:
    def __init__(self, config: RunConfig):
        self.config = config

    def _mean_free_path(self) -> float:
        if self.config.lscat is not None:
            return self.config.lscat
        medium = self.config.medium()
        return mean_free_path(medium.density, medium.model, medium.d, self.config.k.real)

    def diffusion_modes(self) -> DiffusionSpectrum:
        """
        Diffusion decay modes of the ball and the resonance band depth of each, written as
        CSV rows (n, beta, gamma, band_depth). Only the fundamental mode is meant for
        comparison with resonance maps; the header says so.

        Returns:
            DiffusionSpectrum: The modes.
        """
        config = self.config
        lscat = self._mean_free_path()
        R = config.resolved_radius
        spectrum = diffusion_modes(config.dim, R, lscat, config.count)
        logger.info("Diffusion modes: R = %g, lscat = %g, R_eff = %g", R, lscat, spectrum.R_eff)
        header = {**config.header(), 'lscat_used': lscat, 'R_eff': spectrum.R_eff,
                  'note': 'modes n>=2 are reported without comparison to the resonance band'}
        write_csv(config.out, header, {
            'n': np.arange(1, config.count + 1),
            'beta': spectrum.betas,
            'gamma': spectrum.gammas,
            'band_depth': np.array([band_depth(spectrum, n) for n in range(1, config.count + 1)]),
        })
        return spectrum

    def boltzmann_mc(self) -> WalkerEnsemble:
        """
        Monte Carlo walkers started at the center, written as CSV rows (t, survival, msd).
        A radius of inf gives the infinite medium. The header records the fitted escape
        rate and, for a finite ball, the diffusion prediction |gamma_1| v.

        Returns:
            WalkerEnsemble: The walker records.
        """
        config = self.config
        lscat = self._mean_free_path()
        R = config.resolved_radius
        v = config.velocity if config.velocity is not None else 2 * config.k.real
        t_grid = np.linspace(0, config.t_max, config.t_points)
        logger.info("Boltzmann walk of %d walkers, lscat = %g, v = %g", config.walkers, lscat, v)
        ensemble = mc_boltzmann(config.dim, R, lscat, v, 0.0, config.walkers, t_grid, config.seed,
                                threads=config.threads)
        header = {**config.header(), 'lscat_used': lscat, 'velocity_used': v, 'escape_rate': ensemble.escape_rate}
        if np.isfinite(R):
            gamma_1 = diffusion_modes(config.dim, R, lscat, 1).modes[0][1]
            header['diffusion_rate'] = abs(gamma_1) * v
        write_csv(config.out, header, {'t': t_grid, 'survival': ensemble.survival, 'msd': ensemble.msd})
        return ensemble
