import logging

import numpy as np

from FoldyLaxPy.RunConfig import RunConfig
from FoldyLaxPy.Resonance import (KWindow, ResonanceMap, effective_resonances, resonance_density_map,
                                  resonance_residual)
from FoldyLaxPy.utils import sibling_path, write_csv, write_pgm

logger = logging.getLogger(__name__)


class ResonanceTasks:
    def __init__(self, config: RunConfig):
        self.config = config

    def resonance_map(self) -> ResonanceMap:
        """
        Configuration-averaged resonance density on the k window. Writes CSV rows
        (re, im, density) and, when `out` is a path, the P2 graymap next to it (row 0 at
        the lowest Im k). The header records the integrated zero count.

        Returns:
            ResonanceMap: The averaged map.
        """
        config = self.config
        medium = config.medium()
        nx, ny = config.grid
        window = KWindow(*config.k_window, nx=nx, ny=ny)
        logger.info("Resonance map of %d configurations on %dx%d nodes", config.configs, nx, ny)
        resonance_map = resonance_density_map(medium, window, config.configs, threads=config.threads)
        nodes = window.nodes()
        header = {**config.header(), 'zero_count': resonance_map.zero_count()}
        write_csv(config.out, header,
                  {'re': nodes.real.ravel(), 'im': nodes.imag.ravel(), 'density': resonance_map.density.ravel()})
        if config.out is not None:
            write_pgm(sibling_path(config.out, '.pgm'), resonance_map.density, header)
        return resonance_map

    def effective_resonances(self) -> list:
        """
        Effective-medium resonances for ell = 0..ell_max, written as CSV rows
        (ell, re, im, residual).

        Returns:
            list: (ell, k, residual) triples.
        """
        config = self.config
        medium = config.medium()
        rows = []
        for ell in range(config.ell_max + 1):
            roots = effective_resonances(medium.d, ell, medium)
            logger.info("ell = %d: %d effective-medium resonances", ell, len(roots))
            rows.extend((ell, k, resonance_residual(medium.d, ell, medium, k)) for k in roots)
        roots = np.array([k for _, k, _ in rows], dtype=complex)
        write_csv(config.out, config.header(), {
            'ell': np.array([ell for ell, _, _ in rows], dtype=np.int64),
            're': roots.real,
            'im': roots.imag,
            'residual': np.array([residual for _, _, residual in rows], dtype=float),
        })
        return rows
