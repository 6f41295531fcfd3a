import logging

import numpy as np

from FoldyLaxPy.RunConfig import RunConfig
from FoldyLaxPy.SpecialFunctions import HankelZeroSet, hankel_zeros
from FoldyLaxPy.utils import write_csv

logger = logging.getLogger(__name__)


class SpecialFunctionTasks:
    def __init__(self, config: RunConfig):
        self.config = config

    def hankel_zeros(self) -> HankelZeroSet:
        """
        Seeds and refines the zeros of H+_nu (nu from the configuration) and writes one CSV
        row per zero: seed, refined zero and |H+_nu| there.

        Returns:
            HankelZeroSet: The zeros.

        Raises:
            DomainError: If H+_nu has no zeros on the lower arc.
            ConvergenceError: If a seed does not converge.
        """
        nu = self.config.nu
        logger.info("Hankel zeros of order %g", nu)
        zero_set = hankel_zeros(nu)
        seeds = np.array(zero_set.seeds, dtype=complex)
        refined = np.array(zero_set.refined, dtype=complex)
        columns = {
            'seed_re': seeds.real,
            'seed_im': seeds.imag,
            'zero_re': refined.real,
            'zero_im': refined.imag,
            'residual': np.array(zero_set.residuals),
        }
        write_csv(self.config.out, {**self.config.header(), 'zero_count': len(seeds)}, columns)
        return zero_set
