from .FoldyLaxError import (AtResonanceError, ContourError, ConvergenceError, DegenerateConfigurationError,
                            DomainError, EnsembleError, FoldyLaxError, SingularMatrixError)
from .PointField import Configuration, Medium
from .RunConfig import RunConfig
from .Simulation import Simulation
