class FoldyLaxError(Exception):
    """
    Base exception raised when a multiple-scattering computation fails.

    Attributes:
        message (str): The error message associated with the exception.
    """

    def __init__(self, message):
        self.message = message
        super().__init__(self.message)

    def __str__(self):
        return str(self.message)


class DomainError(FoldyLaxError, ValueError):
    """
    Raised when an argument lies outside the domain of a function (pole of the gamma
    function, r = 0 in d >= 2, k = 0, unsupported dimension...).
    """


class DegenerateConfigurationError(FoldyLaxError):
    """
    Raised when two scatterers of a configuration coincide.

    Attributes:
        pair (tuple): Indices of the first coincident pair found.
    """

    def __init__(self, message, pair=None):
        self.pair = pair
        super().__init__(message)


class SingularMatrixError(FoldyLaxError):
    """
    Raised when the multiple-scattering matrix has an exactly vanishing pivot.

    Attributes:
        k (complex): The wavenumber at which the factorization broke down.
    """

    def __init__(self, message, k=None):
        self.k = k
        super().__init__(message)


class ConvergenceError(FoldyLaxError):
    """
    Raised when an iterative scheme does not converge.

    Attributes:
        last_iterate: The last iterate reached before giving up.
        residual (float): The residual at the last iterate.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        self.last_iterate = last_iterate
        self.residual = residual
        super().__init__(message)


class ContourError(FoldyLaxError):
    """
    Raised when the argument principle cannot be applied on a contour (zero on the contour).
    """


class AtResonanceError(FoldyLaxError):
    """
    Raised when the effective-medium S-matrix is evaluated exactly on one of its poles.

    Attributes:
        k (complex): The wavenumber at which the denominator vanished.
    """

    def __init__(self, message, k=None):
        self.k = k
        super().__init__(message)


class EnsembleError(FoldyLaxError):
    """
    Raised when the task of one configuration of an ensemble fails.

    Attributes:
        index (int): The configuration index whose task failed.
    """

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)
