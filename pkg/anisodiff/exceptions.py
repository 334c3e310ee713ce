class AnisoDiffError(Exception):
    """ Base class for all anisodiff related exceptions. """

    def __str__(self):
        doc = ' '.join(self.__doc__.split())
        if self.args and self.args[0]:
            return '{0} {1}'.format(doc, self.args[0])

        return doc


class GridError(AnisoDiffError):
    """ Grid is degenerate or an index lies outside of it. """
    pass


class DimensionMismatchError(AnisoDiffError):
    """ Size of vector or operator does not match the grid. """
    pass


class OperatorSizeError(AnisoDiffError):
    """ Grid is too small for the boundary closure of the requested order, or
    the order is not supported.
    """
    pass


class DiffusivityError(AnisoDiffError):
    """ Diffusion coefficient is out of range. """
    pass


class PenaltyError(AnisoDiffError):
    """ Penalty parameters violate the stability conditions. """
    pass


class LeftDomainError(AnisoDiffError):
    """ Field line left the domain through a non-periodic boundary. """

    def __init__(self, message='', node=None):
        super(LeftDomainError, self).__init__(message)
        self.node = node


class ParallelMapError(AnisoDiffError):
    """ Stencil record of parallel map is not a convex combination of in-grid
    corners.
    """
    pass


class ConvergenceError(AnisoDiffError):
    """ Conjugate gradient did not reach the requested tolerance. """

    def __init__(self, message='', iterations=None, residual=None):
        super(ConvergenceError, self).__init__(message)
        self.iterations = iterations
        self.residual = residual


class NonFiniteError(AnisoDiffError):
    """ Solution contains NaN or infinite values. """
    pass


class AuditRefusedError(AnisoDiffError):
    """ Grid too large for a dense audit. """
    pass


class ConfigError(AnisoDiffError):
    """ Experiment configuration is invalid. """
    pass
