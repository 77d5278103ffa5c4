"""Exception hierarchy shared by the pipeline stages."""


class WaveLQError(Exception):
    """Base class for all errors raised by :mod:`wavelq`."""


class SchemaError(WaveLQError, ValueError):
    """A system description is malformed or misses a required field."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class WellPosednessError(WaveLQError):
    """The boundary matrix ``K`` is (numerically) singular."""


class IntegrationError(WaveLQError):
    """Non-finite values appeared while integrating a matrix ODE."""


class NotOptimizableError(WaveLQError):
    """The control Riccati iteration did not converge to a finite solution."""


class RiccatiFault(WaveLQError):
    """Numerical breakdown inside a Riccati iteration (loss of symmetry)."""


class InstabilityError(WaveLQError):
    """A simulated profile norm blew past the divergence guard."""


class GridMismatchError(WaveLQError, ValueError):
    """Two profiles or a profile and a transform live on different grids."""
