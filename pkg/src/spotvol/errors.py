"""Exception hierarchy shared by the estimators, simulators and the CLI."""


class SpotVolError(ValueError):
    """Base class for all errors raised by :mod:`spotvol`."""


class NonIntegrableKernelError(SpotVolError):
    """A kernel (or one of its moment integrals) does not integrate."""


class DegenerateWindowError(SpotVolError):
    """All kernel mass falls outside the observation window."""


class InsufficientDataError(SpotVolError):
    """The series is too short for the requested window."""


class GridMismatchError(SpotVolError):
    """Two volatility paths are not defined on the same grid."""


class RegimeError(SpotVolError):
    """Tuning parameters violate the asymptotic rate conditions (strict mode)."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(report.failures()) or "regime check failed")
