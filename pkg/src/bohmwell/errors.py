"""Exception hierarchy shared by all bohmwell modules."""


class BohmwellError(Exception):
    """Base class for every error raised by this package."""


class NumericsError(BohmwellError):
    pass


class NoSignChange(NumericsError):
    pass


class MaxIterations(NumericsError):
    pass


class StepUnderflow(NumericsError):
    pass


class DensityFloor(NumericsError):
    """Raised when |psi|^2 drops below the configured floor at an evaluation point."""

    def __init__(self, x: float, t: float, rho: float, floor: float):
        super().__init__(f"density {rho:.3e} below floor {floor:.1e} at x={x!r}, t={t!r}")
        self.x = x
        self.t = t
        self.rho = rho
        self.floor = floor


class DomainError(BohmwellError, ValueError):
    pass


class NoBoundMode(BohmwellError):
    pass


class DegenerateModes(BohmwellError):
    pass


class QuantileFailure(BohmwellError):
    pass


class BisectionFailure(BohmwellError):
    pass


class ClassMismatch(BohmwellError):
    pass


class ZeroFlux(BohmwellError):
    pass
