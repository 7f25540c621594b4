"""Exception types shared across the package."""


class NumericalFailure(RuntimeError):
    """A numerical procedure (root bracketing, quadrature, shooting) failed."""


class ShootingError(NumericalFailure):
    """The shooting construction could not produce a critical pair.

    Raised when ``eps`` is above the validity threshold of the construction
    (the boundary layer does not fit, or the half-width equation has no
    bracketed root).
    """
