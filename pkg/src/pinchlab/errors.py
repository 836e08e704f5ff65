"""Exception types raised across pinchlab."""

from __future__ import annotations


class PinchlabError(Exception):
    """Base class for every error raised by this package."""


class SymmetryViolation(PinchlabError, ValueError):
    """A 4-index array fails one of the algebraic curvature symmetries."""

    def __init__(self, identity: str, index: tuple[int, ...], residual: float, context: str = ""):
        self.identity = identity
        self.index = tuple(int(i) for i in index)
        self.residual = float(residual)
        one_based = tuple(i + 1 for i in self.index)
        prefix = f"{context}: " if context else ""
        super().__init__(
            f"{prefix}{identity} violated at index {one_based} (1-based), residual {self.residual:.3e}"
        )


class DimensionMismatch(PinchlabError, ValueError):
    pass


class InvalidDimension(PinchlabError, ValueError):
    pass


class DegeneratePlane(PinchlabError, ValueError):
    pass


class FrameNotOrthonormal(PinchlabError, ValueError):
    pass


class FrameNotUnitary(PinchlabError, ValueError):
    pass


class MissingAmbientScalar(PinchlabError, ValueError):
    pass


class InputFormatError(PinchlabError, ValueError):
    """Malformed JSON input; the message carries file/line context when known."""


class ConvergenceFailure(PinchlabError, RuntimeError):
    """Local search hit its iteration cap. The best value found is still attached."""

    def __init__(self, message: str, certificate=None):
        super().__init__(message)
        self.certificate = certificate
