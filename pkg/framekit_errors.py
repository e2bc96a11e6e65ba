class FrameKitError(ValueError):
    """
    Base class for every error raised by the frame toolkit. Subclasses ValueError so callers that only care about bad
    input can keep catching ValueError.
    """


class InputError(FrameKitError):
    """Shape mismatch, non-finite entries or malformed input files."""


class SymmetryError(FrameKitError):
    """Matrix expected to be Hermitian is not, beyond tolerance."""


class NotAFrameError(FrameKitError):
    """Family does not span the ambient space (rank-deficient frame operator)."""


class ContractionError(FrameKitError):
    """Operator A violates ||I - A|| < 1."""


class InconsistentThetaError(FrameKitError):
    """Theta is not kernel-valued for the synthesis operator even after projection."""


class LatticeError(FrameKitError):
    """Gabor time or frequency step does not divide the signal length."""


class PreconditionError(FrameKitError):
    """A hypothesis of a perturbation result does not hold for the given pair."""


class StructureError(FrameKitError):
    """Operator does not commute with the Gabor time-frequency shifts."""


class GapHypothesisError(FrameKitError):
    """Restricted kernel projection is numerically singular."""
