"""Exception hierarchy shared by every module of the package."""


class HybridGTError(Exception):
    """Base class for all errors raised by hybridgt."""


class DimensionError(HybridGTError, ValueError):
    """Operand shapes do not agree."""


class NotPSDError(HybridGTError, ValueError):
    """A matrix expected to be positive (semi)definite is not."""


class NotOrthonormalError(HybridGTError, ValueError):
    """A set of vectors expected to be orthonormal is not."""


class ConvergenceError(HybridGTError, RuntimeError):
    """An iterative solver hit its iteration cap without converging."""


class PGMError(HybridGTError):
    """Base class for PGM decoding failures."""


class PGMFormatError(PGMError):
    """Malformed header or unsupported PNM variant."""


class PGMTruncatedError(PGMError):
    """Pixel payload shorter than the header announces."""


class PGMMaxvalError(PGMError):
    """maxval other than 255."""
