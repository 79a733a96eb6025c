"""Exception hierarchy shared by every pipeline stage."""


class ShakeKeyError(Exception):
    """Base class for all errors raised by this package."""


class MalformedRow(ShakeKeyError, ValueError):
    pass


class NonUniformSampling(ShakeKeyError, ValueError):
    pass


class EmptyFile(ShakeKeyError, ValueError):
    pass


class InvalidConfig(ShakeKeyError, ValueError):
    pass


class InvalidTrace(ShakeKeyError, ValueError):
    pass


class NoBumpDetected(ShakeKeyError):
    pass


class InsufficientSamples(ShakeKeyError, ValueError):
    pass


class InvalidKernelSize(ShakeKeyError, ValueError):
    pass


class SignalTooShort(ShakeKeyError, ValueError):
    pass


class DegenerateSignal(ShakeKeyError, ValueError):
    """Variance too small for skewness, kurtosis or autocorrelation."""


class InvalidBounds(ShakeKeyError, ValueError):
    pass


class InsufficientData(ShakeKeyError, ValueError):
    pass


class OutOfRange(ShakeKeyError, ValueError):
    pass


class InvalidBitCount(ShakeKeyError, ValueError):
    pass


class LengthMismatch(ShakeKeyError, ValueError):
    pass


class InvalidFraction(ShakeKeyError, ValueError):
    pass


class InsufficientSubjects(ShakeKeyError, ValueError):
    pass


class EmptyMatrix(ShakeKeyError, ValueError):
    pass


class UndefinedF1(ShakeKeyError, ValueError):
    pass


class SessionNotFinished(ShakeKeyError, RuntimeError):
    pass


__all__ = [name for name, obj in list(globals().items()) if isinstance(obj, type) and issubclass(obj, ShakeKeyError)]
