"""Exception hierarchy shared by every zscan module."""


class ZscanError(Exception):
    """Base class for all errors raised by zscan."""


class ConfigError(ZscanError, ValueError):
    pass


# rf-core ------------------------------------------------------------------

class NearOpenCircuit(ZscanError, ZeroDivisionError):
    """|1 - tau| is too small for the impedance to be bounded."""


class DegenerateLoad(ZscanError, ZeroDivisionError):
    """z == -z_ref, so the reflection coefficient is unbounded."""


class PassivityError(ZscanError, ValueError):
    pass


class TraceError(ZscanError, ValueError):
    """A SweepTrace violates its invariants."""


class TouchstoneError(ZscanError, ValueError):
    pass


class MalformedHeader(TouchstoneError):
    pass


class EmptySweep(MalformedHeader):
    pass


class NonMonotoneFrequencies(TouchstoneError):
    pass


class ArityError(TouchstoneError):
    pass


class UnsupportedFormat(TouchstoneError):
    pass


class GridMismatch(ZscanError, ValueError):
    pass


class UnknownLabel(ZscanError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DatasetFormatError(ZscanError, ValueError):
    pass


# cmos-model ---------------------------------------------------------------

class SubthresholdBias(ZscanError, ValueError):
    """Gate overdrive is not positive; the on-resistance is undefined."""


# freqselect ---------------------------------------------------------------

class ZeroVariance(ZscanError, ValueError):
    pass


class SingleClass(ZscanError, ValueError):
    pass


class EmptySelection(ZscanError, ValueError):
    pass


# features / classify ------------------------------------------------------

class WidthMismatch(ZscanError, ValueError):
    pass


class TooFewPerClass(ZscanError, ValueError):
    pass


class SingularCovariance(ZscanError, ArithmeticError):
    pass


class NonConvergence(ZscanError, RuntimeError):
    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class UnknownModelTag(ZscanError, ValueError):
    pass


# metrics ------------------------------------------------------------------

class EmptyTrueClass(ZscanError, ValueError):
    pass


class DegenerateConfusion(ZscanError, ValueError):
    pass
