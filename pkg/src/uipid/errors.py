"""Exception types raised across the package."""


class UipidError(Exception):
    """Base class for all errors raised by uipid."""


class NegativeEntry(UipidError, ValueError):
    def __init__(self, index, value):
        self.index = tuple(int(i) for i in index)
        self.value = float(value)
        super().__init__(f"NegativeEntry at {self.index}: {self.value!r}")


class NotNormalized(UipidError, ValueError):
    def __init__(self, total):
        self.total = float(total)
        super().__init__(f"NotNormalized: entries sum to {self.total!r}")


class InvalidShape(UipidError, ValueError):
    pass


class IndexOutOfRange(UipidError, IndexError):
    pass


class NotInDeltaP(UipidError, ValueError):
    def __init__(self, deviation):
        self.deviation = float(deviation)
        super().__init__(f"NotInDeltaP: marginal deviation {self.deviation:.3e}")


class NotAllBinary(UipidError, ValueError):
    pass


class NotBinaryT(UipidError, ValueError):
    pass


class DimensionTooLarge(UipidError, ValueError):
    pass


class MaxIterationsExceeded(UipidError, RuntimeError):
    """Raised by the generic solver; ``report`` holds the best point found."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            f"MaxIterationsExceeded after {report.iterations} iterations "
            f"(best UI {report.ui_bits:.6g} bits)"
        )


class WitnessConstructionFailed(UipidError, RuntimeError):
    pass


class InconsistencyDetected(UipidError, AssertionError):
    def __init__(self, message, dump=None):
        self.dump = dump or {}
        super().__init__(message)


class DistributionFormatError(UipidError, ValueError):
    pass
