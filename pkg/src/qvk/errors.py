"""Exception types raised across the toolkit."""


class QVKError(Exception):
    """Base class for all toolkit errors."""


class NotHermitian(QVKError, ValueError):
    pass


class NoConvergence(QVKError, RuntimeError):
    pass


class NotUnitary(QVKError, ValueError):
    pass


class TargetNotFixed(QVKError, ValueError):
    pass


class ZeroGap(QVKError, ValueError):
    pass


class NotConnectedSpanning(QVKError, ValueError):
    pass


class InfeasibleSpectrum(QVKError, ValueError):
    pass


class RangeUnsupported(QVKError, ValueError):
    pass


class DegenerateSeed(QVKError, ValueError):
    pass


class ProductUnitary(QVKError, ValueError):
    pass


class InsufficientSamples(QVKError, RuntimeError):
    pass


class InSE(QVKError, ValueError):
    """The unitary admits no entanglement-free identification set."""


class CasePreconditionViolated(QVKError, ValueError):
    pass


class ValidationFailed(QVKError, RuntimeError):
    pass


class SynthesisFailed(QVKError, RuntimeError):
    pass


class NotCPTP(QVKError, ValueError):
    pass


class ScenarioError(QVKError, ValueError):
    pass
