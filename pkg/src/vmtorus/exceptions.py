"""Exception types raised by vmtorus."""


class VMTorusError(Exception):
    """Base class for all package errors."""


class DegenerateDirectionError(VMTorusError, ValueError):
    """Mean direction is unidentifiable (resultant length ~ 0)."""


class DegenerateCorrelationError(VMTorusError, ValueError):
    """Circular correlation has a zero denominator."""


class StrategyError(VMTorusError, ValueError):
    """Normalizing-constant strategy cannot be applied to the given parameters."""


class DegenerateSubsampleError(VMTorusError, ValueError):
    """Subsample cannot seed the iterative fit."""


class StepFailure(VMTorusError):
    """A single reweighting step could not produce valid parameters."""


class EstimationError(VMTorusError):
    """Estimation failed.

    Parameters
    ----------
    message : str
        Human readable cause.
    diagnostics : dict, optional
        Extra context (per-start causes, offending matrix, ...).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
