"""Exception hierarchy shared by all modules."""


class YamabeLabError(ValueError):
    """Base class for every error raised by the package."""


class NondegeneracyError(YamabeLabError):
    pass


class GaugeError(YamabeLabError):
    pass


class WeightRangeError(YamabeLabError):
    pass


class GridError(YamabeLabError):
    pass


class SingularityError(YamabeLabError):
    pass


class PositivityError(YamabeLabError):
    pass


class BoundaryError(YamabeLabError):
    pass


class SymmetryError(YamabeLabError):
    pass


class DomainError(YamabeLabError):
    pass


class DiscriminantError(YamabeLabError):
    pass


class SupportError(YamabeLabError):
    pass


class DivergenceError(YamabeLabError):
    """Quadrature failed to settle under refinement."""


class BlowUpError(YamabeLabError):
    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class CriticalPointError(YamabeLabError):
    """No sign change (needs a wider domain) or more than one sign change."""

    def __init__(self, message, sign_changes=0):
        super().__init__(message)
        self.sign_changes = sign_changes


class StepFailure(YamabeLabError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
