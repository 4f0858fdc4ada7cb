"""Exception hierarchy shared across the package.

Two families matter for the CLI exit-code map: SymbolicError (exact-algebra
failures, exit 4) and NumericalError (grid/scan/simulation failures, exit 3).
ConfigError maps to exit 2.
"""


class KdvlabError(Exception):
    pass


class ConfigError(KdvlabError):
    """Invalid run configuration (bad flag combination, unstable dt, ...)."""


class SymbolicError(KdvlabError):
    pass


class NotExact(SymbolicError):
    """Input is not a total x-derivative (variational derivative nonzero)."""


class NormalizationFailed(SymbolicError):
    """No (c, sigma) rescaling reproduces the reference hierarchy form."""


class NumericalError(KdvlabError):
    pass


class PoleHit(NumericalError):
    """Multiplier denominator vanished at a sampled (xi, tau)."""


class DegenerateTau(NumericalError):
    """lambda - tau^(1/n) b_l = 0 for some root; kernel form breaks down."""


class GridTooCoarse(NumericalError):
    """Multiplier varies too fast between adjacent frequency samples."""


class BlowUp(NumericalError):
    """Solution magnitude exceeded the configured cap during time stepping."""


class Unresolved(NumericalError):
    """Spectral tail above threshold; the grid no longer resolves the field."""


class SeamContamination(NumericalError):
    """Weighted mass near the periodic seam invalidates the line proxy."""


class PropertyViolated(NumericalError):
    """A sampled point violates a certified weight property."""
