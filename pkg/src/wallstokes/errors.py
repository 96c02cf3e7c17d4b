"""Exception types shared across the package."""


class CoincidentPoints(ValueError):
    """A target sits at exactly the same point as a source (or a periodic
    replica of a source) that carries a nonzero strength."""


class SourceBelowWall(ValueError):
    """A source or target lies strictly below the no-slip wall plane x3 = 0."""


class MissingOutputOrder(LookupError):
    """A combination formula needs a derivative order that was not evaluated."""


class NeutralityViolation(ValueError):
    """A partially periodic kernel sum carries a net force or a net monopole."""


class ModeMismatch(ValueError):
    """A periodicity error metric was requested in a non-periodic direction."""
