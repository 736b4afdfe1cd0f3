"""Exception hierarchy shared by all ghlab modules."""


class GHError(ValueError):
    """Base class for every error raised by ghlab."""


class ConfigError(GHError):
    pass


class ParseError(ConfigError):
    pass


class DuplicatePunctureError(ConfigError):
    def __init__(self, i, j):
        super().__init__(f"punctures {i} and {j} coincide")
        self.pair = (i, j)


class LengthMismatchError(ConfigError):
    pass


class InvalidParameterError(GHError):
    pass


class PunctureEvaluationError(GHError):
    """Evaluation requested at (or numerically on top of) a puncture."""

    def __init__(self, index, distance):
        super().__init__(f"point lies at distance {distance:.3e} from puncture {index}")
        self.index = index
        self.distance = distance


class StepTooLargeError(GHError):
    pass


class StringProximityError(GHError):
    """Point too close to the Dirac string of one monopole term."""

    def __init__(self, index, distance):
        super().__init__(f"point lies at distance {distance:.3e} from the gauge string of puncture {index}")
        self.index = index
        self.distance = distance


class NonUnitVectorError(GHError):
    pass


class ZeroVectorError(GHError):
    pass


class OriginPunctureError(GHError):
    pass


class ConvergenceError(GHError):
    """Zero moduli do not diverge, so no genus choice gives a convergent product."""


class ContourThroughZeroError(GHError):
    pass


class PoleError(GHError):
    pass


class ZeroFibreError(GHError):
    pass


class ZeroSeparationError(GHError):
    pass
