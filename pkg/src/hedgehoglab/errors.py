"""Exception taxonomy.

Every failure mode carries a short machine-readable ``code`` so that batch
runs can map it to an exit-status family (config / precondition / numerical /
inconclusive) without string matching on messages.
"""


class HedgehogLabError(Exception):
    code = "error"
    exit_family = "numerical"

    def __init__(self, message="", **details):
        super().__init__(message or self.code)
        self.details = details


class ConfigError(HedgehogLabError):
    code = "bad-config"
    exit_family = "config"


class PreconditionError(HedgehogLabError):
    exit_family = "precondition"
    code = "precondition"


class NumericalError(HedgehogLabError):
    exit_family = "numerical"
    code = "numerical"


class InconclusiveError(HedgehogLabError):
    exit_family = "inconclusive"
    code = "inconclusive"


# arithmetic
class PrecisionExhausted(PreconditionError):
    """The stored precision of an angle cannot support the requested depth.

    Callers should rebuild the angle at higher working precision and retry.
    """
    code = "precision-exhausted"


class RationalAngle(PreconditionError):
    code = "rational-angle"


# germs
class NoFixedPointFound(NumericalError):
    code = "no-fixed-point-found"


class DegenerateDifferential(NumericalError):
    code = "degenerate-differential"


class NotSemiIndifferent(PreconditionError):
    code = "not-semi-indifferent"


class JetDegreeInsufficient(NumericalError):
    code = "jet-degree-insufficient"


class ResonanceViolation(NumericalError):
    code = "resonance-violation"


class IndexOutOfRange(PreconditionError):
    code = "index-out-of-range"


# cone fields
class GridTooCoarse(InconclusiveError):
    code = "grid-too-coarse"


class InverseUnavailable(PreconditionError):
    code = "inverse-unavailable"


# manifolds
class SmallDivisorBreakdown(NumericalError):
    code = "small-divisor-breakdown"


class ResidualToleranceUnmet(NumericalError):
    code = "residual-tolerance-unmet"


class OrbitEscapes(PreconditionError):
    code = "orbit-escapes"


# petals
class TrappingUnverifiable(NumericalError):
    code = "trapping-unverifiable"


class GraphTransformDivergence(NumericalError):
    code = "graph-transform-divergence"


class OrbitCapExceeded(InconclusiveError):
    code = "orbit-cap-exceeded"


class ComponentCountMismatch(NumericalError):
    code = "component-count-mismatch"


class AmbiguousTracking(NumericalError):
    code = "ambiguous-tracking"


# compact sets
class ChartMismatch(PreconditionError):
    code = "chart-mismatch"


# pipeline / cli
class StageError(HedgehogLabError):
    """Wraps a failure of one approximation stage with its stage index."""
    code = "stage-failure"

    def __init__(self, stage, cause):
        super().__init__(f"stage {stage}: {cause}", stage=stage)
        self.stage = stage
        self.cause = cause
        self.exit_family = getattr(cause, "exit_family", "numerical")


class MissingArtifact(ConfigError):
    code = "missing-artifact"


EXIT_CODES = {"ok": 0, "config": 2, "precondition": 3, "numerical": 4, "inconclusive": 5}
