"""Exception types raised across the package."""


class SweepError(Exception):
    """Base class for all package errors."""


class IterationLimit(SweepError):
    """An iterative projection did not reach its tolerance within ``max_iter``."""


class Unbounded(SweepError):
    """A supremum over a convex set is infinite."""


class UnsupportedPair(SweepError):
    """The Hausdorff distance is not available for this pair of set types."""


class OutOfDomain(SweepError):
    """A time lies outside the domain of a path or moving set."""


class InfeasibleStart(SweepError):
    """The initial point is farther than ``tol_feas`` from the initial set."""


class PrescriptionInfeasible(SweepError):
    """A fixed-target jump prescription lies outside the set it must land in."""


class MismatchedScenario(SweepError):
    """A trajectory does not belong to the scenario it is checked against."""


class InvalidReparam(SweepError):
    """A time change is not continuous, nondecreasing and surjective."""


class ScenarioError(SweepError, ValueError):
    """Malformed scenario input; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
