"""Custom exception classes for the market solvers and commands."""


class MarketError(Exception):
    """Base class; carries a stable code and the CLI exit code it maps to."""

    exit_code = 1
    default_detail = "Assortment computation failed."
    default_code = "error"

    def __init__(self, detail=None, **context):
        self.detail = detail or self.default_detail
        self.context = context
        super().__init__(self.detail)

    def __str__(self) -> str:
        if not self.context:
            return self.detail
        extra = ", ".join(f"{key}={value}" for key, value in sorted(self.context.items()))
        return f"{self.detail} ({extra})"


class InvalidInstance(MarketError):
    """Exception raised when instance data violates its invariants."""

    exit_code = 2
    default_detail = "Invalid instance."
    default_code = "invalid_instance"


class MalformedInput(MarketError):
    """Exception raised when an input file cannot be parsed."""

    exit_code = 2
    default_detail = "Malformed input."
    default_code = "malformed_input"


class ProductIndexError(MarketError):
    """Exception raised when a product index is outside the universe."""

    exit_code = 2
    default_detail = "Product index out of range."
    default_code = "product_index"


class InfeasibleSalesVector(MarketError):
    """Exception raised when a sales vector cannot be realized under MNL."""

    exit_code = 2
    default_detail = "Sales vector violates the MNL validity constraints."
    default_code = "infeasible_sales"


class DimensionMismatch(MarketError):
    """Exception raised when LP data has inconsistent shapes."""

    exit_code = 2
    default_detail = "Linear program dimensions are inconsistent."
    default_code = "dimension_mismatch"


class InvalidParameter(MarketError):
    """Exception raised when a tuning parameter is out of range."""

    exit_code = 2
    default_detail = "Parameter out of range."
    default_code = "invalid_parameter"


class SizeLimitExceeded(MarketError):
    """Exception raised when an exhaustive routine is asked for too many products."""

    exit_code = 2
    default_detail = "Instance too large for exhaustive enumeration."
    default_code = "size_limit"


class InfeasibleConstraintFamily(MarketError):
    """Exception raised when no offered set satisfies the constraint family."""

    exit_code = 3
    default_detail = "No assortment satisfies the constraint family."
    default_code = "infeasible_family"


class OracleFailure(MarketError):
    """Exception raised when a constraint oracle fails on a candidate."""

    exit_code = 3
    default_detail = "Constraint oracle failed."
    default_code = "oracle_failure"


class BoundViolation(MarketError):
    """Exception raised when the randomization gap leaves its proven bounds."""

    exit_code = 4
    default_detail = "Randomization gap outside its bounds."
    default_code = "bound_violation"


class BisectionLimitExceeded(MarketError):
    """Exception raised when target calibration does not converge."""

    exit_code = 5
    default_detail = "Bisection did not reach the expected-sales band."
    default_code = "bisection_limit"


class ResolveInfeasible(MarketError):
    """Exception raised when the history-aware resolve LP has no solution."""

    exit_code = 5
    default_detail = "Resolving LP is infeasible."
    default_code = "resolve_infeasible"


class InventoryViolation(MarketError):
    """Exception raised when a simulated sale exceeds the remaining inventory."""

    exit_code = 5
    default_detail = "Sale recorded for a product without inventory."
    default_code = "inventory_violation"


class BalancingInvariantViolation(MarketError):
    """Exception raised when cumulative targets lose their balance."""

    exit_code = 5
    default_detail = "Cumulative purchase probabilities are not balanced."
    default_code = "balancing_invariant"


class ExperimentCellFailure(MarketError):
    """Exception raised when one or more experiment cells failed."""

    exit_code = 1
    default_detail = "Experiment cells failed."
    default_code = "cell_failure"


# Exception registry for programmatic access
EXCEPTION_REGISTRY: dict[str, type[MarketError]] = {
    cls.default_code: cls
    for cls in (
        InvalidInstance,
        MalformedInput,
        ProductIndexError,
        InfeasibleSalesVector,
        DimensionMismatch,
        InvalidParameter,
        SizeLimitExceeded,
        InfeasibleConstraintFamily,
        OracleFailure,
        BoundViolation,
        BisectionLimitExceeded,
        ResolveInfeasible,
        InventoryViolation,
        BalancingInvariantViolation,
        ExperimentCellFailure,
    )
}


def get_exception_class(code: str) -> type[MarketError] | None:
    """Return the MarketError subclass registered for the given error code."""
    return EXCEPTION_REGISTRY.get(code)
