"""Exception hierarchy shared across the toolkit."""


class GridshieldError(Exception):
    """Base class for all domain errors (CLI maps these to exit code 1)."""


class NetworkError(GridshieldError):
    """Bad network data: schema violations, unresolved references, invalid lookups."""


class ModelError(GridshieldError):
    """Inconsistent MILP construction (duplicate names, bad bounds, NaN coefficients)."""


class PlanError(GridshieldError):
    """An investment plan violates its structural invariants."""


class DimensionError(GridshieldError):
    """Scenario data does not match the network it is being combined with."""


class SolverError(GridshieldError):
    """Solver invocation, parsing, or post-solve verification failed."""


class SolutionParseError(SolverError):
    """A solver solution file could not be interpreted."""


class OracleError(GridshieldError):
    """Brute-force enumeration refused or failed."""


class ReportError(GridshieldError):
    """Cost recomputation disagreed with the solver or report inputs are unusable."""
