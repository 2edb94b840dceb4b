"""Exception types shared across the toolkit."""


class DactkError(Exception):
    """Base class for all recoverable toolkit errors."""


class FormatError(DactkError):
    """Raised when a codeword file is malformed or truncated."""


class AmbiguousCodeword(DactkError):
    """Raised when plain decoding hits an ambiguous symbol.

    Overlapped codewords (q > 0.5) generally need side information to
    resolve ambiguity; use the list decoder instead.
    """


class BudgetExceeded(DactkError):
    """Raised when the exhaustive tree search would exceed its path budget.

    The expected number of live paths grows exponentially with depth, so
    this is the normal outcome of asking for too deep a search rather
    than a bug.
    """

    def __init__(self, paths, level=None, levels=None):
        self.paths = paths
        self.level = level
        self.levels = levels
        where = f" at level {level}" if level is not None else ""
        super().__init__(f"path budget exceeded{where}: {paths} live paths")


class AllPathsEliminated(DactkError):
    """Raised when the list decoder prunes every candidate path.

    Only possible with crossover probability 0 and side information that
    contradicts every surviving path.
    """

    def __init__(self, depth=None):
        self.depth = depth
        where = f" at depth {depth}" if depth is not None else ""
        super().__init__(f"all decoding paths eliminated{where}")


class NonConvergence(DactkError):
    """Raised when the path-spectrum solver fails to reach its tolerance."""

    def __init__(self, iterations, residual, tol):
        self.iterations = iterations
        self.residual = residual
        self.tol = tol
        super().__init__(
            f"no convergence after {iterations} sweeps: "
            f"residual {residual:.3e} > tol {tol:.3e}"
        )
