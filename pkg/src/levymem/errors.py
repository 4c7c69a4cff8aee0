"""Exception types shared across the solver modules."""


class KernelDomainError(ValueError):
    """Kernel evaluated or constructed outside its domain (h = 0, s outside (0,1), ...)."""


class InadmissibleKernelError(ValueError):
    """Kernel fails the Levy integrability or symmetry requirements."""


class GridMismatchError(ValueError):
    """Grid functions or operators defined on different grids were combined."""


class PotentialError(ValueError):
    """Potential does not satisfy the structural assumption on the sampled range."""


class SolverError(RuntimeError):
    """A numerical solve failed. ``stage`` names the pipeline step that failed."""

    def __init__(self, message, stage="solver", diagnostics=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.diagnostics = diagnostics or {}


class PicardNonConvergence(SolverError):
    """Picard iteration hit ``max_iters``; ``report`` holds the residual history."""

    def __init__(self, message, report, solution=None):
        super().__init__(message, stage="picard")
        self.report = report
        self.solution = solution


class ConfigError(ValueError):
    """Invalid experiment configuration. ``key`` is the dotted path, ``line`` the YAML line."""

    def __init__(self, message, key=None, line=None):
        where = ""
        if key is not None:
            where = f"{key}: "
        if line is not None:
            where = f"line {line}: " + where
        super().__init__(where + message)
        self.key = key
        self.line = line


class BoundUnavailable(ValueError):
    """The Poincare constant cannot be formed (kernel carries no mass beyond diam(Omega))."""
