"""Exception hierarchy shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a generating function."""


class DegenerateModelError(ValueError):
    """Degree model with mean degree zero where an excess quantity is needed."""


class ValidationError(ValueError):
    """Invalid mask-ensemble parameters."""


class RankOneRequiredError(ValueError):
    """Operation needs an ensemble built from inward/outward efficiencies."""


class ConvergenceError(RuntimeError):
    """A fixed-point or eigenvalue iteration hit its iteration cap.

    ``residual`` is the last max-norm change and ``last_iterate`` the vector
    (or scalar) the iteration stopped at.
    """

    def __init__(self, message, residual=None, last_iterate=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.last_iterate = last_iterate
        self.iterations = iterations


class SimulationError(RuntimeError):
    """Inconsistent simulation inputs or an unsatisfiable seeding request."""


class ConfigError(ValueError):
    """Malformed experiment configuration."""
