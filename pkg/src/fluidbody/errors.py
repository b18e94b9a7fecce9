"""Exception classes shared across modules.

The CLI maps each class to an exit status, see ``cli.EXIT_CODES``.
"""


class FluidBodyError(Exception):
    pass


class GeometryError(FluidBodyError, ValueError):
    """Invalid shape descriptor or a placement outside the admissible set."""


class ClearanceError(GeometryError):
    """Body touches (or comes within the stop threshold of) the cavity wall."""


class CollisionError(FluidBodyError):
    """Raised when an integration halts because of a collision."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class SolverError(FluidBodyError):
    """Linear solve or time integration failure."""


class ConfigError(FluidBodyError, ValueError):
    pass
