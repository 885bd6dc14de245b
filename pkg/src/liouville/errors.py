"""Exception hierarchy.

Configuration problems derive from :class:`ConfigError`, numerical failures from
:class:`SolverError`. The CLI maps the two families to different exit codes.
"""


class LiouvilleError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(LiouvilleError, ValueError):
    pass


class SolverError(LiouvilleError, RuntimeError):
    pass


# coefficient matrix validation
class NotSymmetric(ConfigError):
    pass


class NegativeEntry(ConfigError):
    pass


class Singular(ConfigError):
    pass


class Reducible(ConfigError):
    pass


class DimensionTooLarge(ConfigError):
    pass


# radial integration
class BlowupInFiniteRadius(SolverError):
    pass


class NoDecayBeforeTmax(SolverError):
    pass


class StepUnderflow(SolverError):
    pass


class NotConverged(SolverError):
    pass


class TailDominates(SolverError):
    pass


class OutOfRange(LiouvilleError, ValueError):
    pass


# shooting / inversion
class NoAdmissibleRoot(ConfigError):
    pass


class SingularJacobian(SolverError):
    pass


class MaxIterations(SolverError):
    pass


class SolveFailed(SolverError):
    pass


class InadmissiblePerturbedMatrix(ConfigError):
    pass


class DuplicateGridPoint(ConfigError):
    pass
