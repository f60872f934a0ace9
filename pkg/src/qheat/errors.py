"""Exception hierarchy.

Physics failures map to CLI exit code 1, usage failures to exit code 2.
"""


class QHeatError(Exception):
    pass


class PhysicsError(QHeatError):
    pass


class UsageError(QHeatError):
    pass


class InvalidConfig(PhysicsError):
    pass


class DegenerateBasis(PhysicsError):
    pass


class ZeroFrequency(PhysicsError):
    pass


class NoCoupling(PhysicsError):
    pass


class NonPhysicalInput(PhysicsError):
    pass


class StepFailure(PhysicsError):
    pass


class AmbiguousSteadyState(PhysicsError):
    pass


class NonConvergent(PhysicsError):
    pass


class IdleMode(PhysicsError):
    pass


class NoRoot(PhysicsError):
    pass


class SchemaError(UsageError):
    pass


class IoError(UsageError):
    pass


class OracleMismatch(PhysicsError):
    """Closed-form and definitional routes disagree beyond tolerance."""
