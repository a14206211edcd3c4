"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class G2FlowError(Exception):
    exit_code = 10


class InvalidInputError(G2FlowError, ValueError):
    exit_code = 11


class VanishingCurvatureError(G2FlowError):
    """k1 fell below the curvature threshold somewhere on the curve."""

    exit_code = 12


class NonUnitSpeedError(G2FlowError):
    exit_code = 13


class SingularDataError(G2FlowError):
    """A divisor (|phi1| or |phi2|) dropped below the floor."""

    exit_code = 14


class BlowUpError(G2FlowError):
    exit_code = 15


class DegenerateRotationError(G2FlowError):
    exit_code = 16
