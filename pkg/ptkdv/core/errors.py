# ptkdv/core/errors.py

from typing import Optional


class PtkdvError(Exception):
    """Base class for all toolkit errors."""
    exit_code = 2


class DomainError(PtkdvError):
    """Raised when an argument lies outside the domain of an operation."""
    exit_code = 2


class PoleError(DomainError):
    """Raised when an evaluation hits a pole or an excluded singular parameter."""
    exit_code = 2


class UsageError(PtkdvError):
    """Raised for invalid command-line parameters."""
    exit_code = 2


class TrajectoryError(PtkdvError):
    """Raised when a trajectory is malformed or too short for an operation."""
    exit_code = 2


class ConvergenceError(PtkdvError):
    """Raised when a series or quadrature fails to converge."""
    exit_code = 3


class DynamicsAbort(PtkdvError):
    """Base class for aborts during time evolution."""
    exit_code = 4

    def __init__(self, message: str, time: Optional[float] = None,
                 grid_index: Optional[int] = None, magnitude: Optional[float] = None):
        super().__init__(message)
        self.time = time
        self.grid_index = grid_index
        self.magnitude = magnitude

    def to_dict(self) -> dict:
        return {
            'reason': type(self).__name__,
            'message': str(self),
            'time': self.time,
            'grid_index': self.grid_index,
            'magnitude': self.magnitude,
        }


class SingularityError(DynamicsAbort):
    """Raised when |u_x| falls below the clamp threshold while a negative power is needed."""


class BlowUpError(DynamicsAbort):
    """Raised when the field magnitude exceeds the blow-up threshold."""


EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_DYNAMICS = 4


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the command exit-code contract."""
    if isinstance(exc, PtkdvError):
        return exc.exit_code
    if isinstance(exc, (ValueError, TypeError)):
        return EXIT_USAGE
    return EXIT_VERIFY_FAILED
