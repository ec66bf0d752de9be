"""Exception hierarchy shared by every rdqsim module."""

from __future__ import annotations


class RDQSimError(Exception):
    """Base class for all errors raised by rdqsim."""


class CapacityError(RDQSimError, ValueError):
    """Requested dense object would exceed the supported qubit count."""


class ShapeError(RDQSimError, ValueError):
    """Operands disagree on width or dimension."""


class InternalConsistencyError(RDQSimError, RuntimeError):
    """An invariant that construction should guarantee was violated."""


class ConservationError(RDQSimError, RuntimeError):
    """Probability is not conserved by the exact propagator."""


class ExtinctionError(RDQSimError, RuntimeError):
    """Post-selection weight fell below the extinction threshold.

    ``gate_index`` is the position of the failing post-selection within the
    circuit being run and ``pass_index`` the repetition it happened in;
    ``time`` is filled in by callers that know the simulated time at which
    the trajectory died.
    """

    def __init__(
        self,
        message: str,
        gate_index: int | None = None,
        pass_index: int = 0,
        time: float | None = None,
    ):
        super().__init__(message)
        self.gate_index = gate_index
        self.pass_index = pass_index
        self.time = time


class DecodeError(RDQSimError, ValueError):
    """Amplitudes cannot be decoded into a probability distribution."""


class ConfigError(RDQSimError, ValueError):
    """Experiment configuration is malformed; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
