"""Dense statevector execution with deterministic post-selection.

Qubit ``q`` of an ``N``-qubit register is bit ``N - 1 - q`` of the basis
index, so the ancilla (the last qubit) is the least significant bit and the
system register with ancilla ``|0>`` is ``amplitudes[0::2]``.

:func:`apply_gate` is a small numpy reference implementation;
:func:`run_circuit` lowers a whole circuit to integer arrays and executes it
in a single compiled loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import ExtinctionError, ShapeError
from .synthesis import Circuit, Gate

EXTINCTION_THRESHOLD = 1e-14

_CODES = {"H": 0, "S": 1, "SDG": 2, "X": 3, "CNOT": 4, "RZ": 5, "CRX": 6, "POSTSEL": 7}
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass
class SimState:
    """Amplitudes over ``n_system + 1`` qubits plus cumulative success probability.

    The success probability is kept as a natural log; long non-unitary runs
    drive it far below the smallest positive double.
    """

    amplitudes: np.ndarray
    n_system: int
    log_success_prob: float = 0.0

    def __post_init__(self) -> None:
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << (self.n_system + 1),):
            raise ShapeError(
                f"expected {1 << (self.n_system + 1)} amplitudes for {self.n_system} "
                f"system qubits, got shape {self.amplitudes.shape}"
            )

    @classmethod
    def from_system(cls, system: np.ndarray, normalize: bool = True) -> "SimState":
        """Embed a system-register vector with the ancilla in ``|0>``."""
        system = np.asarray(system, dtype=complex)
        n_system = int(system.size).bit_length() - 1
        if system.ndim != 1 or 1 << n_system != system.size:
            raise ShapeError(f"system vector length {system.size} is not a power of two")
        amps = np.zeros(2 * system.size, dtype=complex)
        amps[0::2] = system
        if normalize:
            amps /= np.linalg.norm(amps)
        return cls(amps, n_system)

    @classmethod
    def basis(cls, n_system: int, index: int) -> "SimState":
        system = np.zeros(1 << n_system, dtype=complex)
        system[index] = 1.0
        return cls.from_system(system)

    @property
    def width(self) -> int:
        return self.n_system + 1

    @property
    def success_prob(self) -> float:
        return math.exp(self.log_success_prob)

    @property
    def system(self) -> np.ndarray:
        """View of the amplitudes with the ancilla in ``|0>``."""
        return self.amplitudes[0::2]

    def copy(self) -> "SimState":
        return SimState(self.amplitudes.copy(), self.n_system, self.log_success_prob)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def dump(self) -> str:
        """One ``index re im`` line per amplitude."""
        return "".join(
            f"{i} {float(a.real)!r} {float(a.imag)!r}\n" for i, a in enumerate(self.amplitudes)
        )


def gate_matrix(gate: Gate) -> np.ndarray:
    """2x2 or 4x4 matrix of a unitary gate (control first for two-qubit kinds)."""
    k = gate.kind
    if k == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) * _INV_SQRT2
    if k == "S":
        return np.diag([1, 1j])
    if k == "SDG":
        return np.diag([1, -1j])
    if k == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k == "RZ":
        return np.diag([np.exp(-0.5j * gate.angle), np.exp(0.5j * gate.angle)])
    if k == "CNOT":
        u = np.eye(4, dtype=complex)
        u[2:, 2:] = [[0, 1], [1, 0]]
        return u
    if k == "CRX":
        c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
        u = np.eye(4, dtype=complex)
        u[2:, 2:] = [[c, -1j * s], [-1j * s, c]]
        return u
    raise ValueError(f"{k} has no unitary matrix")


def _check_targets(gate: Gate, width: int) -> None:
    if any(q < 0 or q >= width for q in gate.targets):
        raise ShapeError(f"{gate.to_line()} addresses a qubit outside 0..{width - 1}")


def apply_gate(state: SimState, gate: Gate) -> SimState:
    """Return a new state with ``gate`` applied."""
    n = state.width
    _check_targets(gate, n)
    tensor = state.amplitudes.reshape((2,) * n)
    log_success = state.log_success_prob
    if gate.kind == "POSTSEL":
        q = gate.targets[0]
        kept = np.take(tensor, 0, axis=q)
        p = float(np.vdot(kept, kept).real)
        if p < EXTINCTION_THRESHOLD:
            raise ExtinctionError(f"post-selection weight {p:.3e} below threshold", gate_index=0)
        out = np.zeros_like(tensor)
        index = [slice(None)] * n
        index[q] = 0
        out[tuple(index)] = kept / math.sqrt(p)
        log_success += math.log(p)
    else:
        qubits = list(gate.targets)
        k = len(qubits)
        u = gate_matrix(gate).reshape((2,) * (2 * k))
        moved = np.tensordot(u, tensor, axes=(list(range(k, 2 * k)), qubits))
        out = np.moveaxis(moved, list(range(k)), qubits)
    return SimState(np.ascontiguousarray(out).reshape(-1), state.n_system, log_success)


@dataclass(frozen=True)
class CompiledCircuit:
    """A circuit lowered to flat arrays for the compiled executor."""

    n_system: int
    kinds: np.ndarray = field(repr=False)
    mask0: np.ndarray = field(repr=False)
    mask1: np.ndarray = field(repr=False)
    angles: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.kinds)


def compile_circuit(circuit: Circuit) -> CompiledCircuit:
    n = circuit.width
    size = len(circuit.gates)
    kinds = np.empty(size, dtype=np.int64)
    mask0 = np.zeros(size, dtype=np.int64)
    mask1 = np.zeros(size, dtype=np.int64)
    angles = np.zeros(size, dtype=np.float64)
    for i, g in enumerate(circuit.gates):
        kinds[i] = _CODES[g.kind]
        mask0[i] = 1 << (n - 1 - g.targets[0])
        if len(g.targets) == 2:
            mask1[i] = 1 << (n - 1 - g.targets[1])
        if g.angle is not None:
            angles[i] = g.angle
    return CompiledCircuit(circuit.n_system, kinds, mask0, mask1, angles)


@numba.njit(cache=True)
def _execute(amps, kinds, mask0, mask1, angles, repeat, normalize, threshold):
    """Run the lowered gate list ``repeat`` times in place.

    Returns ``(failed_at, log_success)``; ``failed_at`` is -1 on success or the
    flat gate position (``pass * len + index``) of a failed post-selection.
    """
    dim = amps.shape[0]
    n_gates = kinds.shape[0]
    log_success = 0.0
    h = 0.7071067811865476
    for rep in range(repeat):
        for g in range(n_gates):
            kind = kinds[g]
            m = mask0[g]
            if kind == 0:
                for i in range(dim):
                    if i & m == 0:
                        a = amps[i]
                        b = amps[i | m]
                        amps[i] = h * (a + b)
                        amps[i | m] = h * (a - b)
            elif kind == 1:
                for i in range(dim):
                    if i & m:
                        amps[i] = 1j * amps[i]
            elif kind == 2:
                for i in range(dim):
                    if i & m:
                        amps[i] = -1j * amps[i]
            elif kind == 3:
                for i in range(dim):
                    if i & m == 0:
                        a = amps[i]
                        amps[i] = amps[i | m]
                        amps[i | m] = a
            elif kind == 4:
                t = mask1[g]
                for i in range(dim):
                    if (i & m) and (i & t) == 0:
                        a = amps[i]
                        amps[i] = amps[i | t]
                        amps[i | t] = a
            elif kind == 5:
                ph0 = complex(math.cos(angles[g] / 2), -math.sin(angles[g] / 2))
                ph1 = complex(math.cos(angles[g] / 2), math.sin(angles[g] / 2))
                for i in range(dim):
                    if i & m:
                        amps[i] = ph1 * amps[i]
                    else:
                        amps[i] = ph0 * amps[i]
            elif kind == 6:
                t = mask1[g]
                c = math.cos(angles[g] / 2)
                s = math.sin(angles[g] / 2)
                for i in range(dim):
                    if (i & m) and (i & t) == 0:
                        a = amps[i]
                        b = amps[i | t]
                        amps[i] = c * a - 1j * s * b
                        amps[i | t] = -1j * s * a + c * b
            else:
                p = 0.0
                for i in range(dim):
                    if i & m:
                        amps[i] = 0.0
                    else:
                        p += amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
                if normalize:
                    if p < threshold:
                        return rep * n_gates + g, log_success
                    scale = 1.0 / math.sqrt(p)
                    for i in range(dim):
                        amps[i] = amps[i] * scale
                    log_success += math.log(p)
    return -1, log_success


def run_circuit(
    circuit: Circuit | CompiledCircuit, initial: SimState, repeat: int = 1
) -> SimState:
    """Apply the circuit ``repeat`` times to a copy of ``initial``.

    Raises :class:`ExtinctionError` carrying the index of the failing gate
    within ``circuit`` (and the completed pass count in the message).
    """
    compiled = circuit if isinstance(circuit, CompiledCircuit) else compile_circuit(circuit)
    if compiled.n_system != initial.n_system:
        raise ShapeError(
            f"circuit has {compiled.n_system} system qubits, state has {initial.n_system}"
        )
    state = initial.copy()
    if len(compiled) == 0 or repeat == 0:
        return state
    failed, log_success = _execute(
        state.amplitudes, compiled.kinds, compiled.mask0, compiled.mask1, compiled.angles,
        repeat, True, EXTINCTION_THRESHOLD,
    )
    if failed >= 0:
        n_pass, index = divmod(failed, len(compiled))
        raise ExtinctionError(
            f"post-selection at gate {index} (pass {n_pass}) fell below "
            f"{EXTINCTION_THRESHOLD:g}",
            gate_index=index,
            pass_index=n_pass,
        )
    state.log_success_prob = initial.log_success_prob + log_success
    return state


def circuit_operator(circuit: Circuit | CompiledCircuit) -> np.ndarray:
    """Un-normalized post-selected linear map on the system register.

    Column ``k`` is the ancilla-``|0>`` output for input ``|k>|0>`` with
    every post-selection applied as a bare projector.
    """
    compiled = circuit if isinstance(circuit, CompiledCircuit) else compile_circuit(circuit)
    dim = 1 << compiled.n_system
    out = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        amps = np.zeros(2 * dim, dtype=complex)
        amps[2 * k] = 1.0
        _execute(amps, compiled.kinds, compiled.mask0, compiled.mask1, compiled.angles,
                 1, False, 0.0)
        out[:, k] = amps[0::2]
    return out
