"""First-order Trotter circuits built from Pauli gadgets.

Every factor ``exp(-c P dt)`` is conjugated into the Z basis (H for X
letters, S-dagger then H for Y letters), its parity is gathered by a CNOT
ladder onto the highest-index non-identity qubit, and a single central
operation is applied there:

* imaginary ``c = i a``: ``RZ(2 a dt)``, which is exactly ``exp(-i a dt Z)``;
* real ``c``: ``exp(-alpha Z)`` with ``alpha = c dt`` realised up to a
  positive factor by a controlled X-rotation onto the ancilla followed by
  post-selection of the ancilla in ``|0>``. For ``alpha > 0`` the control
  qubit is flipped before and after so the damped branch is ``|0>``.

Circuits always span ``n_system + 1`` qubits; the last one is the shared
ancilla.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from .pauli import PURITY_TOL, PauliTerm, PseudoHamiltonian

GATE_KINDS = ("H", "S", "SDG", "X", "CNOT", "RZ", "CRX", "POSTSEL")
_TWO_QUBIT = ("CNOT", "CRX")
_ANGLED = ("RZ", "CRX")


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(q) for q in self.targets)
        n_expected = 2 if self.kind in _TWO_QUBIT else 1
        if len(targets) != n_expected:
            raise ValueError(f"{self.kind} takes {n_expected} qubit(s), got {targets}")
        if n_expected == 2 and targets[0] == targets[1]:
            raise ValueError(f"{self.kind} control and target coincide: {targets}")
        object.__setattr__(self, "targets", targets)
        if self.kind in _ANGLED:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} requires a finite angle")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")

    def to_line(self) -> str:
        if self.kind == "POSTSEL":
            return f"POSTSEL {self.targets[0]}"
        parts = ["GATE", self.kind, *map(str, self.targets)]
        if self.angle is not None:
            parts.append(repr(self.angle))
        return " ".join(parts)


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...]
    n_system: int

    def __post_init__(self) -> None:
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        width = self.n_system + 1
        for g in gates:
            if any(q < 0 or q >= width for q in g.targets):
                raise ValueError(f"gate {g.to_line()} addresses a qubit outside 0..{width - 1}")
            if g.kind == "POSTSEL" and g.targets[0] != self.ancilla_index:
                raise ValueError("post-selection is only allowed on the ancilla")
        pending = False
        for g in gates:
            if g.kind == "CRX":
                if g.targets[1] != self.ancilla_index:
                    raise ValueError("CRX must target the ancilla")
                if pending:
                    raise ValueError("CRX reuses the ancilla before post-selection")
                pending = True
            elif g.kind == "POSTSEL":
                pending = False
            elif pending and self.ancilla_index in g.targets:
                raise ValueError("ancilla touched between CRX and post-selection")
        if pending:
            raise ValueError("circuit ends with an unresolved CRX")

    @property
    def ancilla_index(self) -> int:
        return self.n_system

    @property
    def width(self) -> int:
        return self.n_system + 1

    def __len__(self) -> int:
        return len(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_system != self.n_system:
            raise ValueError("cannot concatenate circuits of different widths")
        return Circuit(self.gates + other.gates, self.n_system)

    def repeat(self, times: int) -> "Circuit":
        return Circuit(self.gates * times, self.n_system)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def dumps(self) -> str:
        lines = [f"QUBITS {self.width}"]
        lines.extend(g.to_line() for g in self.gates)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("QUBITS "):
            raise ValueError("circuit text must start with a QUBITS header")
        width = int(lines[0].split()[1])
        gates = []
        for ln in lines[1:]:
            parts = ln.split()
            if parts[0] == "POSTSEL":
                gates.append(Gate("POSTSEL", (int(parts[1]),)))
                continue
            if parts[0] != "GATE":
                raise ValueError(f"unrecognised circuit line {ln!r}")
            kind = parts[1]
            n_q = 2 if kind in _TWO_QUBIT else 1
            targets = tuple(int(p) for p in parts[2 : 2 + n_q])
            angle = float(parts[2 + n_q]) if kind in _ANGLED else None
            gates.append(Gate(kind, targets, angle))
        return cls(tuple(gates), width - 1)


def damping_angle(alpha: float) -> float:
    """CRX angle whose cosine-half equals ``exp(-2|alpha|)``."""
    return 2.0 * math.acos(min(1.0, max(0.0, math.exp(-2.0 * abs(alpha)))))


def _factor_gates(term: PauliTerm, dt: float, ancilla: int) -> list[Gate]:
    c = term.coefficient
    if abs(c.real) > PURITY_TOL and abs(c.imag) > PURITY_TOL:
        raise ValueError(f"term {term.string} has mixed coefficient {c}")
    support = term.support
    if not support:
        raise ValueError("identity strings are constants and are never synthesized")
    imaginary = abs(c.real) <= PURITY_TOL and abs(c.imag) > PURITY_TOL
    if imaginary:
        central_value = c.imag * dt
    else:
        central_value = c.real * dt
    if central_value == 0.0:
        return []

    enter: list[Gate] = []
    leave: list[Gate] = []
    for q in support:
        letter = term.string[q]
        if letter == "X":
            enter.append(Gate("H", (q,)))
            leave.append(Gate("H", (q,)))
        elif letter == "Y":
            enter += [Gate("SDG", (q,)), Gate("H", (q,))]
            leave += [Gate("H", (q,)), Gate("S", (q,))]
    ladder = [Gate("CNOT", (a, b)) for a, b in zip(support, support[1:])]
    target = support[-1]

    if imaginary:
        central = [Gate("RZ", (target,), 2.0 * central_value)]
    else:
        crx = Gate("CRX", (target, ancilla), damping_angle(central_value))
        post = Gate("POSTSEL", (ancilla,))
        if central_value < 0:
            central = [crx, post]
        else:
            central = [Gate("X", (target,)), crx, Gate("X", (target,)), post]
    return enter + ladder + central + ladder[::-1] + leave


def synthesize_factor(term: PauliTerm, dt: float, n_system: int) -> Circuit:
    """Circuit fragment for ``exp(-c P dt)``; empty when ``c dt`` vanishes."""
    if term.width != n_system:
        raise ValueError(f"term width {term.width} does not match {n_system} system qubits")
    return Circuit(tuple(_factor_gates(term, dt, n_system)), n_system)


def factor_order(terms: Iterable[PauliTerm]) -> list[PauliTerm]:
    """Deterministic in-step ordering: by support indices, then by letters."""
    return sorted(terms, key=lambda t: (t.support, t.string))


@dataclass(frozen=True)
class TrotterPlan:
    dt: float
    n_steps: int
    factor_order: tuple[PauliTerm, ...]

    @property
    def total_time(self) -> float:
        return self.dt * self.n_steps


def plan_trotter(ham: PseudoHamiltonian, t_total: float, dt: float) -> TrotterPlan:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_total < 0:
        raise ValueError(f"t_total must be nonnegative, got {t_total}")
    n_steps = step_count(t_total, dt)
    return TrotterPlan(dt, n_steps, tuple(factor_order(ham.terms)))


def step_count(t_total: float, dt: float) -> int:
    ratio = t_total / dt
    n_steps = round(ratio)
    if abs(ratio - n_steps) > 1e-9 * max(1.0, abs(ratio)):
        warnings.warn(
            f"t_total/dt = {ratio!r} is not an integer; using {n_steps} steps",
            stacklevel=3,
        )
    return int(n_steps)


def trotter_step(ham: PseudoHamiltonian, dt: float) -> Circuit:
    """One first-order step: every factor once, in :func:`factor_order`."""
    gates: list[Gate] = []
    for term in factor_order(ham.terms):
        gates.extend(_factor_gates(term, dt, ham.width))
    return Circuit(tuple(gates), ham.width)


def trotterize(ham: PseudoHamiltonian, t_total: float, dt: float) -> Circuit:
    """``n_steps`` copies of :func:`trotter_step`; the constant is left out."""
    plan = plan_trotter(ham, t_total, dt)
    if plan.n_steps == 0 or not ham.terms:
        return Circuit((), ham.width)
    return trotter_step(ham, dt).repeat(plan.n_steps)


def concat(fragments: Sequence[Circuit], n_system: int) -> Circuit:
    gates: list[Gate] = []
    for frag in fragments:
        gates.extend(frag.gates)
    return Circuit(tuple(gates), n_system)
