"""Weighted Pauli-string operators and their dense materialization.

Qubit 0 is the most significant position of a basis index, so the matrix of
``"XZ"`` is ``kron(X, Z)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import CapacityError, InternalConsistencyError, ShapeError

LETTERS = "IXYZ"
MAX_DENSE_WIDTH = 12
ZERO_TOL = 1e-14
PURITY_TOL = 1e-12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_string(letters: str) -> str:
    if not letters:
        raise ShapeError("Pauli string must act on at least one qubit")
    bad = set(letters) - set(LETTERS)
    if bad:
        raise ValueError(f"invalid Pauli letters {sorted(bad)} in {letters!r}")
    return letters


@dataclass(frozen=True)
class PauliTerm:
    """``coefficient * string``, where ``string`` holds one letter per qubit."""

    coefficient: complex
    string: str

    def __post_init__(self) -> None:
        _check_string(self.string)
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @property
    def width(self) -> int:
        return len(self.string)

    @property
    def support(self) -> tuple[int, ...]:
        """Indices of the non-identity letters, ascending."""
        return tuple(q for q, c in enumerate(self.string) if c != "I")

    def is_identity(self) -> bool:
        return not self.support

    def is_real(self) -> bool:
        return abs(self.coefficient.imag) <= PURITY_TOL

    def is_imaginary(self) -> bool:
        return abs(self.coefficient.real) <= PURITY_TOL

    def is_pure(self) -> bool:
        """True when the coefficient is purely real or purely imaginary."""
        return self.is_real() or self.is_imaginary()


def simplify(terms: Iterable[PauliTerm]) -> list[PauliTerm]:
    """Merge identical strings, drop vanishing coefficients, sort by letters."""
    acc: dict[str, complex] = {}
    width = None
    for term in terms:
        if width is None:
            width = term.width
        elif term.width != width:
            raise ShapeError(f"mixed widths {width} and {term.width} in term list")
        acc[term.string] = acc.get(term.string, 0j) + term.coefficient
    return [PauliTerm(c, s) for s, c in sorted(acc.items()) if abs(c) >= ZERO_TOL]


@dataclass(frozen=True)
class PseudoHamiltonian:
    """Sum of Pauli terms plus a real constant (the identity coefficient).

    Build instances with :meth:`from_terms`; it merges duplicate strings and
    folds any all-identity term into ``constant``.
    """

    terms: tuple[PauliTerm, ...]
    constant: float
    width: int

    @classmethod
    def from_terms(
        cls, terms: Iterable[PauliTerm], width: int, constant: float = 0.0
    ) -> "PseudoHamiltonian":
        terms = list(terms)
        for t in terms:
            if t.width != width:
                raise ShapeError(f"term {t.string!r} does not have width {width}")
        const = complex(constant)
        kept = []
        for t in simplify(terms):
            if t.is_identity():
                const += t.coefficient
            else:
                kept.append(t)
        if abs(const.imag) > PURITY_TOL:
            raise InternalConsistencyError(f"constant offset {const} is not real")
        return cls(tuple(kept), float(const.real), width)

    def __len__(self) -> int:
        return len(self.terms)

    def check_purity(self) -> None:
        """Raise if any coefficient mixes real and imaginary parts."""
        for t in self.terms:
            if abs(t.coefficient.real) * abs(t.coefficient.imag) > PURITY_TOL or not t.is_pure():
                raise InternalConsistencyError(
                    f"term {t.string} has mixed coefficient {t.coefficient}"
                )

    def dumps(self) -> str:
        """Text form: ``<re>,<im> <letters>`` per term and a trailing ``CONST`` line."""
        lines = [f"{t.coefficient.real!r},{t.coefficient.imag!r} {t.string}" for t in self.terms]
        lines.append(f"CONST {self.constant!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PseudoHamiltonian":
        terms = []
        constant = 0.0
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            head, _, rest = line.partition(" ")
            if head == "CONST":
                constant = float(rest)
                continue
            try:
                re_s, im_s = head.split(",")
                terms.append(PauliTerm(complex(float(re_s), float(im_s)), rest.strip()))
            except ValueError as exc:
                raise ValueError(f"line {lineno}: cannot parse term {raw!r}") from exc
        if not terms:
            raise ValueError("Hamiltonian dump holds no terms; width is undetermined")
        return cls.from_terms(terms, terms[0].width, constant)


def string_matrix(letters: str) -> np.ndarray:
    """Dense matrix of a bare Pauli string."""
    _check_string(letters)
    if len(letters) > MAX_DENSE_WIDTH:
        raise CapacityError(f"width {len(letters)} exceeds dense limit {MAX_DENSE_WIDTH}")
    return reduce(np.kron, (PAULI_MATRICES[c] for c in letters))


def to_matrix(
    op: Union[PseudoHamiltonian, PauliTerm, Sequence[PauliTerm]],
    include_constant: bool = False,
) -> np.ndarray:
    """Materialize ``op`` as a dense ``2**width`` square complex matrix."""
    if isinstance(op, PauliTerm):
        return op.coefficient * string_matrix(op.string)
    if isinstance(op, PseudoHamiltonian):
        terms, width, constant = op.terms, op.width, op.constant
    else:
        terms = list(op)
        if not terms:
            raise ShapeError("cannot infer width of an empty term list")
        width, constant = terms[0].width, 0.0
    if width > MAX_DENSE_WIDTH:
        raise CapacityError(f"width {width} exceeds dense limit {MAX_DENSE_WIDTH}")
    dim = 1 << width
    out = np.zeros((dim, dim), dtype=complex)
    for t in terms:
        if t.width != width:
            raise ShapeError(f"term {t.string!r} does not have width {width}")
        out += t.coefficient * string_matrix(t.string)
    if include_constant and constant:
        out[np.diag_indices(dim)] += constant
    return out
