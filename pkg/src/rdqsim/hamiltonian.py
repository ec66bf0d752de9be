"""Pseudo-Hamiltonians of single-species reaction-diffusion models on a 1D lattice.

Each reaction is written once as a polynomial in the ladder operators
``n = sigma+ sigma-``, ``sigma+`` (empty -> occupied) and ``sigma-``
(occupied -> empty). Two independent routes consume that polynomial:

* :func:`build_generator` multiplies the 2x2 matrices and takes Kronecker
  products, giving the master-equation generator directly;
* :func:`build_pauli` substitutes ``sigma+- = (X +- iY)/2``, ``n = (Z + 1)/2``
  and expands into Pauli strings for circuit synthesis.

An occupied site is the computational ``|0>`` state (the ``Z = +1``
eigenvector), so ``n = diag(1, 0)``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable

import numpy as np

from .errors import CapacityError, InternalConsistencyError
from .pauli import MAX_DENSE_WIDTH, PauliTerm, PseudoHamiltonian, to_matrix

# (coefficient, ((site, symbol), ...)) with symbols "n", "p" (sigma+), "m" (sigma-).
# An empty factor tuple is the identity.
Monomial = tuple[float, tuple[tuple[int, str], ...]]

_LADDER_MATRICES = {
    "n": np.array([[1.0, 0.0], [0.0, 0.0]]),
    "p": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "m": np.array([[0.0, 0.0], [1.0, 0.0]]),
}

_LADDER_PAULI = {
    "n": {"I": 0.5, "Z": 0.5},
    "p": {"X": 0.5, "Y": 0.5j},
    "m": {"X": 0.5, "Y": -0.5j},
}

# single-qubit products a*b -> (phase, letter)
_PRODUCT = {("I", b): (1, b) for b in "IXYZ"}
_PRODUCT.update({(a, "I"): (1, a) for a in "XYZ"})
_PRODUCT.update({(a, a): (1, "I") for a in "XYZ"})
_PRODUCT.update({
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
})


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class ReactionKind(str, enum.Enum):
    HOPPING = "hopping"
    PAIR_ANNIHILATION = "pair_annihilation"
    PAIR_COAGULATION = "pair_coagulation"
    DECAY = "decay"
    GENERATION = "generation"
    BRANCHING = "branching"

    @property
    def is_pair(self) -> bool:
        return self not in (ReactionKind.DECAY, ReactionKind.GENERATION)


@dataclass(frozen=True)
class Lattice1D:
    n_sites: int
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self) -> None:
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ValueError(f"n_sites must be a positive integer, got {self.n_sites}")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    def pairs(self) -> list[tuple[int, int]]:
        """Distinct unordered nearest-neighbour pairs ``(i, j)`` with ``i < j``."""
        out = [(i, i + 1) for i in range(self.n_sites - 1)]
        if self.boundary is Boundary.PERIODIC and self.n_sites > 2:
            out.append((0, self.n_sites - 1))
        return out


@dataclass(frozen=True)
class ReactionSpec:
    kind: ReactionKind
    rate: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ReactionKind(self.kind))
        object.__setattr__(self, "rate", float(self.rate))
        if not self.rate >= 0.0:
            raise ValueError(f"rate for {self.kind.value} must be nonnegative, got {self.rate}")


@dataclass(frozen=True)
class ModelSpec:
    lattice: Lattice1D
    reactions: tuple[ReactionSpec, ...]

    def __post_init__(self) -> None:
        reactions = tuple(self.reactions)
        kinds = [r.kind for r in reactions]
        dupes = {k.value for k in kinds if kinds.count(k) > 1}
        if dupes:
            raise ValueError(f"duplicate reactions {sorted(dupes)}; pre-sum their rates")
        object.__setattr__(self, "reactions", reactions)

    @classmethod
    def create(cls, n_sites: int, boundary: str = "periodic", **rates: float) -> "ModelSpec":
        """Shorthand: ``ModelSpec.create(4, hopping=1.0, decay=0.5)``."""
        return cls(
            Lattice1D(n_sites, Boundary(boundary)),
            tuple(ReactionSpec(ReactionKind(k), v) for k, v in rates.items()),
        )

    @property
    def n_sites(self) -> int:
        return self.lattice.n_sites

    def rate(self, kind: ReactionKind | str) -> float:
        kind = ReactionKind(kind)
        for r in self.reactions:
            if r.kind is kind:
                return r.rate
        return 0.0


def _mul(a: list[Monomial], b: list[Monomial]) -> list[Monomial]:
    return [(ca * cb, fa + fb) for ca, fa in a for cb, fb in b]


def _op(site: int, sym: str, coef: float = 1.0) -> list[Monomial]:
    return [(coef, ((site, sym),))]


def _pair_polynomial(kind: ReactionKind, i: int, j: int) -> list[Monomial]:
    n_i, n_j = _op(i, "n"), _op(j, "n")
    if kind is ReactionKind.HOPPING:
        # (sp_i - sp_j)(sm_i - sm_j) - 2 n_i n_j
        return _mul(_op(i, "p") + _op(j, "p", -1.0), _op(i, "m") + _op(j, "m", -1.0)) + [
            (-2.0 * c, f) for c, f in _mul(n_i, n_j)
        ]
    if kind is ReactionKind.PAIR_ANNIHILATION:
        # n_i n_j - sm_i sm_j
        return _mul(n_i, n_j) + _mul(_op(i, "m", -1.0), _op(j, "m"))
    if kind is ReactionKind.PAIR_COAGULATION:
        # n_i n_j - 1/2 n_i sm_j - 1/2 n_j sm_i
        return _mul(n_i, n_j) + _mul(_op(i, "n", -0.5), _op(j, "m")) + _mul(
            _op(j, "n", -0.5), _op(i, "m")
        )
    if kind is ReactionKind.BRANCHING:
        # n_i + n_j - 2 n_i n_j - n_i sp_j - n_j sp_i
        return (
            n_i
            + n_j
            + [(-2.0 * c, f) for c, f in _mul(n_i, n_j)]
            + _mul(_op(i, "n", -1.0), _op(j, "p"))
            + _mul(_op(j, "n", -1.0), _op(i, "p"))
        )
    raise ValueError(f"{kind.value} is not a pair reaction")


def _site_polynomial(kind: ReactionKind, i: int) -> list[Monomial]:
    if kind is ReactionKind.DECAY:
        return _op(i, "n") + _op(i, "m", -1.0)  # n - sm
    if kind is ReactionKind.GENERATION:
        return [(1.0, ())] + _op(i, "n", -1.0) + _op(i, "p", -1.0)  # (1 - n) - sp
    raise ValueError(f"{kind.value} is not a single-site reaction")


def ladder_polynomial(model: ModelSpec) -> list[Monomial]:
    """Whole-model pseudo-Hamiltonian as a rate-weighted ladder-operator polynomial."""
    poly: list[Monomial] = []
    for reaction in model.reactions:
        if reaction.rate == 0.0:
            continue
        if reaction.kind.is_pair:
            parts = (_pair_polynomial(reaction.kind, i, j) for i, j in model.lattice.pairs())
        else:
            parts = (_site_polynomial(reaction.kind, i) for i in range(model.n_sites))
        for part in parts:
            poly.extend((reaction.rate * c, f) for c, f in part)
    return poly


def _check_capacity(n_sites: int) -> None:
    if n_sites > MAX_DENSE_WIDTH:
        raise CapacityError(f"{n_sites} sites exceeds dense limit {MAX_DENSE_WIDTH}")


@lru_cache(maxsize=64)
def build_generator(model: ModelSpec) -> np.ndarray:
    """Dense real generator ``H`` with ``dP/dt = -H P`` (constants included).

    The returned array is cached and read-only.
    """
    n = model.n_sites
    _check_capacity(n)
    eye = np.eye(2)
    out = np.zeros((1 << n, 1 << n))
    for coef, factors in ladder_polynomial(model):
        local = [eye] * n
        for site, sym in factors:
            local[site] = local[site] @ _LADDER_MATRICES[sym]
        out += coef * reduce(np.kron, local)
    out.setflags(write=False)
    return out


def _expand_monomial(coef: float, factors: Iterable[tuple[int, str]], n: int) -> list[PauliTerm]:
    per_site: list[dict[str, complex]] = [{"I": 1.0 + 0j} for _ in range(n)]
    for site, sym in factors:
        acc: dict[str, complex] = {}
        for a, ca in per_site[site].items():
            for b, cb in _LADDER_PAULI[sym].items():
                phase, letter = _PRODUCT[(a, b)]
                acc[letter] = acc.get(letter, 0j) + phase * ca * cb
        per_site[site] = {k: v for k, v in acc.items() if v != 0}
    terms = []
    for combo in itertools.product(*(d.items() for d in per_site)):
        c = coef
        for _, cl in combo:
            c = c * cl
        terms.append(PauliTerm(c, "".join(letter for letter, _ in combo)))
    return terms


def build_pauli(model: ModelSpec, validate: bool = False) -> PseudoHamiltonian:
    """Pauli-basis pseudo-Hamiltonian; the identity part goes to ``constant``.

    With ``validate`` set (and at most 6 sites) the dense expansion is
    compared against :func:`build_generator` to 1e-10.
    """
    n = model.n_sites
    terms: list[PauliTerm] = []
    for coef, factors in ladder_polynomial(model):
        terms.extend(_expand_monomial(coef, factors, n))
    ham = PseudoHamiltonian.from_terms(terms, n)
    ham.check_purity()
    if validate and n <= 6:
        diff = np.max(np.abs(to_matrix(ham, include_constant=True) - build_generator(model)))
        if diff > 1e-10:
            raise InternalConsistencyError(f"Pauli expansion deviates from generator by {diff:.3e}")
    return ham
