import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdqsim.errors import CapacityError, InternalConsistencyError, ShapeError
from rdqsim.pauli import PauliTerm, PseudoHamiltonian, simplify, string_matrix, to_matrix

letters = st.text(alphabet="IXYZ", min_size=1, max_size=4)
coefficients = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def test_single_letter_matrices():
    # [TRIVIAL] textbook Pauli matrices
    assert np.array_equal(string_matrix("X"), [[0, 1], [1, 0]])
    assert np.array_equal(string_matrix("Y"), [[0, -1j], [1j, 0]])
    assert np.array_equal(string_matrix("Z"), [[1, 0], [0, -1]])


def test_qubit_zero_is_most_significant():
    # [DERIVED] X on qubit 0 of two flips the high bit: |00> -> |10>
    m = string_matrix("XI")
    assert m[2, 0] == 1 and m[1, 0] == 0


def test_sum_of_terms():
    # [TRIVIAL] 0.5*X + 0.5*Z is the Hadamard
    got = to_matrix([PauliTerm(0.5, "X"), PauliTerm(0.5, "Z")])
    assert np.allclose(got, [[0.5, 0.5], [0.5, -0.5]])


def test_simplify_merges_and_drops():
    terms = [PauliTerm(1, "XZ"), PauliTerm(2, "IY"), PauliTerm(-1, "XZ"), PauliTerm(1e-16, "ZZ")]
    assert simplify(terms) == [PauliTerm(2, "IY")]


def test_simplify_rejects_mixed_width():
    with pytest.raises(ShapeError):
        simplify([PauliTerm(1, "X"), PauliTerm(1, "XX")])


def test_bad_letters_rejected():
    with pytest.raises(ValueError):
        PauliTerm(1, "XA")


def test_identity_folds_into_constant():
    ham = PseudoHamiltonian.from_terms([PauliTerm(0.5, "II"), PauliTerm(1, "ZI")], 2, constant=1.0)
    assert ham.constant == 1.5
    assert [t.string for t in ham.terms] == ["ZI"]


def test_complex_constant_is_an_error():
    with pytest.raises(InternalConsistencyError):
        PseudoHamiltonian.from_terms([PauliTerm(1j, "I")], 1)


def test_purity_check():
    ham = PseudoHamiltonian.from_terms([PauliTerm(1 + 1j, "X")], 1)
    with pytest.raises(InternalConsistencyError):
        ham.check_purity()


def test_dense_limit():
    with pytest.raises(CapacityError):
        string_matrix("I" * 13)


def test_dumps_roundtrip():
    ham = PseudoHamiltonian.from_terms(
        [PauliTerm(0.25, "XY"), PauliTerm(-0.5j, "ZZ"), PauliTerm(1 / 3, "IZ")], 2, constant=0.1
    )
    assert PseudoHamiltonian.loads(ham.dumps()) == ham


@given(st.lists(st.tuples(coefficients, st.text(alphabet="IXYZ", min_size=3, max_size=3)),
                min_size=1, max_size=6))
@settings(max_examples=60, deadline=None)
def test_simplify_preserves_matrix(pairs):
    # [DERIVED] the dense sum is invariant under merging
    terms = [PauliTerm(c, s) for c, s in pairs]
    before = sum(t.coefficient * string_matrix(t.string) for t in terms)
    kept = simplify(terms)
    after = to_matrix(kept) if kept else np.zeros((8, 8))
    assert np.allclose(before, after, atol=1e-12)


@given(letters)
def test_strings_square_to_identity(s):
    m = string_matrix(s)
    assert np.allclose(m @ m, np.eye(1 << len(s)))


@given(letters, letters.filter(bool))
def test_strings_commute_or_anticommute(a, b):
    # [DERIVED] count of positions where both letters differ and are non-identity
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    clash = sum(1 for x, y in zip(a, b) if "I" not in (x, y) and x != y)
    ma, mb = string_matrix(a), string_matrix(b)
    sign = -1 if clash % 2 else 1
    assert np.allclose(ma @ mb, sign * mb @ ma)
