import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from rdqsim.engine import circuit_operator
from rdqsim.hamiltonian import ModelSpec, ReactionKind, build_pauli
from rdqsim.pauli import PauliTerm, PseudoHamiltonian, string_matrix, to_matrix
from rdqsim.synthesis import (
    Circuit,
    Gate,
    damping_angle,
    factor_order,
    plan_trotter,
    synthesize_factor,
    trotter_step,
    trotterize,
)

CENTRAL = {"RZ", "CRX", "POSTSEL", "X"}

pauli_strings = st.integers(1, 3).flatmap(
    lambda n: st.text(alphabet="IXYZ", min_size=n, max_size=n).filter(lambda s: s.strip("I"))
)


@st.composite
def pure_terms(draw):
    s = draw(pauli_strings)
    value = draw(st.floats(-1, 1).filter(lambda v: abs(v) > 1e-6))
    imaginary = draw(st.booleans())
    return PauliTerm(1j * value if imaginary else value, s)


def unit(m):
    return m / np.linalg.norm(m, 2)


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("RZ", (0,))
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        Gate("RZ", (0,), math.inf)
    with pytest.raises(ValueError):
        Gate("FOO", (0,))


def test_postselect_only_on_ancilla():
    with pytest.raises(ValueError):
        Circuit((Gate("POSTSEL", (0,)),), 2)


def test_crx_must_be_resolved_before_reuse():
    crx = Gate("CRX", (0, 2), 0.3)
    with pytest.raises(ValueError):
        Circuit((crx,), 2)
    with pytest.raises(ValueError):
        Circuit((crx, Gate("H", (2,)), Gate("POSTSEL", (2,))), 2)
    Circuit((crx, Gate("H", (1,)), Gate("POSTSEL", (2,))), 2)


def test_out_of_range_index():
    with pytest.raises(ValueError):
        Circuit((Gate("H", (3,)),), 2)


def test_xyz_gadget_layout():
    # [PAPER] basis change, ladder to the third qubit, Rz, then the mirror image
    t = 0.37
    circ = synthesize_factor(PauliTerm(-1j, "XYZ"), t, 3)
    lines = [g.to_line() for g in circ.gates]
    assert lines == [
        "GATE H 0",
        "GATE SDG 1",
        "GATE H 1",
        "GATE CNOT 0 1",
        "GATE CNOT 1 2",
        f"GATE RZ 2 {-2 * t!r}",
        "GATE CNOT 1 2",
        "GATE CNOT 0 1",
        "GATE H 0",
        "GATE H 1",
        "GATE S 1",
    ]
    # [DERIVED] exp(+i XYZ t), from expm
    want = expm(1j * t * string_matrix("XYZ"))
    assert np.allclose(circuit_operator(circ), want, atol=1e-12)


@pytest.mark.parametrize("alpha", [-0.4, -0.05, 0.05, 0.4])
def test_single_z_damping(alpha):
    circ = synthesize_factor(PauliTerm(alpha, "Z"), 1.0, 1)
    op = circuit_operator(circ)
    # [DERIVED] exp(-alpha Z) divided by exp(|alpha|)
    want = np.diag([math.exp(-alpha), math.exp(alpha)]) * math.exp(-abs(alpha))
    assert np.allclose(op, want, atol=1e-14)
    if alpha < 0:
        assert np.allclose(op, np.diag([1, math.exp(-2 * abs(alpha))]))
    assert circ.count("POSTSEL") == 1
    assert circ.count("X") == (2 if alpha > 0 else 0)


def test_damping_angle_clamped():
    assert damping_angle(0.0) == 0.0
    assert math.cos(damping_angle(0.3) / 2) == pytest.approx(math.exp(-0.6))
    assert damping_angle(1e6) == pytest.approx(math.pi)


def test_zero_coefficient_fragment_is_empty():
    assert synthesize_factor(PauliTerm(0.0, "XZ"), 0.1, 2).gates == ()


def test_rejects_identity_and_mixed():
    with pytest.raises(ValueError):
        synthesize_factor(PauliTerm(1.0, "II"), 0.1, 2)
    with pytest.raises(ValueError):
        synthesize_factor(PauliTerm(1 + 1j, "XI"), 0.1, 2)
    with pytest.raises(ValueError):
        synthesize_factor(PauliTerm(1.0, "XI"), 0.1, 3)


@given(pure_terms(), st.floats(0.01, 1))
@settings(max_examples=80, deadline=None)
def test_fragment_is_proportional_to_exponential(term, dt):
    circ = synthesize_factor(term, dt, term.width)
    op = circuit_operator(circ)
    want = expm(-dt * to_matrix(term))
    assert np.allclose(unit(op), unit(want), atol=1e-10)
    # [DERIVED] the factor is exp(-|c dt|) for damping fragments and 1 otherwise
    scale = math.exp(-abs(term.coefficient.real) * dt)
    assert np.allclose(op, scale * want, atol=1e-12)
    if term.is_imaginary():
        assert circ.count("POSTSEL") == 0
        assert np.allclose(op.conj().T @ op, np.eye(op.shape[0]), atol=1e-12)
    else:
        assert circ.count("POSTSEL") == 1


@given(pure_terms(), st.floats(0.01, 1))
@settings(max_examples=50, deadline=None)
def test_ladder_reverses_without_central_rotation(term, dt):
    circ = synthesize_factor(term, dt, term.width)
    bare = Circuit(tuple(g for g in circ.gates if g.kind not in CENTRAL), term.width)
    op = circuit_operator(bare)
    assert np.allclose(op, np.eye(op.shape[0]), atol=1e-12)


def test_factor_order():
    terms = [PauliTerm(1, "ZI"), PauliTerm(1, "XZ"), PauliTerm(1, "IX"), PauliTerm(1, "XI")]
    assert [t.string for t in factor_order(terms)] == ["XI", "ZI", "XZ", "IX"]


def test_single_site_step_has_three_factors():
    # [PAPER] X, Y and Z factors, one each
    ham = build_pauli(ModelSpec.create(1, decay=1.0, generation=0.3))
    step = trotter_step(ham, 1 / 20)
    assert len(ham.terms) == 3
    assert step.count("POSTSEL") == 2 and step.count("RZ") == 1


def test_commuting_terms_are_exact():
    ham = PseudoHamiltonian.from_terms([PauliTerm(0.3, "ZI"), PauliTerm(-0.7, "IZ")], 2)
    op = circuit_operator(trotterize(ham, 2.0, 0.25))
    want = expm(-2.0 * to_matrix(ham))
    assert np.allclose(unit(op), unit(want), atol=1e-10)


def test_zero_time_and_empty_hamiltonian():
    ham = build_pauli(ModelSpec.create(2, hopping=1.0))
    assert trotterize(ham, 0.0, 0.1).gates == ()
    empty = PseudoHamiltonian.from_terms([], 2, constant=1.0)
    assert trotterize(empty, 1.0, 0.1).gates == ()


def test_plan():
    ham = build_pauli(ModelSpec.create(2, hopping=1.0))
    plan = plan_trotter(ham, 5.0, 1 / 80)
    assert plan.n_steps == 400
    assert abs(plan.total_time - 5.0) < 1e-12
    assert sorted(plan.factor_order, key=lambda t: t.string) == sorted(ham.terms, key=lambda t: t.string)
    with pytest.raises(ValueError):
        plan_trotter(ham, 1.0, 0.0)


def test_non_integer_step_count_warns():
    ham = build_pauli(ModelSpec.create(1, decay=1.0))
    with pytest.warns(UserWarning):
        assert plan_trotter(ham, 1.0, 0.3).n_steps == 3
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        plan_trotter(ham, 5.0, 1 / 80)


def test_text_roundtrip():
    ham = build_pauli(ModelSpec.create(3, hopping=1.0, decay=0.4, branching=0.2))
    circ = trotterize(ham, 0.2, 0.1)
    text = circ.dumps()
    assert text.startswith("QUBITS 4\n")
    assert Circuit.loads(text) == circ


@pytest.mark.parametrize("seed", range(4))
def test_first_order_convergence(seed):
    # [DERIVED] dense expm reference, compared after removing the known gadget scale
    rng = np.random.default_rng(seed)
    rates = {k.value: float(rng.uniform(0.1, 1.0)) for k in ReactionKind}
    ham = build_pauli(ModelSpec.create(3, "open", **rates))
    t = 1.0
    want = expm(-t * to_matrix(ham))
    damping = sum(abs(term.coefficient.real) for term in ham.terms)
    dts = [1 / 10, 1 / 20, 1 / 40, 1 / 80]
    errors = []
    for dt in dts:
        op = circuit_operator(trotterize(ham, t, dt)) * math.exp(damping * t)
        errors.append(np.linalg.norm(op - want, 2))
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    assert 0.8 <= slope <= 1.2, (slope, errors)


def test_single_site_first_order_when_rates_differ():
    # [DERIVED] with unequal rates the step has three non-commuting factors
    from rdqsim.encoding import decode, encode, particle_number
    from rdqsim.engine import run_circuit
    from rdqsim.oracle import ProbabilityState

    lam, nu, t = 1.0, 0.2, 3.0
    ham = build_pauli(ModelSpec.create(1, decay=lam, generation=nu))
    exact = nu / (lam + nu) + lam / (lam + nu) * math.exp(-(lam + nu) * t)
    start = encode(ProbabilityState.point(1, 0)).state
    dts = [1 / 10, 1 / 20, 1 / 40, 1 / 80]
    errors = [abs(particle_number(decode(run_circuit(trotterize(ham, t, dt), start))) - exact)
              for dt in dts]
    slope = np.polyfit(np.log(dts), np.log(errors), 1)[0]
    assert 0.8 <= slope <= 1.2, errors
    assert errors[3] < errors[1]
