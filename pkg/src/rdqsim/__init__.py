"""Circuit-level simulation of stochastic reaction-diffusion lattice models.

The pipeline maps a lattice model to a Pauli-basis pseudo-Hamiltonian,
Trotterizes it into unitary gadgets and post-selected damping gadgets, runs
the circuit on a statevector, and decodes probabilities for comparison with
an exact master-equation propagator.
"""

from .encoding import EncodedState, decode, encode, particle_number, projection_overlap
from .engine import SimState, apply_gate, circuit_operator, compile_circuit, run_circuit
from .errors import (
    CapacityError,
    ConfigError,
    ConservationError,
    DecodeError,
    ExtinctionError,
    InternalConsistencyError,
    RDQSimError,
    ShapeError,
)
from .experiments import (
    ExperimentConfig,
    TimeSeriesRecord,
    list_presets,
    parse_config,
    run_experiment,
)
from .hamiltonian import (
    Boundary,
    Lattice1D,
    ModelSpec,
    ReactionKind,
    ReactionSpec,
    build_generator,
    build_pauli,
)
from .oracle import (
    DiagonalObservable,
    ProbabilityState,
    evolve_exact,
    expectation,
    two_point,
)
from .pauli import PauliTerm, PseudoHamiltonian, simplify, to_matrix
from .synthesis import Circuit, Gate, TrotterPlan, synthesize_factor, trotterize

__version__ = "0.1.0"
