"""Conversion between probability vectors and normalized amplitudes.

A distribution ``P`` is loaded as ``P / ||P||_2``. Because every circuit
factor is proportional to the exact propagator with a positive constant,
the evolved amplitudes are ``k * P(t)`` for some unknown ``k > 0``; reading
off the all-ones projection ``sum_i psi_i`` recovers ``k`` and hence
``P(t)`` without any other normalization data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import SimState, apply_gate
from .errors import DecodeError
from .oracle import ProbabilityState, occupation_counts
from .synthesis import Gate

IMAG_TOL = 1e-8
DECODE_NEGATIVE_CLIP = 1e-6
OVERLAP_FLOOR = 1e-12


@dataclass(frozen=True)
class EncodedState:
    state: SimState
    l1_norm: float
    l2_scale: float


def encode(p: ProbabilityState) -> EncodedState:
    l2 = float(np.linalg.norm(p.probs))
    if l2 == 0.0:
        raise ValueError("cannot encode an all-zero vector")
    clipped = np.clip(p.probs, 0.0, None)
    state = SimState.from_system(clipped / l2, normalize=False)
    return EncodedState(state, float(p.probs.sum()), l2)


def _ancilla_leak(state: SimState) -> float:
    return float(np.linalg.norm(state.amplitudes[1::2]))


def projection_overlap(state: SimState) -> float:
    """``<P|psi>`` read as ``sqrt(2**n)`` times the all-zero amplitude after a Hadamard layer.

    The plain amplitude sum is computed alongside and must agree to 1e-10.
    """
    if _ancilla_leak(state) > 1e-10:
        raise DecodeError("ancilla is not in |0>; resolve post-selections first")
    rotated = state
    for q in range(state.n_system):
        rotated = apply_gate(rotated, Gate("H", (q,)))
    overlap = math.sqrt(1 << state.n_system) * rotated.amplitudes[0]
    direct = state.system.sum()
    if abs(overlap - direct) > 1e-10 * max(1.0, abs(direct)):
        raise DecodeError(f"Hadamard-layer overlap {overlap} disagrees with amplitude sum {direct}")
    if abs(overlap.imag) > IMAG_TOL:
        raise DecodeError(f"projection overlap has imaginary part {overlap.imag:.3e}")
    return float(overlap.real)


def decode(state: SimState) -> ProbabilityState:
    overlap = projection_overlap(state)
    if overlap <= OVERLAP_FLOOR:
        raise DecodeError(f"projection overlap {overlap:.3e} is too small to decode")
    psi = state.system
    worst_imag = float(np.max(np.abs(psi.imag)))
    if worst_imag > IMAG_TOL:
        raise DecodeError(f"amplitudes carry imaginary residue {worst_imag:.3e}")
    probs = psi.real / overlap
    if probs.min() < -DECODE_NEGATIVE_CLIP:
        raise DecodeError(f"decoded probability {probs.min():.3e} below clip window")
    probs = np.where(probs < 0.0, 0.0, probs)
    return ProbabilityState(probs / probs.sum(), state.n_system)


def particle_number(p: ProbabilityState) -> float:
    """Mean total occupation; configuration bits equal to 0 are occupied sites."""
    return float(occupation_counts(p.n_sites) @ p.probs)
