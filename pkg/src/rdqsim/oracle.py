"""Exact master-equation propagation for validating circuit results."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import ConservationError, ShapeError
from .hamiltonian import ModelSpec, build_generator

NEGATIVE_CLIP = 1e-12
SUM_TOL = 1e-9


@dataclass(frozen=True)
class ProbabilityState:
    """Distribution over the ``2**n_sites`` lattice configurations."""

    probs: np.ndarray
    n_sites: int

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=float)
        if probs.shape != (1 << self.n_sites,):
            raise ShapeError(f"expected {1 << self.n_sites} probabilities, got {probs.shape}")
        if probs.min() < -NEGATIVE_CLIP:
            raise ValueError(f"negative probability {probs.min():.3e}")
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point(cls, n_sites: int, index: int) -> "ProbabilityState":
        probs = np.zeros(1 << n_sites)
        probs[index] = 1.0
        return cls(probs, n_sites)

    @classmethod
    def uniform(cls, n_sites: int) -> "ProbabilityState":
        return cls(np.full(1 << n_sites, 1.0 / (1 << n_sites)), n_sites)


@dataclass(frozen=True)
class DiagonalObservable:
    """Observable diagonal in the configuration basis; one value per configuration."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or not np.all(np.isfinite(values)):
            raise ValueError("observable values must be a finite 1-D array")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def occupation_counts(n_sites: int) -> np.ndarray:
    """Particles in each configuration; an occupied site is a 0 bit."""
    idx = np.arange(1 << n_sites)
    ones = np.zeros_like(idx)
    for b in range(n_sites):
        ones += (idx >> b) & 1
    return (n_sites - ones).astype(float)


def particle_number_observable(n_sites: int) -> DiagonalObservable:
    return DiagonalObservable(occupation_counts(n_sites))


def indicator_observable(n_sites: int, index: int) -> DiagonalObservable:
    values = np.zeros(1 << n_sites)
    values[index] = 1.0
    return DiagonalObservable(values)


def propagate(vector: np.ndarray, model: ModelSpec, t: float) -> np.ndarray:
    """Raw ``exp(-H t) @ vector`` with the full generator; no clipping."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    gen = build_generator(model)
    if vector.shape != (gen.shape[0],):
        raise ShapeError(f"vector of shape {vector.shape} does not match generator {gen.shape}")
    if t == 0:
        return np.array(vector, dtype=float)
    return expm(-t * gen) @ vector


def evolve_exact(p0: ProbabilityState, model: ModelSpec, t: float) -> ProbabilityState:
    if p0.n_sites != model.n_sites:
        raise ShapeError(f"state has {p0.n_sites} sites, model has {model.n_sites}")
    out = propagate(p0.probs, model, t)
    total = out.sum()
    if abs(total - 1.0) > 1e-6:
        raise ConservationError(f"propagated probabilities sum to {total!r}")
    out[(out < 0) & (out >= -NEGATIVE_CLIP)] = 0.0
    if out.min() < -NEGATIVE_CLIP:
        raise ConservationError(f"propagated probability {out.min():.3e} is negative")
    return ProbabilityState(out / out.sum(), p0.n_sites)


def expectation(p: ProbabilityState, obs: DiagonalObservable) -> float:
    if obs.values.shape != p.probs.shape:
        raise ShapeError(f"observable length {obs.values.size} != state length {p.probs.size}")
    return float(obs.values @ p.probs)


def two_point(
    p0: ProbabilityState, model: ModelSpec, obs: DiagonalObservable, t1: float, t2: float
) -> float:
    """``<O(t2) O(t1)>``: insert ``O`` at ``t1``, propagate to ``t2``, contract with ``O``."""
    if t2 < t1:
        raise ValueError(f"two_point needs t1 <= t2, got t1={t1}, t2={t2}")
    if t1 < 0:
        raise ValueError(f"t1 must be nonnegative, got {t1}")
    if obs.values.shape != p0.probs.shape:
        raise ShapeError("observable and state dimensions differ")
    at_t1 = propagate(p0.probs, model, t1)
    at_t2 = propagate(obs.values * at_t1, model, t2 - t1)
    return float(obs.values @ at_t2)
