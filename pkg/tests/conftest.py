"""Shared independent oracles for the test suite."""

import itertools

import numpy as np
import pytest

from rdqsim.hamiltonian import Lattice1D


def config_index(occupied):
    """Basis index of an occupancy tuple; site 0 is the most significant bit and occupied is 0."""
    idx = 0
    for occ in occupied:
        idx = (idx << 1) | (0 if occ else 1)
    return idx


def rate_generator(n_sites, boundary, rates):
    """Generator built straight from transition rates, without ladder operators.

    ``H[j, i]`` is minus the rate of ``i -> j`` and the diagonal holds total
    escape rates, so ``dP/dt = -H P``.
    """
    dim = 1 << n_sites
    gen = np.zeros((dim, dim))
    pairs = Lattice1D(n_sites, boundary).pairs()

    def add(src, dst, rate):
        if rate:
            gen[config_index(dst), config_index(src)] -= rate
            gen[config_index(src), config_index(src)] += rate

    for conf in itertools.product((True, False), repeat=n_sites):
        for i in range(n_sites):
            flipped = list(conf)
            flipped[i] = not conf[i]
            if conf[i]:
                add(conf, flipped, rates.get("decay", 0.0))
            else:
                add(conf, flipped, rates.get("generation", 0.0))
        for i, j in pairs:
            a, b = conf[i], conf[j]
            if a != b:
                moved = list(conf)
                moved[i], moved[j] = b, a
                add(conf, moved, rates.get("hopping", 0.0))
                src, dst = (i, j) if a else (j, i)
                grown = list(conf)
                grown[dst] = True
                add(conf, grown, rates.get("branching", 0.0))
            elif a and b:
                empty = list(conf)
                empty[i] = empty[j] = False
                add(conf, empty, rates.get("pair_annihilation", 0.0))
                for k in (i, j):
                    merged = list(conf)
                    merged[k] = False
                    add(conf, merged, 0.5 * rates.get("pair_coagulation", 0.0))
    return gen


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
