"""Seeded random generators for states, observables, and involutions.

All functions take an explicit ``numpy.random.Generator`` so randomized
sweeps stay reproducible and parallelizable with independent streams.
"""

from __future__ import annotations

import numpy as np

from .linalg import dagger

Array = np.ndarray


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed))


def random_complex(rng: np.random.Generator, shape: tuple[int, ...]) -> Array:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_hermitian(d: int, rng: np.random.Generator) -> Array:
    g = random_complex(rng, (d, d))
    return (g + dagger(g)) / 2.0


def random_unitary(d: int, rng: np.random.Generator) -> Array:
    """Haar-distributed unitary via QR with phase fixing."""
    q, r = np.linalg.qr(random_complex(rng, (d, d)))
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_involution(d: int, rng: np.random.Generator) -> Array:
    """Random Hermitian O with O^2 = 1 (random +-1 spectrum, Haar basis)."""
    signs = rng.integers(0, 2, size=d) * 2 - 1
    if np.all(signs == signs[0]):
        signs[rng.integers(0, d)] *= -1  # avoid the scalar +-identity
    u = random_unitary(d, rng)
    return (u * signs) @ dagger(u)


def random_bounded_observable(d: int, rng: np.random.Generator) -> Array:
    """Random Hermitian O with spectrum in [-1, 1] (generally non-projective)."""
    vals = rng.uniform(-1.0, 1.0, size=d)
    u = random_unitary(d, rng)
    return (u * vals) @ dagger(u)


def random_psd(d: int, rng: np.random.Generator) -> Array:
    g = random_complex(rng, (d, d))
    return g @ dagger(g)


def random_state(d: int, rng: np.random.Generator) -> Array:
    """Random full-rank density matrix (Wishart normalized to unit trace)."""
    p = random_psd(d, rng) + 1e-3 * np.eye(d)
    return p / np.trace(p).real


def random_pure_state(d: int, rng: np.random.Generator) -> Array:
    v = random_complex(rng, (d,))
    return v / np.linalg.norm(v)
