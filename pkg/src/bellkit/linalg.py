"""Dense complex linear algebra primitives shared by every other module.

Matrices are plain ``numpy.ndarray`` with complex entries; all functions are
pure and never mutate their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray

DEFAULT_HERMITIAN_TOL = 1e-9
PSD_CLIP = 1e-10


class NotHermitianError(ValueError):
    """Input failed the Hermiticity check; carries the measured asymmetry."""

    def __init__(self, max_asymmetry: float, tolerance: float):
        self.max_asymmetry = float(max_asymmetry)
        self.tolerance = float(tolerance)
        super().__init__(
            f"matrix is not Hermitian: ||M - M^dag||_F = {max_asymmetry:.3e} "
            f"> tolerance {tolerance:.3e}"
        )


class NotPSDError(ValueError):
    """Input failed the positive-semidefiniteness check."""

    def __init__(self, min_eigenvalue: float, threshold: float = -PSD_CLIP):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"matrix is not PSD: min eigenvalue {min_eigenvalue:.3e} < {threshold:.1e}"
        )


@dataclass(frozen=True)
class HermitianCheck:
    """Result of a Hermiticity test: accepted iff max_asymmetry <= tolerance."""

    max_asymmetry: float
    tolerance: float

    @property
    def accepted(self) -> bool:
        return self.max_asymmetry <= self.tolerance


def dagger(m: Array) -> Array:
    return np.conj(m.T)


def hermitian_check(m: Array, tol: float = DEFAULT_HERMITIAN_TOL) -> HermitianCheck:
    """Measure ||M - M^dag||_F against ``tol`` relative to (1 + ||M||_F)."""
    m = np.asarray(m)
    asym = float(np.linalg.norm(m - dagger(m)))
    return HermitianCheck(asym, tol * (1.0 + float(np.linalg.norm(m))))


def require_hermitian(m: Array, tol: float = DEFAULT_HERMITIAN_TOL) -> Array:
    check = hermitian_check(m, tol)
    if not check.accepted:
        raise NotHermitianError(check.max_asymmetry, check.tolerance)
    return (m + dagger(m)) / 2.0


def kron(a: Array, b: Array) -> Array:
    """Kronecker product (dimensions multiply)."""
    return np.kron(np.asarray(a), np.asarray(b))


def partial_trace(m: Array, dims: tuple[int, int], keep: str) -> Array:
    """Reduced operator of a bipartite matrix; ``keep`` is "A" or "B".

    The trace of the result equals the trace of the input.
    """
    da, db = int(dims[0]), int(dims[1])
    m = np.asarray(m)
    if m.shape != (da * db, da * db):
        raise ValueError(f"expected a {da * db}x{da * db} matrix, got {m.shape}")
    t = m.reshape(da, db, da, db)
    if keep in ("A", "a", 0):
        return np.trace(t, axis1=1, axis2=3)
    if keep in ("B", "b", 1):
        return np.trace(t, axis1=0, axis2=2)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def reorder_systems(m: Array, dims: tuple[int, ...], perm: tuple[int, ...]) -> Array:
    """Permute tensor factors of a square operator.

    ``perm[k]`` names the old position that ends up at new position ``k``.
    """
    dims = tuple(int(d) for d in dims)
    n = int(np.prod(dims))
    m = np.asarray(m)
    if m.shape != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix, got {m.shape}")
    if sorted(perm) != list(range(len(dims))):
        raise ValueError(f"perm {perm!r} is not a permutation of {len(dims)} factors")
    k = len(dims)
    t = m.reshape(dims + dims)
    axes = tuple(perm) + tuple(p + k for p in perm)
    new_dims = tuple(dims[p] for p in perm)
    return t.transpose(axes).reshape(int(np.prod(new_dims)), -1)


def hermitian_eig(m: Array, tol: float = DEFAULT_HERMITIAN_TOL) -> tuple[Array, Array]:
    """Eigendecomposition of a Hermitian matrix.

    Returns eigenvalues in ascending order and the matrix whose columns are
    the corresponding orthonormal eigenvectors. Raises
    :class:`NotHermitianError` when the input is not Hermitian within ``tol``
    (relative to the Frobenius norm).
    """
    h = require_hermitian(m, tol)
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def frobenius_norm(m: Array) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def operator_norm(m: Array) -> float:
    """Largest singular value, via the Hermitian spectrum of M^dag M."""
    m = np.asarray(m)
    gram = dagger(m) @ m
    vals = np.linalg.eigvalsh((gram + dagger(gram)) / 2.0)
    return float(np.sqrt(max(0.0, float(vals[-1]))))


def norms(m: Array) -> tuple[float, float]:
    """(Frobenius norm, operator norm)."""
    return frobenius_norm(m), operator_norm(m)


def psd_sqrt(m: Array, tol: float = DEFAULT_HERMITIAN_TOL) -> Array:
    """Square root of a Hermitian PSD matrix.

    Eigenvalues in [-1e-10, 0) are clipped to zero; anything below raises
    :class:`NotPSDError`.
    """
    vals, vecs = hermitian_eig(m, tol)
    if vals[0] < -PSD_CLIP:
        raise NotPSDError(float(vals[0]))
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ dagger(vecs)


def min_eigenvalue(m: Array, tol: float = DEFAULT_HERMITIAN_TOL) -> float:
    vals, _ = hermitian_eig(m, tol)
    return float(vals[0])


_PAULI = {
    "1": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(tag: str) -> Array:
    """One of the 2x2 Pauli matrices; tag in {"1", "X", "Y", "Z"}."""
    try:
        return _PAULI[str(tag)].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli tag {tag!r}") from None


def paulis() -> tuple[Array, Array, Array, Array]:
    """(1, X, Y, Z)."""
    return pauli("1"), pauli("X"), pauli("Y"), pauli("Z")


def commutator(a: Array, b: Array) -> Array:
    return a @ b - b @ a


def anticommutator(a: Array, b: Array) -> Array:
    return a @ b + b @ a


def hs_inner(a: Array, b: Array) -> complex:
    """Hilbert-Schmidt inner product tr(A^dag B)."""
    return complex(np.trace(dagger(np.asarray(a)) @ np.asarray(b)))


def expectation(op: Array, rho: Array) -> float:
    """Real part of tr(O rho) for a (near-)Hermitian observable O."""
    return float(np.trace(np.asarray(op) @ np.asarray(rho)).real)


def bell_phi_plus() -> Array:
    """Maximally entangled two-qubit ket (|00> + |11>)/sqrt(2)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / np.sqrt(2.0)
    return v


def projector(ket: Array) -> Array:
    v = np.asarray(ket, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())
