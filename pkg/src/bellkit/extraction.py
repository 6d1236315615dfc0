"""Qubit extraction channels built from local binary observables.

Two constructions are provided. Construction A generalizes the swap
isometry (it tolerates a second operator with S^2 <= 1); construction B is
a one-shot map whose X output component follows (R + S)/sqrt(2). Channels
are stored by their four Hermitian Pauli component operators, the combined
two-party extraction is evaluated through the sixteen Pauli coefficients,
and the fidelity-relevant C_X / C_Y / C_Z operators are exposed directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bellmodel import Realization, project_realization
from .linalg import (
    Array,
    bell_phi_plus,
    commutator,
    dagger,
    expectation,
    frobenius_norm,
    kron,
    operator_norm,
    partial_trace,
    paulis,
    projector,
    psd_sqrt,
    require_hermitian,
)

INVOLUTION_TOL = 1e-8
CHOI_PSD_TOL = 1e-9

SQRT2 = float(np.sqrt(2.0))


def _require_involution(m: Array, name: str) -> Array:
    m = require_hermitian(m)
    d = m.shape[0]
    if frobenius_norm(m @ m - np.eye(d)) > INVOLUTION_TOL * max(1.0, np.sqrt(d)):
        raise ValueError(f"{name} must satisfy {name}^2 = 1 within {INVOLUTION_TOL}")
    return m


def t_operator(r0: Array, s0: Array) -> Array:
    """T = (1/(4 sqrt 2)) [3(R + S) - (SRS + RSR)]; always -1 <= T <= 1."""
    r = _require_involution(r0, "r0")
    s = _require_involution(s0, "s0")
    return (3.0 * (r + s) - (s @ r @ s + r @ s @ r)) / (4.0 * SQRT2)


@dataclass(frozen=True)
class PauliChannel:
    """Channel to one qubit stored as Hermitian component operators.

    output(rho) = (1/2) [ <e1,rho> 1 + <eX,rho> X + <eY,rho> Y + <eZ,rho> Z ].
    e1 is the identity, so the map is trace preserving by construction.
    """

    e1: Array
    eX: Array
    eY: Array
    eZ: Array

    def __post_init__(self):
        d = self.e1.shape[0]
        for name in ("e1", "eX", "eY", "eZ"):
            op = getattr(self, name)
            if op.shape != (d, d):
                raise ValueError(f"{name} has shape {op.shape}, expected {(d, d)}")
            require_hermitian(op)
        if frobenius_norm(self.e1 - np.eye(d)) > 1e-9 * max(1.0, np.sqrt(d)):
            raise ValueError("e1 must be the identity (trace preservation)")

    @property
    def input_dim(self) -> int:
        return self.e1.shape[0]

    def components(self) -> tuple[Array, Array, Array, Array]:
        return self.e1, self.eX, self.eY, self.eZ

    def apply(self, rho: Array) -> Array:
        one, x, y, z = paulis()
        coeffs = [expectation(e, rho) for e in self.components()]
        out = 0.5 * (coeffs[0] * one + coeffs[1] * x + coeffs[2] * y + coeffs[3] * z)
        return out.astype(complex)


@dataclass(frozen=True)
class ChoiMatrix:
    """Choi operator of a PauliChannel, input register first."""

    matrix: Array
    input_dim: int

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.matrix + dagger(self.matrix)) / 2.0)[0])

    def is_cp(self, tol: float = CHOI_PSD_TOL) -> bool:
        return self.min_eigenvalue() >= -tol

    def apply(self, rho: Array) -> Array:
        """Contract the Choi operator against an input state."""
        d = self.input_dim
        c = self.matrix.reshape(d, 2, d, 2)
        return np.einsum("ab,aibj->ij", np.asarray(rho).T, c)


def choi(ch: PauliChannel) -> ChoiMatrix:
    """C = (1/2) sum_P conj(e_P) x P (input register first)."""
    _, x, y, z = paulis()
    d = ch.input_dim
    c = 0.5 * sum(kron(np.conj(e), p) for e, p in zip(ch.components(), (np.eye(2), x, y, z)))
    return ChoiMatrix(c.astype(complex), d)


def channel_a(r0: Array, s0: Array) -> PauliChannel:
    """Swap-isometry extraction channel; s0 only needs s0^2 <= 1.

    eX = (s0 - r0 s0 r0)/2, eY = (i/2)[s0, r0], eZ = r0. When {r0, s0} = 0
    the Z and X outputs equal <r0, rho> and <s0, rho> exactly.
    """
    r = _require_involution(r0, "r0")
    s = require_hermitian(s0)
    if operator_norm(s) > 1.0 + 1e-9:
        raise ValueError("s0 must satisfy s0^2 <= 1")
    d = r.shape[0]
    return PauliChannel(
        e1=np.eye(d, dtype=complex),
        eX=(s - r @ s @ r) / 2.0,
        eY=(0.5j * commutator(s, r)),
        eZ=r.astype(complex),
    )


def channel_b(r0: Array, s0: Array) -> PauliChannel:
    """One-shot extraction channel; both inputs must be involutions.

    eX = (1/(4 sqrt 2))[3(r0+s0) - (s0 r0 s0 + r0 s0 r0)],
    eZ = (1/(4 sqrt 2))[3(r0-s0) - (s0 r0 s0 - r0 s0 r0)],
    eY = (i/2)[s0, r0]. When {r0, s0} = 0 the X output follows
    (r0 + s0)/sqrt(2) and the Z output (r0 - s0)/sqrt(2).
    """
    r = _require_involution(r0, "r0")
    s = _require_involution(s0, "s0")
    srs = s @ r @ s
    rsr = r @ s @ r
    d = r.shape[0]
    ch = PauliChannel(
        e1=np.eye(d, dtype=complex),
        eX=(3.0 * (r + s) - (srs + rsr)) / (4.0 * SQRT2),
        eZ=(3.0 * (r - s) - (srs - rsr)) / (4.0 * SQRT2),
        eY=(0.5j * commutator(s, r)),
    )
    c = choi(ch)
    if not c.is_cp():
        raise AssertionError(
            f"construction-B Choi operator has eigenvalue {c.min_eigenvalue():.3e} < 0; "
            "this should be unreachable for involution inputs"
        )
    return ch


def kraus_channel_a(r0: Array, s0: Array) -> list[Array]:
    """Kraus operators of construction A, from the explicit circuit.

    Used as an independent cross-check of the coefficient form; covers the
    generalized case s0^2 <= 1 via the two-element Kraus completion.
    """
    r = _require_involution(r0, "r0")
    s = require_hermitian(s0)
    d = r.shape[0]
    ident = np.eye(d)
    ket0 = np.array([[1.0], [0.0]])
    ket1 = np.array([[0.0], [1.0]])
    v1 = (kron(ket0, ident) + kron(ket1, r)) / SQRT2  # 2d x d isometry
    had = np.array([[1.0, 1.0], [1.0, -1.0]]) / SQRT2
    v21 = kron(had, ident) @ v1
    gap = ident - s @ s
    gap = (gap + dagger(gap)) / 2.0
    k0 = kron(projector(ket0.ravel()), ident) + kron(projector(ket1.ravel()), s)
    ks = [k0]
    if frobenius_norm(gap) > 1e-12 * d:
        ks.append(kron(projector(ket1.ravel()), psd_sqrt(gap)))
    kraus = []
    for k in ks:
        w = k @ v21  # 2d x d
        w = w.reshape(2, d, d)
        for j in range(d):
            kraus.append(w[:, j, :])  # 2 x d block <j| on the traced register
    return kraus


def apply_kraus(kraus: list[Array], rho: Array) -> Array:
    out = sum(k @ rho @ dagger(k) for k in kraus)
    return np.asarray(out, dtype=complex)


def alice_channel(r: Realization) -> PauliChannel:
    """Construction A with R = A2 and S = T(A0, A1)."""
    a0, a1, a2 = r.A
    return channel_a(a2, t_operator(a0, a1))


def bob_channel(r: Realization) -> PauliChannel:
    """Construction B with R = B0 and S = B1."""
    b0, b1, _ = r.B
    return channel_b(b0, b1)


def combined_extraction(r: Realization) -> Array:
    """Two-qubit output (Lambda_A x Lambda_B)(rho) via the 16 Pauli coefficients.

    Non-projective observables are sign-projected first; that projection is
    the first stage of the extraction.
    """
    r = project_realization(r)
    cha = alice_channel(r)
    chb = bob_channel(r)
    _, x, y, z = paulis()
    qubit = (np.eye(2), x, y, z)
    sigma = np.zeros((4, 4), dtype=complex)
    for ea, pa in zip(cha.components(), qubit):
        for eb, pb in zip(chb.components(), qubit):
            coeff = expectation(kron(ea, eb), r.state)
            sigma += 0.25 * coeff * kron(pa, pb)
    return sigma


def c_operators(r: Realization) -> tuple[Array, Array, Array]:
    """Operators with <sigma, P x P> = <C_P, rho> for P in {X, Y, Z}."""
    r = project_realization(r)
    cha = alice_channel(r)
    chb = bob_channel(r)
    return (
        kron(cha.eX, chb.eX),
        kron(cha.eY, chb.eY),
        kron(cha.eZ, chb.eZ),
    )


def extracted_fidelity(r: Realization) -> float:
    """Fidelity of the extracted two-qubit state with the target Phi+."""
    sigma = combined_extraction(r)
    return expectation(projector(bell_phi_plus()), sigma)


@dataclass(frozen=True)
class TwirlReport:
    """Pauli-twirl positivity sums and the induced fidelity lower bounds."""

    xx: float
    yy: float
    zz: float
    sum_xx_yy_zz: float
    sum_mxx_myy_zz: float
    bound_xz: float  # (XX + ZZ)/2
    bound_yz: float  # (-YY + ZZ)/2


def pauli_twirl_bounds(tau: Array, tol: float = 1e-9) -> TwirlReport:
    """Check the two Bell-diagonal positivity inequalities on a 2-qubit state."""
    tau = require_hermitian(np.asarray(tau, dtype=complex))
    if tau.shape != (4, 4):
        raise ValueError("tau must be a two-qubit (4x4) state")
    if np.linalg.eigvalsh(tau)[0] < -tol or abs(np.trace(tau).real - 1.0) > tol:
        raise ValueError("tau is not a density matrix")
    _, x, y, z = paulis()
    xx = expectation(kron(x, x), tau)
    yy = expectation(kron(y, y), tau)
    zz = expectation(kron(z, z), tau)
    s1 = xx + yy + zz
    s2 = -xx - yy + zz
    if s1 > 1.0 + tol or s2 > 1.0 + tol:
        raise AssertionError("Pauli-twirl positivity violated; tau is not a state")
    return TwirlReport(xx, yy, zz, s1, s2, 0.5 * (xx + zz), 0.5 * (-yy + zz))
