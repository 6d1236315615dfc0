"""The one-parameter family of three-setting correlation Bell functionals.

Covers the classical/quantum values, the Bell operator and its algebraic
sum-of-squares certificate, the one-parameter family of ideal two-qubit
realizations, the block operator R(u, v) with its top eigenvalue, correlator
tables, optimality diagnostics, and the Jordan two-by-two block machinery
used to characterize maximal violators.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    Array,
    anticommutator,
    bell_phi_plus,
    dagger,
    expectation,
    frobenius_norm,
    hermitian_eig,
    kron,
    operator_norm,
    partial_trace,
    projector,
    psd_sqrt,
    reorder_systems,
    require_hermitian,
    pauli,
)

OBS_NORM_TOL = 1e-9
STATE_TOL = 1e-9
FULL_RANK_TOL = 1e-10


class RankDeficientError(ValueError):
    """A reduced state is not full-rank; truncate_support() first."""


@dataclass(frozen=True)
class BellFunctional:
    """Member of the family, labelled by alpha in the open interval (0, 2)."""

    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not 0.0 < a < 2.0:
            raise ValueError(
                f"alpha must lie in the open interval (0, 2); got {a} "
                "(at the endpoints the classical and quantum values coincide, "
                "so no quantum property can be certified)"
            )

    @property
    def theta(self) -> float:
        """Measurement angle arcsin(alpha / 2)."""
        return float(np.arcsin(self.alpha / 2.0))

    def coefficients(self) -> Array:
        """3x3 coefficient grid c[x][y] multiplying <A_x B_y>."""
        a = self.alpha
        return np.array([[1.0, 1.0, a], [1.0, 1.0, -a], [a, -a, 0.0]])


def classical_value(f: BellFunctional) -> float:
    """Largest value over local-deterministic models: 4 max(1, alpha)."""
    return 4.0 * max(1.0, float(f.alpha))


def classical_value_brute_force(f: BellFunctional) -> float:
    """Exhaustive maximum over all 2^6 deterministic +-1 assignments."""
    coeff = f.coefficients()
    best = -np.inf
    for bits in range(64):
        a = [1 - 2 * ((bits >> i) & 1) for i in range(3)]
        b = [1 - 2 * ((bits >> (i + 3)) & 1) for i in range(3)]
        val = sum(coeff[x, y] * a[x] * b[y] for x in range(3) for y in range(3))
        best = max(best, val)
    return float(best)


def quantum_value(f: BellFunctional) -> float:
    """Largest value over quantum models: 4 + alpha^2."""
    return 4.0 + float(f.alpha) ** 2


@dataclass(frozen=True)
class Realization:
    """A bipartite strategy: three binary observables per party and a state.

    Observables are Hermitian with operator norm at most 1 + 1e-9;
    projectivity (O^2 = 1) is not assumed. The state is a PSD unit-trace
    density matrix on dimA * dimB whose reduced states are full-rank.
    """

    A: tuple[Array, Array, Array]
    B: tuple[Array, Array, Array]
    state: Array
    dimA: int
    dimB: int

    def __post_init__(self):
        dA, dB = int(self.dimA), int(self.dimB)
        for name, ops, d in (("A", self.A, dA), ("B", self.B, dB)):
            if len(ops) != 3:
                raise ValueError(f"{name} must contain exactly 3 observables")
            for k, op in enumerate(ops):
                if op.shape != (d, d):
                    raise ValueError(f"{name}_{k} has shape {op.shape}, expected {(d, d)}")
                require_hermitian(op)
                if operator_norm(op) > 1.0 + OBS_NORM_TOL:
                    raise ValueError(f"{name}_{k} has operator norm > 1 + {OBS_NORM_TOL}")
        rho = self.state
        if rho.shape != (dA * dB, dA * dB):
            raise ValueError(f"state has shape {rho.shape}, expected {(dA * dB, dA * dB)}")
        require_hermitian(rho)
        vals = np.linalg.eigvalsh((rho + dagger(rho)) / 2.0)
        if vals[0] < -STATE_TOL:
            raise ValueError(f"state is not PSD (min eigenvalue {vals[0]:.3e})")
        if abs(np.trace(rho).real - 1.0) > STATE_TOL:
            raise ValueError(f"state trace {np.trace(rho).real} != 1")
        for tag, red in (("A", self.reduced("A")), ("B", self.reduced("B"))):
            if np.linalg.eigvalsh(red)[0] < FULL_RANK_TOL:
                raise RankDeficientError(
                    f"reduced state on {tag} is rank-deficient; apply "
                    "truncate_support() to restrict to the local supports"
                )

    @classmethod
    def from_vector(cls, A, B, ket: Array, dimA: int, dimB: int) -> "Realization":
        return cls(tuple(A), tuple(B), projector(np.asarray(ket)), dimA, dimB)

    def reduced(self, party: str) -> Array:
        return partial_trace(self.state, (self.dimA, self.dimB), party)

    def is_projective(self, tol: float = 1e-8) -> bool:
        return all(
            frobenius_norm(op @ op - np.eye(op.shape[0])) <= tol * max(1.0, op.shape[0])
            for op in (*self.A, *self.B)
        )


def sign_projection(obs: Array, tol: float = 1e-9) -> Array:
    """Replace a bounded observable by the sign of its spectrum.

    Eigenvalues >= 0 map to +1 (the zero eigenvalue tie-breaks to +1),
    the rest to -1; the result is an involution.
    """
    vals, vecs = hermitian_eig(obs, tol)
    signs = np.where(vals >= 0.0, 1.0, -1.0)
    return (vecs * signs) @ dagger(vecs)


def project_realization(r: Realization) -> Realization:
    """Sign-project every observable; the state is unchanged."""
    if r.is_projective():
        return r
    return Realization(
        tuple(sign_projection(a) for a in r.A),
        tuple(sign_projection(b) for b in r.B),
        r.state,
        r.dimA,
        r.dimB,
    )


def truncate_support(A, B, state: Array, dimA: int, dimB: int, tol: float = FULL_RANK_TOL) -> Realization:
    """Restrict observables and state to the supports of the reduced states."""
    rho = np.asarray(state, dtype=complex)
    rho_a = partial_trace(rho, (dimA, dimB), "A")
    rho_b = partial_trace(rho, (dimA, dimB), "B")
    bases = []
    for red in (rho_a, rho_b):
        vals, vecs = hermitian_eig(red)
        keep = vals > tol
        if not np.any(keep):
            raise ValueError("state has (numerically) empty support")
        bases.append(vecs[:, keep])
    va, vb = bases
    big = kron(va, vb)
    new_state = dagger(big) @ rho @ big
    new_state = new_state / np.trace(new_state).real
    newA = tuple(dagger(va) @ a @ va for a in A)
    newB = tuple(dagger(vb) @ b @ vb for b in B)
    return Realization(newA, newB, new_state, va.shape[1], vb.shape[1])


def bell_operator(f: BellFunctional, r: Realization) -> Array:
    """W = A0 (B0+B1+a B2) + A1 (B0+B1-a B2) + a A2 (B0-B1) as a tensor operator."""
    a = f.alpha
    A0, A1, A2 = r.A
    B0, B1, B2 = r.B
    w = (
        kron(A0, B0 + B1 + a * B2)
        + kron(A1, B0 + B1 - a * B2)
        + a * kron(A2, B0 - B1)
    )
    return (w + dagger(w)) / 2.0


def bell_value(f: BellFunctional, r: Realization) -> float:
    return expectation(bell_operator(f, r), r.state)


def sos_operators(f: BellFunctional, r: Realization) -> tuple[Array, Array, Array]:
    """The three first-degree polynomials whose squares certify the quantum bound."""
    a = f.alpha
    A0, A1, A2 = r.A
    B0, B1, B2 = r.B
    iA = np.eye(r.dimA)
    iB = np.eye(r.dimB)
    l0 = kron(A0 + A1, iB) - kron(iA, B0 + B1)
    l1 = kron(A0 - A1, iB) - a * kron(iA, B2)
    l2 = a * kron(A2, iB) - kron(iA, B0 - B1)
    return l0, l1, l2


def sos_residual(f: BellFunctional, r: Realization) -> float:
    """Frobenius defect of the algebraic certificate identity.

    2W = (2A0^2 + 2A1^2 + a^2 A2^2) x 1 + 1 x (2B0^2 + 2B1^2 + a^2 B2^2)
         - sum_j L_j^2
    holds for arbitrary Hermitian observables, so the result is ~0 always.
    """
    a = f.alpha
    A0, A1, A2 = r.A
    B0, B1, B2 = r.B
    iA = np.eye(r.dimA)
    iB = np.eye(r.dimB)
    w2 = 2.0 * bell_operator(f, r)
    head = kron(2 * A0 @ A0 + 2 * A1 @ A1 + a * a * A2 @ A2, iB) + kron(
        iA, 2 * B0 @ B0 + 2 * B1 @ B1 + a * a * B2 @ B2
    )
    squares = sum(l @ l for l in sos_operators(f, r))
    return frobenius_norm(w2 - (head - squares))


def ideal_observables(f: BellFunctional, u: float) -> tuple[tuple[Array, ...], tuple[Array, ...]]:
    """The two-qubit observables of the ideal realization with block angle u."""
    th = f.theta
    X, Y, Z = pauli("X"), pauli("Y"), pauli("Z")
    c, s = np.cos(th), np.sin(th)
    a0 = c * X + s * Z
    a1 = c * X - s * Z
    a2 = np.cos(u) * Y + np.sin(u) * Z
    nb = -np.cos(u) * Y + np.sin(u) * Z
    b0 = c * X + s * nb
    b1 = c * X - s * nb
    b2 = Z.copy()
    return (a0, a1, a2), (b0, b1, b2)


def ideal_realization(f: BellFunctional, u: float = np.pi / 2) -> Realization:
    """Two-qubit maximal violator with angle u; u = pi/2 has A2 = B2 = Z."""
    A, B = ideal_observables(f, u)
    return Realization.from_vector(A, B, bell_phi_plus(), 2, 2)


def isotropic_state(eta: float) -> Array:
    """(1 - eta) |Phi+><Phi+| + eta 1/4."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    return (1.0 - eta) * projector(bell_phi_plus()) + eta * np.eye(4) / 4.0


def isotropic_realization(f: BellFunctional, eta: float, u: float = np.pi / 2) -> Realization:
    """Ideal measurements on the isotropic state of noise weight eta."""
    A, B = ideal_observables(f, u)
    return Realization(A, B, isotropic_state(eta), 2, 2)


def r_operator(f: BellFunctional, u: float, v: float) -> Array:
    """Two-qubit Bell operator for Alice angle u against Bob angle v."""
    A, _ = ideal_observables(f, u)
    _, B = ideal_observables(f, v)
    return bell_operator(f, Realization(A, B, np.eye(4) / 4.0, 2, 2))


def r_max_eigenvalue(f: BellFunctional, u: float, v: float) -> float:
    """Closed-form top eigenvalue 4 + a^2 (2 |cos((u - v)/2)| - 1).

    The absolute value makes the expression 2pi-periodic in u - v, matching
    the explicit matrix on the whole angle torus; the value 4 + alpha^2 is
    attained iff u = v (mod 2pi).
    """
    a = f.alpha
    return 4.0 + a * a * (2.0 * abs(np.cos((u - v) / 2.0)) - 1.0)


@dataclass(frozen=True)
class CorrelatorTable:
    """Marginals <A_x>, <B_y> and the full 3x3 grid of correlators."""

    marginals_a: tuple[float, float, float]
    marginals_b: tuple[float, float, float]
    correlators: Array  # 3x3, corr[x, y] = <A_x B_y>

    def __post_init__(self):
        vals = list(self.marginals_a) + list(self.marginals_b) + list(
            np.asarray(self.correlators).flatten()
        )
        if any(abs(v) > 1.0 + 1e-9 for v in vals):
            raise ValueError("correlator-table entries must lie in [-1, 1]")

    def bell_value(self, f: BellFunctional) -> float:
        return float(np.sum(f.coefficients() * np.asarray(self.correlators)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "value"])
        for x in range(3):
            for y in range(3):
                w.writerow([x, y, repr(float(self.correlators[x, y]))])
        for x in range(3):
            w.writerow([f"A{x}", "", repr(float(self.marginals_a[x]))])
        for y in range(3):
            w.writerow(["", f"B{y}", repr(float(self.marginals_b[y]))])
        return buf.getvalue()


def correlators(f: BellFunctional, u: float) -> CorrelatorTable:
    """Closed-form statistics of the ideal realization with angle u.

    Affine in sin(u): the set of maximal-violation behaviours is a line
    segment with extremal points u = pi/2 and u = 3 pi/2.
    """
    a2 = float(f.alpha) ** 2
    s = np.sin(u)
    half = float(f.alpha) / 2.0
    grid = np.array(
        [
            [1 - a2 / 4 * (1 - s), 1 - a2 / 4 * (1 + s), half],
            [1 - a2 / 4 * (1 + s), 1 - a2 / 4 * (1 - s), -half],
            [half, -half, s],
        ]
    )
    return CorrelatorTable((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), grid)


def correlators_from_realization(r: Realization) -> CorrelatorTable:
    """Correlator table measured directly on a realization."""
    rho_a = r.reduced("A")
    rho_b = r.reduced("B")
    ma = tuple(expectation(a, rho_a) for a in r.A)
    mb = tuple(expectation(b, rho_b) for b in r.B)
    grid = np.array(
        [[expectation(kron(a, b), r.state) for b in r.B] for a in r.A]
    )
    return CorrelatorTable(ma, mb, grid)


@dataclass(frozen=True)
class OptimalityReport:
    """Measured deviations from the exact maximal-violation conditions."""

    projectivity_a: tuple[float, float, float]  # <A_x^2, rho_A>
    projectivity_b: tuple[float, float, float]
    l_norms: tuple[float, float, float]  # ||L_j rho^(1/2)||_F
    anticomm_01_a: float  # ||{A0, A1} - (2 - a^2) 1||_inf
    anticomm_01_b: float
    anticomm_2_a: float  # ||{A0 + A1, A2}||_inf
    anticomm_2_b: float

    @property
    def max_deviation(self) -> float:
        devs = [abs(1.0 - p) for p in self.projectivity_a + self.projectivity_b]
        devs += list(self.l_norms)
        devs += [self.anticomm_01_a, self.anticomm_01_b, self.anticomm_2_a, self.anticomm_2_b]
        return max(devs)


def optimality_conditions(f: BellFunctional, r: Realization, tol: float = FULL_RANK_TOL) -> OptimalityReport:
    """Evaluate the algebraic conditions characterizing maximal violators."""
    rho_a = r.reduced("A")
    rho_b = r.reduced("B")
    if np.linalg.eigvalsh(rho_a)[0] < tol or np.linalg.eigvalsh(rho_b)[0] < tol:
        raise RankDeficientError(
            "reduced states must be full-rank for the optimality conditions; "
            "apply truncate_support() first"
        )
    sq = psd_sqrt(r.state)
    lops = sos_operators(f, r)
    shift = (2.0 - float(f.alpha) ** 2) * np.eye(r.dimA)
    shift_b = (2.0 - float(f.alpha) ** 2) * np.eye(r.dimB)
    return OptimalityReport(
        projectivity_a=tuple(expectation(a @ a, rho_a) for a in r.A),
        projectivity_b=tuple(expectation(b @ b, rho_b) for b in r.B),
        l_norms=tuple(frobenius_norm(l @ sq) for l in lops),
        anticomm_01_a=operator_norm(anticommutator(r.A[0], r.A[1]) - shift),
        anticomm_01_b=operator_norm(anticommutator(r.B[0], r.B[1]) - shift_b),
        anticomm_2_a=operator_norm(anticommutator(r.A[0] + r.A[1], r.A[2])),
        anticomm_2_b=operator_norm(anticommutator(r.B[0] + r.B[1], r.B[2])),
    )


def block_realization(
    f: BellFunctional,
    u_angles,
    v_angles,
    sigma: Array,
) -> Realization:
    """Direct-sum maximal violator: Phi+ on the qubits, sigma on the blocks.

    ``sigma`` is a density matrix on C^dA x C^dB; it must be supported on
    index pairs (j, k) with matching angles u_j = v_k for the construction
    to reach the quantum value.
    """
    th = f.theta
    X, Y, Z = pauli("X"), pauli("Y"), pauli("Z")
    c, s = np.cos(th), np.sin(th)
    dA, dB = len(u_angles), len(v_angles)
    iA = np.eye(dA)
    iB = np.eye(dB)
    a0 = kron(c * X + s * Z, iA)
    a1 = kron(c * X - s * Z, iA)
    a2 = sum(
        kron(np.cos(u) * Y + np.sin(u) * Z, projector(np.eye(dA)[:, j]))
        for j, u in enumerate(u_angles)
    )
    b2 = kron(Z, iB)
    b0 = np.zeros((2 * dB, 2 * dB), dtype=complex)
    b1 = np.zeros((2 * dB, 2 * dB), dtype=complex)
    for k, v in enumerate(v_angles):
        nb = -np.cos(v) * Y + np.sin(v) * Z
        pk = projector(np.eye(dB)[:, k])
        b0 = b0 + kron(c * X + s * nb, pk)
        b1 = b1 + kron(c * X - s * nb, pk)
    # state lives on (A' A'' B' B''); realizations order registers (A' A'')(B' B'')
    state = kron(projector(bell_phi_plus()), np.asarray(sigma, dtype=complex))
    state = reorder_systems(state, (2, 2, dA, dB), (0, 2, 1, 3))
    return Realization((a0, a1, a2), (b0, b1, b2), state, 2 * dA, 2 * dB)


@dataclass(frozen=True)
class BlockAngles:
    """Simultaneous 2x2 block decomposition of two Hermitian involutions.

    In the returned basis the k-th block reads
    R = cos(t_k) X + sin(t_k) Z and S = cos(t_k) X - sin(t_k) Z.
    Unpairable one-dimensional blocks (possible in odd dimensions or for
    scalar-like inputs) are appended after the 2x2 blocks as (r, s) signs.
    """

    angles: tuple[float, ...]
    basis: Array
    scalar_blocks: tuple[tuple[int, int], ...] = field(default=())

    def reconstruct(self) -> tuple[Array, Array]:
        X, Z = pauli("X"), pauli("Z")
        d = self.basis.shape[0]
        r = np.zeros((d, d), dtype=complex)
        s = np.zeros((d, d), dtype=complex)
        pos = 0
        for t in self.angles:
            r[pos : pos + 2, pos : pos + 2] = np.cos(t) * X + np.sin(t) * Z
            s[pos : pos + 2, pos : pos + 2] = np.cos(t) * X - np.sin(t) * Z
            pos += 2
        for rs, ss in self.scalar_blocks:
            r[pos, pos] = rs
            s[pos, pos] = ss
            pos += 1
        u = self.basis
        return u @ r @ dagger(u), u @ s @ dagger(u)


def _require_involution(m: Array, tol: float = 1e-8) -> Array:
    m = require_hermitian(m)
    d = m.shape[0]
    if frobenius_norm(m @ m - np.eye(d)) > tol * max(1.0, np.sqrt(d)):
        raise ValueError("operator is not an involution (O^2 != 1 within tolerance)")
    return m


def _loewdin(cols: Array) -> Array:
    """Symmetric orthonormalization of nearly-orthonormal columns."""
    g = dagger(cols) @ cols
    vals, vecs = np.linalg.eigh((g + dagger(g)) / 2.0)
    inv_sqrt = (vecs / np.sqrt(np.clip(vals, 1e-30, None))) @ dagger(vecs)
    return cols @ inv_sqrt


def _align_block(r2: Array, s2: Array, theta: float) -> Array:
    """2x2 unitary w with w^dag r2 w and w^dag s2 w in the angle-theta form."""
    X, Z = pauli("X"), pauli("Z")
    tr = np.cos(theta) * X + np.sin(theta) * Z
    ts = np.cos(theta) * X - np.sin(theta) * Z
    _, vr = np.linalg.eigh((r2 + dagger(r2)) / 2.0)
    _, vt = np.linalg.eigh(tr)
    w = vr @ dagger(vt)
    # per-eigenvector phase freedom remains; pin it with the S overlap
    m = dagger(w) @ s2 @ w
    ov = m[0, 1]
    tgt = ts[0, 1]
    if abs(ov) > 1e-12 and abs(tgt) > 1e-12:
        phase = (tgt / abs(tgt)) / (ov / abs(ov))
        w = w @ np.diag([1.0, phase])
    return w


def jordan_angles(r0: Array, s0: Array, cluster_tol: float = 1e-6) -> BlockAngles:
    """Simultaneously block-diagonalize two involutions into 2x2 blocks.

    The block angles t satisfy {R, S} = 2 cos(2t) 1 per block; parallel
    (t = 0) and anti-parallel (t = pi/2) sectors are paired up from the
    +-1 eigenvectors of R restricted to the sector.
    """
    r = _require_involution(r0)
    s = _require_involution(s0)
    d = r.shape[0]
    c_op = (r @ s + s @ r) / 2.0
    cvals, cvecs = np.linalg.eigh(c_op)
    # cluster the cos(2 theta) spectrum
    clusters: list[list[int]] = [[0]]
    for i in range(1, d):
        if cvals[i] - cvals[clusters[-1][0]] <= cluster_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    blocks: list[tuple[float, Array]] = []  # (angle, d x 2 column block)
    scalars: list[tuple[int, int, Array]] = []
    for idx in clusters:
        vc = cvecs[:, idx]
        c = float(np.mean(cvals[idx]))
        c = min(1.0, max(-1.0, c))
        rr = dagger(vc) @ r @ vc
        rr = (rr + dagger(rr)) / 2.0
        rvals, rvecs = np.linalg.eigh(rr)
        plus = vc @ rvecs[:, rvals > 0.0]
        minus = vc @ rvecs[:, rvals <= 0.0]
        if c >= 1.0 - cluster_tol or c <= -1.0 + cluster_tol:
            sgn = 1 if c > 0 else -1
            theta = 0.0 if sgn == 1 else np.pi / 2.0
            npairs = min(plus.shape[1], minus.shape[1])
            for j in range(npairs):
                cols = np.column_stack([plus[:, j], minus[:, j]])
                r2 = dagger(cols) @ r @ cols
                s2 = dagger(cols) @ s @ cols
                w = _align_block(r2, s2, theta)
                blocks.append((theta, cols @ w))
            for j in range(npairs, plus.shape[1]):
                scalars.append((1, sgn, plus[:, j]))
            for j in range(npairs, minus.shape[1]):
                scalars.append((-1, -sgn, minus[:, j]))
        else:
            theta = float(np.arccos(c) / 2.0)
            sin2t = np.sin(2 * theta)
            partners = (s @ plus - c * plus) / sin2t
            partners = _loewdin(partners)
            for j in range(plus.shape[1]):
                cols = np.column_stack([plus[:, j], partners[:, j]])
                r2 = dagger(cols) @ r @ cols
                s2 = dagger(cols) @ s @ cols
                w = _align_block(r2, s2, theta)
                blocks.append((theta, cols @ w))

    blocks.sort(key=lambda item: item[0])
    angle_list = tuple(t for t, _ in blocks)
    col_list = [cols for _, cols in blocks] + [v.reshape(-1, 1) for _, _, v in scalars]
    basis = np.column_stack(col_list) if col_list else np.eye(d, dtype=complex)
    if basis.shape != (d, d) or frobenius_norm(dagger(basis) @ basis - np.eye(d)) > 1e-7 * d:
        raise ValueError("block decomposition failed to produce a unitary basis")
    scalar_signs = tuple((rs, ss) for rs, ss, _ in scalars)
    return BlockAngles(angle_list, basis, scalar_signs)


def canonical_pair_basis(a0: Array, a1: Array) -> tuple[float, Array]:
    """Unitary sending (A0, A1) to (cos t X +- sin t Z) x 1 on C^2 x C^d.

    Requires every Jordan block of the pair to carry the same angle t
    (the situation of exact maximal violators); returns (t, U).
    """
    ba = jordan_angles(a0, a1)
    if ba.scalar_blocks:
        raise ValueError("observable pair has unpaired scalar sectors")
    angles = np.asarray(ba.angles)
    if angles.size == 0 or np.max(angles) - np.min(angles) > 1e-7:
        raise ValueError("observable pair does not have a uniform block angle")
    d = len(ba.angles)
    n = 2 * d
    # jordan basis orders columns (block j, qubit q); move the qubit first
    perm = np.zeros((n, n))
    for j in range(d):
        for q in range(2):
            perm[2 * j + q, q * d + j] = 1.0
    return float(np.mean(angles)), ba.basis @ perm


def _simultaneous_diag(h1: Array, h2: Array, tol: float = 1e-8) -> tuple[Array, Array, Array]:
    """Joint eigenbasis of two commuting Hermitian matrices."""
    vals1, vecs = np.linalg.eigh(h1)
    d = h1.shape[0]
    out = np.array(vecs, dtype=complex)
    i = 0
    while i < d:
        j = i
        while j + 1 < d and vals1[j + 1] - vals1[i] <= tol * (1 + abs(vals1[i])):
            j += 1
        if j > i:
            sub = out[:, i : j + 1]
            m2 = dagger(sub) @ h2 @ sub
            _, w = np.linalg.eigh((m2 + dagger(m2)) / 2.0)
            out[:, i : j + 1] = sub @ w
        i = j + 1
    d1 = np.real(np.einsum("ij,jk,ki->i", dagger(out), h1, out))
    d2 = np.real(np.einsum("ij,jk,ki->i", dagger(out), h2, out))
    return d1, d2, out


def third_observable_angles(a2_canonical: Array, d: int, tol: float = 1e-6) -> tuple[Array, Array]:
    """Block angles u_j of a third observable in the canonical pair basis.

    The input acts on C^2 x C^d and must anticommute with the X x 1
    direction; its Pauli components along Y and Z commute and decompose as
    cos(u_j) / sin(u_j) on a joint eigenbasis, which is returned together
    with the angles.
    """
    comps = {}
    for tag in ("1", "X", "Y", "Z"):
        p = pauli(tag)
        comps[tag] = partial_trace(kron(p, np.eye(d)) @ a2_canonical, (2, d), "B") / 2.0
    if frobenius_norm(comps["1"]) > tol or frobenius_norm(comps["X"]) > tol:
        raise ValueError("third observable has components outside the Y-Z plane")
    ty, tz = comps["Y"], comps["Z"]
    if frobenius_norm(ty @ tz - tz @ ty) > tol:
        raise ValueError("Y and Z components do not commute")
    dy, dz, basis = _simultaneous_diag(ty, tz)
    angles = np.mod(np.arctan2(dz, dy), 2 * np.pi)
    return angles, basis
