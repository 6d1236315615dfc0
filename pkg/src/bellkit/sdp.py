"""Dense standard-form semidefinite programming.

Solves  min/max tr(C X)  s.t.  tr(A_i X) = b_i,  X >= 0  with a primal-dual
path-following method (HKM direction, Mehrotra predictor-corrector,
fraction-to-boundary 0.98, dense Cholesky of the Schur complement).
Constraint matrices are held in triplet form so the Schur complement can be
assembled in batched dense-times-sparse products; everything is
deterministic for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

Array = np.ndarray

SYMMETRY_TOL = 1e-12
DEFAULT_TOL = 1e-8
MAX_ITERATIONS = 200


class SdpNumericalError(RuntimeError):
    """Newton system broke down; carries condition diagnostics."""


def _sym(m: Array) -> Array:
    return (m + m.T) / 2.0


def _check_symmetric(m: Array, name: str) -> Array:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if dev > SYMMETRY_TOL * (1.0 + float(np.max(np.abs(m))) if m.size else 1.0):
        raise ValueError(f"{name} is not symmetric (max deviation {dev:.3e})")
    return _sym(m)


def hermitian_embed(h: Array) -> Array:
    """Real symmetric [[Re, -Im], [Im, Re]] embedding of a Hermitian matrix.

    PSD iff the input is PSD; the spectrum is duplicated, so traces and
    inner products double.
    """
    h = np.asarray(h, dtype=complex)
    re, im = h.real, h.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    return _sym(np.vstack([top, bot]))


@dataclass(frozen=True)
class SparseConstraints:
    """Concatenated triplet storage for m symmetric constraint matrices."""

    rows: Array
    cols: Array
    vals: Array
    ptr: Array  # length m + 1
    dim: int

    @property
    def m(self) -> int:
        return len(self.ptr) - 1

    @staticmethod
    def from_matrices(mats, dim: int) -> "SparseConstraints":
        rows, cols, vals, ptr = [], [], [], [0]
        for a in mats:
            a = _check_symmetric(a, "constraint matrix")
            r, c = np.nonzero(a)
            if len(r) == 0:
                raise ValueError("constraint matrices must be nonzero")
            rows.append(r)
            cols.append(c)
            vals.append(a[r, c])
            ptr.append(ptr[-1] + len(r))
        return SparseConstraints(
            rows=np.concatenate(rows) if rows else np.zeros(0, dtype=np.intp),
            cols=np.concatenate(cols) if cols else np.zeros(0, dtype=np.intp),
            vals=np.concatenate(vals) if vals else np.zeros(0),
            ptr=np.asarray(ptr, dtype=np.intp),
            dim=dim,
        )

    @staticmethod
    def from_triplets(triplets, dim: int) -> "SparseConstraints":
        """triplets: iterable of (rows, cols, vals) per constraint, full symmetric storage."""
        rows, cols, vals, ptr = [], [], [], [0]
        for r, c, v in triplets:
            if len(r) == 0:
                raise ValueError("constraint matrices must be nonzero")
            rows.append(np.asarray(r, dtype=np.intp))
            cols.append(np.asarray(c, dtype=np.intp))
            vals.append(np.asarray(v, dtype=float))
            ptr.append(ptr[-1] + len(r))
        return SparseConstraints(
            rows=np.concatenate(rows) if rows else np.zeros(0, dtype=np.intp),
            cols=np.concatenate(cols) if cols else np.zeros(0, dtype=np.intp),
            vals=np.concatenate(vals) if vals else np.zeros(0),
            ptr=np.asarray(ptr, dtype=np.intp),
            dim=dim,
        )

    def apply(self, m: Array) -> Array:
        """Vector (tr(A_i M))_i."""
        if self.m == 0:
            return np.zeros(0)
        prod = self.vals * m[self.cols, self.rows]
        return np.add.reduceat(prod, self.ptr[:-1])

    def adjoint(self, y: Array) -> Array:
        """Matrix sum_i y_i A_i."""
        out = np.zeros((self.dim, self.dim))
        if self.m == 0:
            return out
        counts = np.diff(self.ptr)
        ynnz = np.repeat(np.asarray(y, dtype=float), counts)
        np.add.at(out, (self.rows, self.cols), self.vals * ynnz)
        return _sym(out)

    def norms(self) -> Array:
        if self.m == 0:
            return np.zeros(0)
        return np.sqrt(np.add.reduceat(self.vals**2, self.ptr[:-1]))

    def matrix(self, i: int) -> Array:
        out = np.zeros((self.dim, self.dim))
        sl = slice(self.ptr[i], self.ptr[i + 1])
        np.add.at(out, (self.rows[sl], self.cols[sl]), self.vals[sl])
        return out

    def gram(self) -> Array:
        """Gram matrix tr(A_i A_j) (dense m x m)."""
        import scipy.sparse as sp

        n2 = self.dim * self.dim
        counts = np.diff(self.ptr)
        cons = np.repeat(np.arange(self.m), counts)
        v = sp.csr_matrix(
            (self.vals, (cons, self.rows * self.dim + self.cols)), shape=(self.m, n2)
        )
        return np.asarray((v @ v.T).todense())


@dataclass(frozen=True)
class SdpProblem:
    """min/max tr(C X) s.t. tr(A_i X) = b_i, X >= 0, in real symmetric form."""

    dim: int
    objective: Array
    constraints: SparseConstraints
    b: Array
    sense: str = "max"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        _check_symmetric(self.objective, "objective")
        if self.objective.shape != (self.dim, self.dim):
            raise ValueError("objective has wrong shape")
        if len(self.b) != self.constraints.m:
            raise ValueError("b length does not match the constraint count")

    @staticmethod
    def from_dense(dim: int, objective: Array, constraints, sense: str = "max") -> "SdpProblem":
        mats = [a for a, _ in constraints]
        b = np.array([float(v) for _, v in constraints])
        return SdpProblem(
            dim=dim,
            objective=_check_symmetric(objective, "objective"),
            constraints=SparseConstraints.from_matrices(mats, dim),
            b=b,
            sense=sense,
        )


@dataclass
class SdpSolution:
    X: Array
    y: Array
    Z: Array
    primal_objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    status: str
    iterations: int
    history: list = field(default_factory=list, repr=False)


def _schur(cons: SparseConstraints, zinv: Array, x: Array, batch_bytes: int = 48_000_000) -> Array:
    """S[i, j] = tr(A_i Z^-1 A_j X), assembled in batches of constraints."""
    m = cons.m
    n = cons.dim
    s = np.zeros((m, m))
    if m == 0:
        return s
    counts = np.diff(cons.ptr)
    batch = max(1, min(m, batch_bytes // (8 * n * n)))
    j0 = 0
    while j0 < m:
        j1 = min(m, j0 + batch)
        k = int(counts[j0:j1].max())
        nb = j1 - j0
        apad = np.zeros((nb, k), dtype=np.intp)
        bpad = np.zeros((nb, k), dtype=np.intp)
        vpad = np.zeros((nb, k))
        for t, j in enumerate(range(j0, j1)):
            sl = slice(cons.ptr[j], cons.ptr[j + 1])
            c = cons.ptr[j + 1] - cons.ptr[j]
            apad[t, :c] = cons.rows[sl]
            bpad[t, :c] = cons.cols[sl]
            vpad[t, :c] = cons.vals[sl]
        u = np.moveaxis(zinv[:, apad], 0, 1) * vpad[:, None, :]  # (nb, n, k)
        v = x[bpad, :]  # (nb, k, n)
        w = u @ v  # (nb, n, n): W_j = Z^-1 A_j X
        gathered = w[:, cons.cols, cons.rows] * cons.vals[None, :]  # (nb, nnz)
        block = np.add.reduceat(gathered, cons.ptr[:-1], axis=1)  # (nb, m)
        s[j0:j1, :] = block
        j0 = j1
    return _sym(s)


def _chol(m: Array, name: str):
    try:
        return sla.cholesky(m, lower=True, check_finite=False)
    except sla.LinAlgError as exc:
        evals = np.linalg.eigvalsh(m)
        raise SdpNumericalError(
            f"Cholesky of {name} failed: min eigenvalue {evals[0]:.3e}, "
            f"max {evals[-1]:.3e}, condition ~{abs(evals[-1] / evals[0]) if evals[0] != 0 else np.inf:.3e}"
        ) from exc


def _max_step(m_chol: Array, dm: Array) -> float:
    """Largest a with M + a dM >= 0, given the Cholesky factor of M."""
    w = sla.solve_triangular(m_chol, dm, lower=True, check_finite=False)
    w = sla.solve_triangular(m_chol, w.T, lower=True, check_finite=False)
    lam = float(np.linalg.eigvalsh(_sym(w))[0])
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def solve(problem: SdpProblem, tol: float = DEFAULT_TOL, max_iterations: int = MAX_ITERATIONS) -> SdpSolution:
    """Primal-dual interior-point solve of the standard pair.

    The reported dual pair is  min tr(C X)  <->  max b.y, Z = C - A*.y >= 0
    (objective signs are flipped internally for sense='max').
    """
    n = problem.dim
    cons = problem.constraints
    m = cons.m
    flip = -1.0 if problem.sense == "max" else 1.0
    c_raw = flip * problem.objective
    scale = float(np.linalg.norm(c_raw))
    c = c_raw / scale if scale > 0 else c_raw
    b = np.asarray(problem.b, dtype=float)

    anorms = cons.norms()
    bscale = float(np.max(np.abs(b) / (1.0 + anorms))) if m else 0.0
    tau = max(1.0, np.sqrt(n), n * bscale)
    sigma = max(1.0, np.sqrt(n), float(np.max(anorms)) if m else 0.0, float(np.linalg.norm(c)))
    x = tau * np.eye(n)
    z = sigma * np.eye(n)
    y = np.zeros(m)

    bnorm = 1.0 + float(np.linalg.norm(b))
    cnorm = 1.0 + float(np.linalg.norm(c))
    status = "max-iterations"
    history = []
    it = 0
    for it in range(1, max_iterations + 1):
        rp = b - cons.apply(x)
        rd = c - z - cons.adjoint(y)
        mu = float(np.vdot(x, z).real) / n
        pobj = float(np.vdot(c, x))
        dobj = float(b @ y)
        pinf = float(np.linalg.norm(rp)) / bnorm
        dinf = float(np.linalg.norm(rd)) / cnorm
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        history.append((pobj, dobj, pinf, dinf, mu))
        if pinf <= tol and dinf <= tol and (relgap <= tol or mu / (1.0 + abs(pobj)) <= tol):
            status = "optimal"
            break
        if pobj < -1e12 or float(np.trace(x)) > 1e14 or float(np.linalg.norm(y)) > 1e14:
            status = "infeasible-suspected"
            break

        try:
            lz = _chol(z, "Z")
            zinv = sla.cho_solve((lz, True), np.eye(n), check_finite=False)
            zinv = _sym(zinv)
            lx = _chol(x, "X")
        except SdpNumericalError:
            # an iterate touched the boundary to machine precision; the
            # current point still carries a certified bound, so stop here
            status = "max-iterations"
            break
        ls = None
        if m:
            s = _schur(cons, zinv, x)
            try:
                ls = sla.cholesky(
                    s + np.eye(m) * 1e-14 * (np.trace(s) / m), lower=True, check_finite=False
                )
            except sla.LinAlgError as exc:
                evals = np.linalg.eigvalsh(s)
                raise SdpNumericalError(
                    f"Schur complement not positive definite: min eig {evals[0]:.3e}, "
                    f"max {evals[-1]:.3e}; constraints may be linearly dependent"
                ) from exc

        zrx = zinv @ rd @ x
        ax = cons.apply(x)
        azinv = cons.apply(zinv)

        # predictor: affine direction (nu = 0)
        rhs = rp + ax + cons.apply(zrx)
        dy_a = sla.cho_solve((ls, True), rhs, check_finite=False) if m else np.zeros(0)
        dz_a = _sym(rd - cons.adjoint(dy_a))
        dx_a = _sym(-x - zinv @ dz_a @ x)
        ap = min(1.0, 0.98 * _max_step(lx, dx_a))
        ad = min(1.0, 0.98 * _max_step(lz, dz_a))
        mu_aff = float(np.vdot(x + ap * dx_a, z + ad * dz_a).real) / n
        sig = min(1.0, max(1e-10, (max(mu_aff, 0.0) / mu) ** 3))
        nu = sig * mu

        # corrector with the second-order term
        t2 = zinv @ dz_a @ dx_a
        rhs = rp + ax + cons.apply(zrx) + cons.apply(t2) - nu * azinv
        dy = sla.cho_solve((ls, True), rhs, check_finite=False) if m else np.zeros(0)
        dz = _sym(rd - cons.adjoint(dy))
        dx = _sym(nu * zinv - x - zinv @ dz @ x - t2)
        ap = min(1.0, 0.98 * _max_step(lx, dx))
        ad = min(1.0, 0.98 * _max_step(lz, dz))
        if ap < 1e-10 and ad < 1e-10:
            status = "max-iterations"
            break
        x = _sym(x + ap * dx)
        y = y + ad * dy
        z = _sym(z + ad * dz)

    rp = b - cons.apply(x)
    rd = c - z - cons.adjoint(y)
    pobj = float(np.vdot(c, x))
    dobj = float(b @ y)
    return SdpSolution(
        X=x,
        y=scale * y,
        Z=scale * z,
        primal_objective=flip * scale * pobj,
        dual_objective=flip * scale * dobj,
        gap=scale * abs(pobj - dobj),
        primal_residual=float(np.linalg.norm(rp)),
        dual_residual=scale * float(np.linalg.norm(rd)),
        status=status,
        iterations=it,
        history=history,
    )


def _project_feasible(cons: SparseConstraints, b: Array, x: Array) -> tuple[Array, Array]:
    """Least-norm correction of X onto the affine constraint set."""
    r = b - cons.apply(x)
    if cons.m == 0 or float(np.linalg.norm(r)) == 0.0:
        return x, b - cons.apply(x)
    gram = cons.gram()
    delta = sla.solve(gram + np.eye(cons.m) * 1e-14 * (np.trace(gram) / cons.m), r, assume_a="pos")
    xp = _sym(x + cons.adjoint(delta))
    return xp, b - cons.apply(xp)


@dataclass(frozen=True)
class CertifiedBound:
    value: float
    slack: float
    rigorous: bool


def certified_upper_bound(sol: SdpSolution, problem: SdpProblem) -> CertifiedBound:
    """Rigorous upper bound on the problem's optimal value.

    max sense: from a corrected dual-feasible point (the slack matrix is
    shifted along an identity direction if one is available among the
    constraints, else the deficit is charged to the slack term).
    min sense: from a corrected primal-feasible point, since every feasible
    X upper-bounds the minimum.
    """
    cons = problem.constraints
    n = problem.dim
    if problem.sense == "min":
        xp, r = _project_feasible(cons, np.asarray(problem.b, float), sol.X)
        lam = float(np.linalg.eigvalsh(xp)[0])
        slack = 0.0
        if lam < 0.0:
            if cons.m == 0 or float(np.linalg.norm(cons.apply(np.eye(n)))) < 1e-12:
                xp = xp + (-lam + 1e-15) * np.eye(n)
            else:
                vals, vecs = np.linalg.eigh(xp)
                xp = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
                r = np.asarray(problem.b, float) - cons.apply(xp)
        rnorm = float(np.linalg.norm(r))
        slack += rnorm * (1.0 + float(np.linalg.norm(sol.y))) * 10.0
        value = float(np.vdot(problem.objective, xp))
        return CertifiedBound(value + slack, slack, True)

    # max sense: bound from the dual certificate of the internal min problem
    c_int = -problem.objective
    ztil = _sym(c_int - cons.adjoint(sol.y))
    lam = float(np.linalg.eigvalsh(ztil)[0])
    y = sol.y.copy()
    slack = 0.0
    rigorous = True
    if lam < 0.0:
        ident = None
        for i in range(cons.m):
            a = cons.matrix(i)
            if np.allclose(a, np.eye(n), atol=1e-12):
                ident = i
                break
        if ident is not None:
            y[ident] += lam - 1e-15
        else:
            slack += -lam * n * 10.0
            rigorous = False
    bound = -float(problem.b @ y)
    if not np.isfinite(bound):
        raise ValueError("dual certificate is wildly infeasible")
    return CertifiedBound(bound + slack, slack, rigorous)
