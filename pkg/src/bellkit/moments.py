"""Bridge from moment skeletons to the dense SDP solver.

The Hermitian moment matrix is parametrized by one real variable per
self-adjoint word class and a (Re, Im) pair per conjugate class pair, then
passed through the real symmetric embedding. The resulting linear matrix
inequality is posed as the dual side of a standard-form problem, so the
solver's primal side furnishes a certified bound through weak duality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .npa import MomentSkeleton, Polynomial, build_basis, build_skeleton, poly_to_moments
from .sdp import (
    CertifiedBound,
    SdpProblem,
    SdpSolution,
    SparseConstraints,
    certified_upper_bound,
    solve,
)

Array = np.ndarray


class InfeasibleMomentProblem(RuntimeError):
    """The constrained moment set appears empty (e.g. beta above the quantum value)."""


@dataclass(frozen=True)
class MomentRelaxation:
    """Embedded generators of the moment matrix over real variables.

    With ``real_moments`` the imaginary components are dropped. This is
    sound for objectives and constraints built from Hermitian polynomials:
    mixing any realization with its transpose yields a realization whose
    moment matrix is the real part of the original, with every Hermitian
    expectation unchanged, so the real-restricted optimum still bounds all
    quantum realizations (and is tighter).
    """

    skeleton: MomentSkeleton
    var_class: Array  # class id per variable
    var_is_im: Array  # bool per variable
    triplets: tuple  # per variable: (rows, cols, vals) in the embedded 2n space
    real_moments: bool

    @property
    def n_vars(self) -> int:
        return len(self.var_class)

    @property
    def embedded_dim(self) -> int:
        return 2 * self.skeleton.size


def build_relaxation(sk: MomentSkeleton, real_moments: bool = True) -> MomentRelaxation:
    n = sk.size
    cid = sk.class_ids.ravel()
    conj = sk.conjugated.ravel()
    ii, jj = np.divmod(np.arange(n * n), n)
    order = np.argsort(cid, kind="stable")
    cid_s, conj_s, ii_s, jj_s = cid[order], conj[order], ii[order], jj[order]
    bounds = np.searchsorted(cid_s, np.arange(sk.n_classes + 1))
    var_class: list[int] = []
    var_is_im: list[bool] = []
    triplets: list[tuple[Array, Array, Array]] = []
    for c in range(1, sk.n_classes):  # class 0 is the fixed identity
        sl = slice(bounds[c], bounds[c + 1])
        i, j, s = ii_s[sl], jj_s[sl], np.where(conj_s[sl], -1.0, 1.0)
        rows = np.concatenate([i, i + n])
        cols = np.concatenate([j, j + n])
        vals = np.ones(2 * len(i))
        var_class.append(c)
        var_is_im.append(False)
        triplets.append((rows, cols, vals))
        if not sk.self_adjoint[c] and not real_moments:
            rows = np.concatenate([i, i + n])
            cols = np.concatenate([j + n, j])
            vals = np.concatenate([-s, s])
            var_class.append(c)
            var_is_im.append(True)
            triplets.append((rows, cols, vals))
    return MomentRelaxation(
        skeleton=sk,
        var_class=np.asarray(var_class, dtype=np.intp),
        var_is_im=np.asarray(var_is_im, dtype=bool),
        triplets=tuple(triplets),
        real_moments=bool(real_moments),
    )


@lru_cache(maxsize=32)
def cached_relaxation(
    level: str,
    settings: int = 3,
    commuting_a: tuple = (),
    commuting_b: tuple = (),
    real_moments: bool = True,
) -> MomentRelaxation:
    ca = frozenset(tuple(sorted(p)) for p in commuting_a)
    cb = frozenset(tuple(sorted(p)) for p in commuting_b)
    basis = build_basis(level, settings, ca, cb)
    return build_relaxation(build_skeleton(basis, ca, cb), real_moments)


def _poly_vector(rel: MomentRelaxation, p: Polynomial) -> tuple[Array, float]:
    """Coefficients of <p> over the relaxation variables, plus the offset."""
    wr, wi, offset = poly_to_moments(p, rel.skeleton)
    vec = np.zeros(rel.n_vars)
    for k in range(rel.n_vars):
        c = rel.var_class[k]
        vec[k] = wi[c] if rel.var_is_im[k] else wr[c]
    # imaginary weights on self-adjoint classes must cancel for Hermitian polys
    sa = np.asarray(rel.skeleton.self_adjoint)
    stray = np.abs(wi[sa]).max() if sa.any() else 0.0
    if stray > 1e-10:
        raise ValueError("polynomial is not Hermitian over the moment variables")
    return vec, offset


@dataclass
class MomentResult:
    """Outcome of one moment-program solve.

    ``value`` is the solver's inner estimate of the optimum; ``bound`` is
    the certified one-sided bound (upper for sense 'max', lower for 'min').
    """

    value: float
    bound: float
    slack: float
    sense: str
    status: str
    iterations: int
    solution: SdpSolution


def solve_moment_program(
    rel: MomentRelaxation,
    objective: Polynomial,
    sense: str = "max",
    equalities: tuple = (),
    tol: float = 1e-8,
) -> MomentResult:
    """Optimize <objective> over PSD moment matrices with unit normalization.

    ``equalities`` is a sequence of (Polynomial, value) pairs, e.g. a fixed
    Bell violation. Equalities are eliminated by deterministic pivoting, and
    the problem is handed to the SDP solver with the moment matrix on the
    dual side.
    """
    if sense not in ("min", "max"):
        raise ValueError("sense must be 'min' or 'max'")
    nemb = rel.embedded_dim
    obj_vec, base = _poly_vector(rel, objective)
    # pose the maximization of sign * (<objective> - base) internally
    sign = 1.0 if sense == "max" else -1.0
    o = sign * obj_vec

    gens = [
        (np.array(r, dtype=np.intp), np.array(c, dtype=np.intp), np.array(v, dtype=float))
        for r, c, v in rel.triplets
    ]
    m0 = np.eye(nemb)
    pivot_const = 0.0
    active = np.ones(rel.n_vars, dtype=bool)
    subs: list[tuple[int, Array, float]] = []  # z_p = t - gbar . z, gbar[p] = 0

    for poly, target in equalities:
        g, g_off = _poly_vector(rel, poly)
        t_g = float(target) - g_off
        for p_prev, gbar_prev, t_prev in subs:
            coeff = g[p_prev]
            if coeff != 0.0:
                t_g -= coeff * t_prev
                g = g - coeff * gbar_prev
                g[p_prev] = 0.0
        if float(np.max(np.abs(g))) < 1e-12:
            raise ValueError("equality constraint is redundant or contradictory after elimination")
        p = int(np.argmax(np.abs(g)))
        gp = g[p]
        t = t_g / gp
        gbar = g / gp
        gbar[p] = 0.0
        pr, pc, pv = gens[p]
        m0 = m0 + t * _dense_from_triplet(pr, pc, pv, nemb)
        for k in np.nonzero(np.abs(gbar) > 1e-15)[0]:
            r, c, v = gens[k]
            gens[k] = (
                np.concatenate([r, pr]),
                np.concatenate([c, pc]),
                np.concatenate([v, -gbar[k] * pv]),
            )
        pivot_const += o[p] * t
        o = o - o[p] * gbar
        o[p] = 0.0
        active[p] = False
        subs.append((p, gbar, t))

    keep = np.nonzero(active)[0]
    cons = SparseConstraints.from_triplets([_negate(gens[k]) for k in keep], nemb)
    problem = SdpProblem(
        dim=nemb,
        objective=(m0 + m0.T) / 2.0,
        constraints=cons,
        b=o[keep],
        sense="min",
    )
    sol = solve(problem, tol=tol)
    if sol.status == "infeasible-suspected":
        raise InfeasibleMomentProblem(
            "moment program appears infeasible (constraint outside the relaxed set)"
        )
    cert: CertifiedBound = certified_upper_bound(sol, problem)
    # internal maximum of sign * (<objective> - base) = pivot_const + V
    value = base + sign * (pivot_const + sol.dual_objective)
    bound = base + sign * (pivot_const + cert.value)
    return MomentResult(
        value=value,
        bound=bound,
        slack=cert.slack,
        sense=sense,
        status=sol.status,
        iterations=sol.iterations,
        solution=sol,
    )


def _dense_from_triplet(r: Array, c: Array, v: Array, n: int) -> Array:
    out = np.zeros((n, n))
    np.add.at(out, (r, c), v)
    return out


def _negate(t: tuple[Array, Array, Array]) -> tuple[Array, Array, Array]:
    r, c, v = t
    return r, c, -v
