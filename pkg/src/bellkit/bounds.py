"""Analytic robustness bounds for the alpha = sqrt(2) functional.

Every bound is an explicit function of the violation deficit
eps = 6 - beta, together with a validator that measures each left-hand
quantity on a concrete realization and checks the inequality.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .bellmodel import BellFunctional, Realization, bell_value, sos_operators
from .extraction import c_operators, extracted_fidelity
from .linalg import (
    Array,
    anticommutator,
    expectation,
    frobenius_norm,
    kron,
    psd_sqrt,
)

SQRT2 = float(np.sqrt(2.0))

# Frobenius-norm constants; their squares are the second-moment constants.
ANTICOMM_01_FROB = 2.0 * (1.0 + SQRT2)  # ||{A0,A1} x 1 rho^(1/2)||_F <= c sqrt(eps)
ANTICOMM_2_FROB = 8.0 + 2.0 * SQRT2  # ||{A0+A1,A2} x 1 rho^(1/2)||_F <= c sqrt(eps)
ANTICOMM_01_SQ = 4.0 * (3.0 + 2.0 * SQRT2)
ANTICOMM_2_SQ = 8.0 * (9.0 + 4.0 * SQRT2)
CORR_SUM_CONST = 2.0 * (1.0 + 2.0 * SQRT2)
CX_CONST = 7.0 + 5.0 * SQRT2
CZ_CONST = 0.5 * (4.0 + SQRT2)
FIDELITY_CONST = 0.25 * (18.0 + 11.0 * SQRT2)


def theorem1_bounds(eps: float) -> tuple[float, float, float]:
    """(projectivity floor, <{A0,A1}^2> cap, <{A0+A1,A2}^2> cap)."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return 1.0 - eps, ANTICOMM_01_SQ * eps, ANTICOMM_2_SQ * eps


def theorem2_bound(eps: float) -> float:
    """Extracted-state fidelity floor 1 - (1/4)(18 + 11 sqrt 2) sqrt(eps)."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return max(0.0, 1.0 - FIDELITY_CONST * np.sqrt(eps))


def theorem2_raw(eps: float) -> float:
    """The fidelity floor without clipping at zero (for tests and curves)."""
    return 1.0 - FIDELITY_CONST * float(np.sqrt(eps))


def nontriviality_threshold() -> float:
    """Largest eps with a fidelity floor above 1/2: 4 / (18 + 11 sqrt 2)^2."""
    return 4.0 / (18.0 + 11.0 * SQRT2) ** 2


def isotropic_noise_threshold() -> float:
    """Noise weight where the analytic bound turns trivial (eps = 6 eta)."""
    return nontriviality_threshold() / 6.0


def lemma_chain(eps: float) -> dict[str, float]:
    """All intermediate bounds of the derivation, keyed by quantity."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    rt = float(np.sqrt(eps))
    return {
        "l_norm": float(np.sqrt(2.0 * eps)),
        "anticomm_01_frobenius": ANTICOMM_01_FROB * rt,
        "anticomm_2_frobenius": ANTICOMM_2_FROB * rt,
        "anticomm_01_second_moment": ANTICOMM_01_SQ * eps,
        "anticomm_2_second_moment": ANTICOMM_2_SQ * eps,
        "corr_a01_diff_b2": SQRT2 - np.sqrt(2.0 * eps),
        "corr_a2_b01_diff": SQRT2 - np.sqrt(2.0 * eps),
        "corr_a01_sum_b01_sum": 2.0 - CORR_SUM_CONST * rt,
        "c_x": 1.0 - CX_CONST * rt,
        "c_z": 1.0 - CZ_CONST * rt,
        "fidelity": 1.0 - FIDELITY_CONST * rt,
    }


@dataclass(frozen=True)
class BoundEntry:
    name: str
    measured: float
    bound: float
    satisfied: bool


@dataclass(frozen=True)
class EpsilonReport:
    """Every analytic bound evaluated at eps = 6 - beta on one realization."""

    beta: float
    epsilon: float
    entries: tuple[BoundEntry, ...]

    @property
    def all_satisfied(self) -> bool:
        return all(e.satisfied for e in self.entries)

    def violations(self) -> tuple[BoundEntry, ...]:
        return tuple(e for e in self.entries if not e.satisfied)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bound_name", "measured", "bound", "satisfied"])
        for e in self.entries:
            w.writerow([e.name, repr(e.measured), repr(e.bound), int(e.satisfied)])
        return buf.getvalue()


def validate_all(r: Realization, slack: float = 1e-9) -> EpsilonReport:
    """Measure every bounded quantity on ``r`` and compare with its bound.

    ``r`` must be projective (the extraction-dependent inequalities are
    stated for projective observables; projection is otherwise the first
    extraction step and changes the measured violation).
    """
    if not r.is_projective():
        raise ValueError("validate_all requires projective observables")
    f = BellFunctional(SQRT2)
    beta = bell_value(f, r)
    if beta > 6.0 + 1e-8:
        raise ValueError(f"beta = {beta} exceeds the quantum value 6; invalid realization")
    eps = max(0.0, 6.0 - beta)
    bounds = lemma_chain(eps)
    sq = psd_sqrt(r.state)
    rho_a = r.reduced("A")
    rho_b = r.reduced("B")
    iA = np.eye(r.dimA)
    iB = np.eye(r.dimB)
    entries: list[BoundEntry] = []

    def le(name: str, measured: float, bound: float) -> None:
        entries.append(BoundEntry(name, float(measured), float(bound), measured <= bound + slack))

    def ge(name: str, measured: float, bound: float) -> None:
        entries.append(BoundEntry(name, float(measured), float(bound), measured >= bound - slack))

    for x in range(3):
        ge(f"projectivity_A{x}", expectation(r.A[x] @ r.A[x], rho_a), 1.0 - eps)
        ge(f"projectivity_B{x}", expectation(r.B[x] @ r.B[x], rho_b), 1.0 - eps)
    for j, l in enumerate(sos_operators(f, r)):
        le(f"l{j}_norm", frobenius_norm(l @ sq), bounds["l_norm"])

    anti01_a = kron(anticommutator(r.A[0], r.A[1]), iB)
    anti01_b = kron(iA, anticommutator(r.B[0], r.B[1]))
    anti2_a = kron(anticommutator(r.A[0] + r.A[1], r.A[2]), iB)
    anti2_b = kron(iA, anticommutator(r.B[0] + r.B[1], r.B[2]))
    for name, op in (
        ("anticomm_01_A", anti01_a),
        ("anticomm_01_B", anti01_b),
    ):
        le(f"{name}_frobenius", frobenius_norm(op @ sq), bounds["anticomm_01_frobenius"])
        le(f"{name}_second_moment", expectation(op @ op, r.state), bounds["anticomm_01_second_moment"])
    for name, op in (
        ("anticomm_2_A", anti2_a),
        ("anticomm_2_B", anti2_b),
    ):
        le(f"{name}_frobenius", frobenius_norm(op @ sq), bounds["anticomm_2_frobenius"])
        le(f"{name}_second_moment", expectation(op @ op, r.state), bounds["anticomm_2_second_moment"])

    ge(
        "corr_a01_diff_b2",
        expectation(kron(r.A[0] - r.A[1], r.B[2]), r.state),
        bounds["corr_a01_diff_b2"],
    )
    ge(
        "corr_a2_b01_diff",
        expectation(kron(r.A[2], r.B[0] - r.B[1]), r.state),
        bounds["corr_a2_b01_diff"],
    )
    ge(
        "corr_a01_sum_b01_sum",
        expectation(kron(r.A[0] + r.A[1], r.B[0] + r.B[1]), r.state),
        bounds["corr_a01_sum_b01_sum"],
    )

    cx, _, cz = c_operators(r)
    ge("c_x", expectation(cx, r.state), bounds["c_x"])
    ge("c_z", expectation(cz, r.state), bounds["c_z"])
    ge("extracted_fidelity", extracted_fidelity(r), bounds["fidelity"])

    return EpsilonReport(beta, eps, tuple(entries))
