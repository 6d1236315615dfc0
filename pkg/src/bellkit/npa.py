"""Non-commutative monomial algebra and moment-matrix skeletons.

Words are per-party tuples of setting indices, reduced by projectivity
(adjacent repeats cancel) and optionally by imposed commutation of chosen
setting pairs. A moment skeleton records, for every cell of the Gram
matrix of a monomial basis, the canonical monomial it evaluates and the
conjugation bookkeeping, grouped into equality classes.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .linalg import Array, dagger

Word = tuple[int, ...]
Monomial = tuple[Word, Word]  # (Alice word, Bob word)

IDENTITY: Monomial = ((), ())


class UnrepresentableMonomialError(ValueError):
    """A polynomial term does not appear in the moment matrix."""


def _dedup(word: Word) -> Word:
    """Remove adjacent duplicate letters to the unique reduced form."""
    letters: list[int] = []
    for x in word:
        if letters and letters[-1] == x:
            letters.pop()
        else:
            letters.append(x)
    return tuple(letters)


def canonicalize(word, commuting_pairs=frozenset()) -> Word:
    """Reduce a word by projectivity and imposed commutation.

    Without commutation the reduced form (no adjacent repeats) is unique.
    With commutation the representative is the minimum over the closure of
    the word under adjacent commuting swaps and duplicate removal; adjacent
    swaps alone are not confluent when the commuting pairs share a letter
    (e.g. pairs (0,1) and (1,2) leave both 120 and 201 locally stuck), so
    the closure is explored exhaustively. Idempotent by construction.
    """
    w = _dedup(tuple(int(x) for x in word))
    if not commuting_pairs or len(w) < 2:
        return w
    pairs = {frozenset(p) for p in commuting_pairs}
    seen = {w}
    frontier = [w]
    while frontier:
        nxt = []
        for cur in frontier:
            for i in range(len(cur) - 1):
                a, b = cur[i], cur[i + 1]
                if a != b and frozenset((a, b)) in pairs:
                    cand = _dedup(cur[:i] + (b, a) + cur[i + 1 :])
                    if cand not in seen:
                        seen.add(cand)
                        nxt.append(cand)
        frontier = nxt
    return min(seen, key=lambda t: (len(t), t))


def word_adjoint(word: Word) -> Word:
    return tuple(reversed(word))


def mono_adjoint(m: Monomial) -> Monomial:
    return word_adjoint(m[0]), word_adjoint(m[1])


def mono_canonicalize(m: Monomial, commuting_a=frozenset(), commuting_b=frozenset()) -> Monomial:
    return canonicalize(m[0], commuting_a), canonicalize(m[1], commuting_b)


def mono_mul(m1: Monomial, m2: Monomial, commuting_a=frozenset(), commuting_b=frozenset()) -> Monomial:
    return (
        canonicalize(m1[0] + m2[0], commuting_a),
        canonicalize(m1[1] + m2[1], commuting_b),
    )


def _rep(m: Monomial, commuting_a=frozenset(), commuting_b=frozenset()) -> tuple[Monomial, bool]:
    """Representative of {m, m^dag} and whether m is the conjugated member.

    The adjoint is re-canonicalized under the imposed commutation so that a
    cell and its mirror always land in the same class.
    """
    adj = mono_canonicalize(mono_adjoint(m), commuting_a, commuting_b)
    key = (len(m[0]), m[0], len(m[1]), m[1])
    akey = (len(adj[0]), adj[0], len(adj[1]), adj[1])
    if akey < key:
        return adj, True
    return m, False


@dataclass(frozen=True)
class Polynomial:
    """Linear combination of monomials with complex coefficients."""

    terms: dict[Monomial, complex] = field(default_factory=dict)

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial({})

    @staticmethod
    def identity(coeff: complex = 1.0) -> "Polynomial":
        return Polynomial({IDENTITY: complex(coeff)})

    @staticmethod
    def a(x: int) -> "Polynomial":
        return Polynomial({((int(x),), ()): 1.0 + 0.0j})

    @staticmethod
    def b(y: int) -> "Polynomial":
        return Polynomial({((), (int(y),)): 1.0 + 0.0j})

    def __add__(self, other: "Polynomial") -> "Polynomial":
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return Polynomial({m: c for m, c in out.items() if c != 0})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            out: dict[Monomial, complex] = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    m = mono_mul(m1, m2)
                    out[m] = out.get(m, 0.0) + c1 * c2
            return Polynomial({m: c for m, c in out.items() if c != 0})
        return Polynomial({m: c * complex(other) for m, c in self.terms.items()})

    __rmul__ = __mul__

    def adjoint(self) -> "Polynomial":
        return Polynomial({mono_adjoint(m): np.conj(c) for m, c in self.terms.items()})

    def realize(self, a_ops, b_ops, dims: tuple[int, int]) -> Array:
        """Materialize the polynomial as an operator on C^dA x C^dB."""
        da, db = dims
        out = np.zeros((da * db, da * db), dtype=complex)
        for (wa, wb), c in self.terms.items():
            ma = np.eye(da, dtype=complex)
            for x in wa:
                ma = ma @ a_ops[x]
            mb = np.eye(db, dtype=complex)
            for y in wb:
                mb = mb @ b_ops[y]
            out += c * np.kron(ma, mb)
        return out


def commutator_poly(p: Polynomial, q: Polynomial) -> Polynomial:
    return p * q - q * p


def bell_polynomial(alpha: float, settings: int = 3) -> Polynomial:
    """The family functional for three settings, or CHSH for two."""
    A, B = Polynomial.a, Polynomial.b
    if settings == 3:
        a = float(alpha)
        return (
            A(0) * (B(0) + B(1) + a * B(2))
            + A(1) * (B(0) + B(1) - a * B(2))
            + a * A(2) * (B(0) - B(1))
        )
    if settings == 2:
        return A(0) * B(0) + A(0) * B(1) + A(1) * B(0) - A(1) * B(1)
    raise ValueError("settings must be 2 (CHSH) or 3")


def chsh_polynomial() -> Polynomial:
    return bell_polynomial(0.0, settings=2)


def c_y_polynomial() -> Polynomial:
    """C_Y for alpha = sqrt(2) as a moment-space functional."""
    A, B = Polynomial.a, Polynomial.b
    kp = 3.0 * (A(0) + A(1)) - (A(1) * A(0) * A(1) + A(0) * A(1) * A(0))
    return (-1.0 / (16.0 * np.sqrt(2.0))) * commutator_poly(A(2), kp) * commutator_poly(B(0), B(1))


def c_z_polynomial() -> Polynomial:
    """C_Z for alpha = sqrt(2) as a moment-space functional."""
    A, B = Polynomial.a, Polynomial.b
    tail = 3.0 * (B(0) - B(1)) - (B(1) * B(0) * B(1) - B(0) * B(1) * B(0))
    return (1.0 / (4.0 * np.sqrt(2.0))) * A(2) * tail


def build_basis(
    level: str,
    settings: int = 3,
    commuting_a=frozenset(),
    commuting_b=frozenset(),
) -> tuple[Monomial, ...]:
    """Monomial basis for a relaxation level.

    "one_plus_ab": identity, single-letter words per party, and the
    cross products; 16 monomials for three settings. "swap": the full
    tensor grid of per-party words of length <= 2; 100 monomials for
    three settings. Imposed commutation collapses duplicate words, which
    are removed (deterministic first-occurrence order).
    """
    xs = list(range(settings))
    singles = [(x,) for x in xs]
    if level == "one_plus_ab":
        basis = [IDENTITY]
        basis += [((x,), ()) for x in xs]
        basis += [((), (y,)) for y in xs]
        basis += [((x,), (y,)) for x in xs for y in xs]
    elif level == "swap":
        pairs = [(x, y) for x in xs for y in xs if x != y]
        party = [()] + singles + pairs
        basis = [(wa, wb) for wa in party for wb in party]
    else:
        raise ValueError(f"unknown level {level!r}")
    seen: dict[Monomial, None] = {}
    for m in basis:
        cm = mono_canonicalize(m, commuting_a, commuting_b)
        if cm not in seen:
            seen[cm] = None
    return tuple(seen.keys())


@dataclass(frozen=True)
class MomentSkeleton:
    """Symbolic moment matrix over a monomial basis.

    ``class_ids[i, j]`` indexes ``classes`` with the canonical form of
    basis[i]^dag basis[j]; ``conjugated[i, j]`` marks cells holding the
    conjugate of the class representative. ``self_adjoint[c]`` marks
    palindromic classes whose moments are real.
    """

    basis: tuple[Monomial, ...]
    classes: tuple[Monomial, ...]
    class_ids: Array
    conjugated: Array
    self_adjoint: tuple[bool, ...]
    commuting_a: frozenset
    commuting_b: frozenset

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def class_index(self, m: Monomial) -> tuple[int, bool]:
        """(class id, conjugated flag) of an arbitrary monomial."""
        cm = mono_canonicalize(m, self.commuting_a, self.commuting_b)
        rep, conj = _rep(cm, self.commuting_a, self.commuting_b)
        try:
            cid = self._class_lookup[rep]
        except KeyError:
            raise UnrepresentableMonomialError(
                f"monomial {cm!r} does not appear in this moment matrix"
            ) from None
        return cid, conj

    @property
    def _class_lookup(self) -> dict[Monomial, int]:
        cache = getattr(self, "_lookup_cache", None)
        if cache is None:
            cache = {m: i for i, m in enumerate(self.classes)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def dump(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "col", "class_id", "conjugated"])
        n = self.size
        for i in range(n):
            for j in range(n):
                w.writerow([i, j, int(self.class_ids[i, j]), int(self.conjugated[i, j])])
        return buf.getvalue()


def build_skeleton(
    basis,
    commuting_a=frozenset(),
    commuting_b=frozenset(),
) -> MomentSkeleton:
    """Canonical-word index for every cell of the Gram matrix of ``basis``."""
    basis = tuple(basis)
    n = len(basis)
    lookup: dict[Monomial, int] = {}
    classes: list[Monomial] = []
    sa: list[bool] = []
    ids = np.zeros((n, n), dtype=np.int32)
    conj = np.zeros((n, n), dtype=bool)
    # the identity class comes first: every diagonal cell maps there
    lookup[IDENTITY] = 0
    classes.append(IDENTITY)
    sa.append(True)
    adjoints = [mono_adjoint(m) for m in basis]
    for i in range(n):
        for j in range(n):
            m = mono_mul(adjoints[i], basis[j], commuting_a, commuting_b)
            rep, flag = _rep(m, commuting_a, commuting_b)
            cid = lookup.get(rep)
            if cid is None:
                cid = len(classes)
                lookup[rep] = cid
                classes.append(rep)
                sa.append(rep == mono_adjoint(rep))
            ids[i, j] = cid
            conj[i, j] = flag
    return MomentSkeleton(
        basis=basis,
        classes=tuple(classes),
        class_ids=ids,
        conjugated=conj,
        self_adjoint=tuple(sa),
        commuting_a=frozenset(commuting_a),
        commuting_b=frozenset(commuting_b),
    )


def poly_to_moments(p: Polynomial, sk: MomentSkeleton) -> tuple[Array, Array, float]:
    """Express <p> as offset + sum_c (wr[c] Re y_c + wi[c] Im y_c).

    Raises :class:`UnrepresentableMonomialError` naming the first term that
    has no cell in the moment matrix.
    """
    wr = np.zeros(sk.n_classes)
    wi = np.zeros(sk.n_classes)
    for m, c in p.terms.items():
        cid, conj = sk.class_index(m)
        sign = -1.0 if conj else 1.0
        wr[cid] += c.real
        wi[cid] += -c.imag * sign  # Re(c * gamma) with gamma = Re + i sign Im
    offset = float(wr[0])
    wr = wr.copy()
    wr[0] = 0.0
    wi[0] = 0.0
    return wr, wi, offset


def realize_monomial(m: Monomial, a_ops, b_ops, dims: tuple[int, int]) -> Array:
    """Operator A_w x B_w of a monomial on a concrete realization."""
    da, db = dims
    ma = np.eye(da, dtype=complex)
    for x in m[0]:
        ma = ma @ a_ops[x]
    mb = np.eye(db, dtype=complex)
    for y in m[1]:
        mb = mb @ b_ops[y]
    return np.kron(ma, mb)


def true_moment_matrix(sk: MomentSkeleton, a_ops, b_ops, state: Array, dims: tuple[int, int]) -> Array:
    """Gram matrix of the basis monomials on a concrete (projective) realization.

    This is the primary soundness oracle for the skeleton: the result is
    Hermitian PSD, respects the class equalities, and evaluates objectives
    identically to direct operator inner products.
    """
    n = sk.size
    ops = [realize_monomial(m, a_ops, b_ops, dims) for m in sk.basis]
    rho = np.asarray(state, dtype=complex)
    gamma = np.zeros((n, n), dtype=complex)
    for i in range(n):
        oi = dagger(ops[i])
        for j in range(n):
            gamma[i, j] = np.trace(rho @ oi @ ops[j])
    return gamma
