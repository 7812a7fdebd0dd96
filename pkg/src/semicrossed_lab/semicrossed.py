"""Semicrossed-product generators, membership tests and the Z_+^d splitting."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .dynamics import (DynSystem, RowOperator, alpha_table, generator_label, rep_pi,
                       rep_pibar, rep_rho, L as creation, R as creation_r)
from .errors import InvalidParameter
from .fock import ABELIAN, FREE, TruncatedFock, reverse
from .generators import creation_abelian, is_lower_triangular
from .linops import Operator, SpanBasis, level_indices, opnorm


def sc_left(sys: DynSystem, mu, a, check: bool = True) -> Operator:
    """``L_mu pibar(a)``."""
    if sys.kind != FREE:
        raise InvalidParameter("sc_left needs a free system")
    return creation(sys, mu) @ rep_pibar(sys, a, check)


def sc_right(sys: DynSystem, mu, a, check: bool = True) -> Operator:
    """``R_mu pi(a)``."""
    if sys.kind != FREE:
        raise InvalidParameter("sc_right needs a free system")
    return creation_r(sys, mu) @ rep_pi(sys, a, check)


def sc_abelian(sys: DynSystem, m, a, check: bool = True) -> Operator:
    """``L_m pi(a)`` for a multi-index ``m``."""
    if sys.kind != ABELIAN:
        raise InvalidParameter("sc_abelian needs an abelian system")
    return creation(sys, m) @ rep_pi(sys, a, check)


def sc_generator(sys: DynSystem, label, a, side: str = "left", check: bool = True) -> Operator:
    if sys.kind == ABELIAN:
        return sc_abelian(sys, label, a, check)
    return sc_left(sys, label, a, check) if side == "left" else sc_right(sys, label, a, check)


def sc_generators(sys: DynSystem, side: str = "left", algebra: Optional[SpanBasis] = None,
                  max_degree: Optional[int] = None):
    """All ``(label, a, generator)`` over an algebra basis and labels up to ``max_degree``."""
    algebra = sys.algebra if algebra is None else algebra
    top = sys.L if max_degree is None else max_degree
    out = []
    for label in sys.fock.basis:
        if sys.fock.degree(label) > top:
            continue
        for a in algebra:
            out.append((label, a, sc_generator(sys, label, a, side, check=False)))
    return out


def random_span_element(sys: DynSystem, rng: np.random.Generator, side: str = "left",
                        max_degree: Optional[int] = None):
    """Random combination of generators; returns the operator and its coefficients."""
    top = sys.L if max_degree is None else max_degree
    T = Operator.zeros(sys.fock, sys.h)
    coeffs = {}
    for label in sys.fock.basis:
        if sys.fock.degree(label) > top:
            continue
        a = sys.algebra.random_element(rng)
        coeffs[label] = a
        T = T + sc_generator(sys, label, a, side, check=False)
    return T, coeffs


# ---------------------------------------------------------------------------
# membership


@dataclass
class Membership:
    member: bool
    coefficients: Dict[tuple, np.ndarray] = field(default_factory=dict, repr=False)
    condition: Optional[str] = None
    witness: Optional[tuple] = None
    residual: float = 0.0

    def as_dict(self) -> dict:
        return {
            "member": self.member,
            "condition": self.condition,
            "witness": None if self.witness is None else [list(x) for x in self.witness],
            "residual": self.residual,
        }


def _flavor(sys: DynSystem, side: str) -> str:
    return "abelian" if sys.kind == ABELIAN else side


def _membership(sys: DynSystem, T: Operator, side: str, tol: float) -> Membership:
    fock = sys.fock
    if T.fock != fock or T.h != sys.h:
        raise InvalidParameter("operator does not act on the system's truncation")
    tri = is_lower_triangular(T, _flavor(sys, side), tol)
    if not tri.ok:
        return Membership(False, condition="lower-triangular", witness=tri.worst_block,
                          residual=tri.worst_norm)
    empty = fock.basis[0]
    coeffs = {}
    worst, worst_block = 0.0, None
    for mu in fock.basis:
        # T_{mu,empty} for left/abelian; T_{rev(mu),empty} for right
        head = reverse(mu) if (side == "right" and sys.kind == FREE) else mu
        a_mu = T.block(head, empty)
        coeffs[mu] = a_mu
        table = alpha_table(sys, a_mu)
        for w in fock.basis:
            if sys.kind == FREE and side == "left":
                target = fock.shift_target(mu, w, "left")
                expected = table[reverse(w)] if target is not None else None
            elif sys.kind == FREE:
                target = fock.shift_target(mu, w, "right")
                expected = table[w] if target is not None else None
            else:
                target = fock.shift_target(mu, w, "left")
                expected = table[w] if target is not None else None
            if target is None:
                continue
            r = opnorm(T.block(target, w) - expected)
            if r > worst:
                worst, worst_block = r, (target, w)
    if worst > tol:
        return Membership(False, coeffs, "block-consistency", worst_block, worst)
    worst_alg, where = 0.0, None
    for mu, a_mu in coeffs.items():
        scale = max(1.0, opnorm(a_mu))
        r = sys.algebra.residual(a_mu) * np.linalg.norm(a_mu) / scale
        if r > worst_alg:
            worst_alg, where = r, mu
    if worst_alg > tol:
        return Membership(False, coeffs, "algebra", (where, empty), worst_alg)
    return Membership(True, coeffs, residual=max(worst, worst_alg, tri.worst_norm))


def membership_left(sys: DynSystem, T: Operator, tol: float = 1e-9) -> Membership:
    """Decide whether ``T`` lies in the span of the ``L_mu pibar(a)``.

    Conditions, checked in order: left lower triangularity; every block
    ``T_{mu w, w}`` equals ``alpha_{rev(w)}(T_{mu, empty})``; every
    ``T_{mu, empty}`` lies in the algebra.
    """
    if sys.kind != FREE:
        raise InvalidParameter("membership_left needs a free system")
    return _membership(sys, T, "left", tol)


def membership_right(sys: DynSystem, T: Operator, tol: float = 1e-9) -> Membership:
    """Right analogue: blocks ``T_{w rev(mu), w} = alpha_w(T_{rev(mu), empty})``."""
    if sys.kind != FREE:
        raise InvalidParameter("membership_right needs a free system")
    return _membership(sys, T, "right", tol)


def membership_abelian(sys: DynSystem, T: Operator, tol: float = 1e-9) -> Membership:
    """Abelian analogue: blocks ``T_{m+w, w} = alpha_w(T_{m, 0})``."""
    if sys.kind != ABELIAN:
        raise InvalidParameter("membership_abelian needs an abelian system")
    return _membership(sys, T, "left", tol)


def membership(sys: DynSystem, T: Operator, side: str = "left", tol: float = 1e-9) -> Membership:
    if sys.kind == ABELIAN:
        return membership_abelian(sys, T, tol)
    return membership_left(sys, T, tol) if side == "left" else membership_right(sys, T, tol)


def corrupted_battery(sys: DynSystem, rng: np.random.Generator, side: str = "left"):
    """Operators that must be rejected, as ``(name, operator)`` pairs.

    The battery holds an adjoint insertion, a perturbation of one
    diagonal block and, when the algebra is proper, a generator with
    an out-of-algebra coefficient.
    """
    fock, h = sys.fock, sys.h
    base, _ = random_span_element(sys, rng, side)
    lab = generator_label(sys, 1)
    out = [("adjoint", base + creation(sys, lab).adjoint())]

    # diagonal blocks must follow alpha applied to the (empty, empty) block
    w = next(m for m in fock.basis if fock.degree(m) == 1)
    i = fock.position(w)
    data = base.data.copy()
    bump = rng.standard_normal((h, h)) + 1j * rng.standard_normal((h, h))
    data[i * h:(i + 1) * h, i * h:(i + 1) * h] += bump / opnorm(bump)
    out.append(("wrong-block", Operator(data, h, fock)))

    if sys.algebra.dim < h * h:
        outside = None
        for a_, b_ in np.ndindex(h, h):
            e = np.zeros((h, h), dtype=complex)
            e[a_, b_] = 1
            if sys.algebra.residual(e) > 0.5:
                outside = e
                break
        if outside is None:
            outside = SpanBasis.full(h).random_element(rng)
            outside = outside - sys.algebra.project(outside)
            outside = outside / opnorm(outside)
        out.append(("out-of-algebra", base + sc_generator(sys, lab, outside, side, check=False)))
    return out


# ---------------------------------------------------------------------------
# predicted commutant generators


def commutant_basis(sys: DynSystem, tol: float = 1e-9) -> SpanBasis:
    from .commutant import matrix_commutant
    return matrix_commutant(list(sys.algebra), tol)


def twisted_generators(sys: DynSystem) -> Dict[str, List[Operator]]:
    """The degree-one twisted shifts ``rho(u_ij) R_i`` and ``rho(u_ij) L_i``.

    Keys are ``"W"`` (right shifts, commuting with the left product) and
    ``"V"`` (left shifts, commuting with the right product).  Abelian
    systems only have ``"V"`` (left and right shifts coincide).
    """
    out = {"W": [], "V": []}
    for i in range(1, sys.d + 1):
        lab = generator_label(sys, i)
        Li = creation(sys, lab)
        Ri = creation_r(sys, lab) if sys.kind == FREE else None
        for uij in sys.rows[i - 1].u:
            ru = rep_rho(sys, uij)
            out["V"].append(ru @ Li)
            if Ri is not None:
                out["W"].append(ru @ Ri)
    if sys.kind == ABELIAN:
        del out["W"]
    return out


def predicted_commutant_generators(sys: DynSystem, commutant: Optional[SpanBasis] = None,
                                   tol: float = 1e-9) -> Dict[str, List[Operator]]:
    """Degree-zero and degree-one generators of the predicted commutants.

    ``"left"``: ``rho(y)`` and ``rho(u_ij) R_i rho(y)``, the commutant of the
    left product.  ``"right"``: ``rho(y)`` and ``rho(u_ij) L_i rho(y)``.
    Abelian systems return only ``"abelian"``.
    """
    Ap = commutant_basis(sys, tol) if commutant is None else commutant
    rho_y = [rep_rho(sys, y) for y in Ap]
    tw = twisted_generators(sys)
    if sys.kind == ABELIAN:
        return {"abelian": rho_y + [g @ r for g in tw["V"] for r in rho_y]}
    return {
        "left": rho_y + [g @ r for g in tw["W"] for r in rho_y],
        "right": rho_y + [g @ r for g in tw["V"] for r in rho_y],
    }


def predicted_commutant_span(sys: DynSystem, max_level: int, depth: int,
                             commutant: Optional[SpanBasis] = None, side: str = "left",
                             tol: float = 1e-9, window=None) -> SpanBasis:
    """Span of ``W_{w} rho(y)`` for twisted words ``|w| <= depth``, compressed.

    Rows are kept at levels ``<= max_level``; columns too, with H-part in
    ``window``.  ``side`` picks the twisted family: ``"left"`` uses right
    shifts (commutant of the left product), ``"right"`` uses left shifts.
    """
    Ap = commutant_basis(sys, tol) if commutant is None else commutant
    tw = twisted_generators(sys)
    family = tw["V"] if (sys.kind == ABELIAN or side == "right") else tw["W"]
    rows = level_indices(sys.fock, sys.h, max_level)
    cols = level_indices(sys.fock, sys.h, max_level, window)
    layer = [rep_rho(sys, y) for y in Ap]
    mats = [X.data[np.ix_(rows, cols)] for X in layer]
    for _ in range(depth):
        layer = [g @ X for g in family for X in layer]
        mats.extend(X.data[np.ix_(rows, cols)] for X in layer)
    return SpanBasis.from_matrices(mats)


# ---------------------------------------------------------------------------
# Z_+^d splitting


@dataclass
class Decomposition:
    permutation: np.ndarray
    generator_residual: float
    representation_residual: float
    tol: float
    nested_dims: List[int]

    @property
    def max_residual(self) -> float:
        return max(self.generator_residual, self.representation_residual)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "generator_residual": self.generator_residual,
            "representation_residual": self.representation_residual,
            "max_residual": self.max_residual,
            "nested_dims": self.nested_dims,
            "passed": self.passed,
        }


def nested_permutation(h: int, d: int, L: int) -> np.ndarray:
    """``perm[q]`` = box-truncation index of the ``q``-th nested index.

    The nested layout has coordinate ``d`` outermost and the H index
    innermost: ``q = ((c_d (L+1) + c_{d-1}) ... ) h + xi``.
    """
    box = TruncatedFock(ABELIAN, d, L, box=True)
    size = (L + 1) ** d
    perm = np.empty(size * h, dtype=int)
    for label in box.basis:
        q = 0
        for c in reversed(label):
            q = q * (L + 1) + c
        p = box.position(label)
        perm[q * h:(q + 1) * h] = p * h + np.arange(h)
    return perm


def decompose_abelian(sys: DynSystem, L: Optional[int] = None, tol: float = 1e-10) -> Decomposition:
    """Split the Z_+^d product into iterated one-variable products.

    Uses the box truncation with every coordinate at most ``L`` (the
    system's own ``L`` by default).  The generators ``L_{e_i}`` and
    ``pi(a)`` are conjugated by the basis permutation and compared with the
    generators of the nested construction, where the ``k``-th stage acts on
    ``H ⊗ l2_1 ⊗ ... ⊗ l2_{k-1}`` through the row ``u_k ⊗ I``.
    """
    if sys.kind != ABELIAN:
        raise InvalidParameter("decompose_abelian needs an abelian system")
    if sys.d < 2:
        raise InvalidParameter("decompose_abelian needs d >= 2")
    L = sys.L if L is None else int(L)
    boxed = sys.with_truncation(L, box=True)
    h, d = sys.h, sys.d
    perm = nested_permutation(h, d, L)

    stages = []
    hk = h
    for k, row in enumerate(sys.rows):
        copies = (L + 1) ** k
        lifted = RowOperator(tuple(np.kron(np.eye(copies), x) for x in row.u),
                             tuple(np.kron(np.eye(copies), x) for x in row.v), None)
        stage = DynSystem(ABELIAN, [lifted], "scalar", L, tol=np.inf)
        stages.append(stage)
        hk *= L + 1

    def lift(x: np.ndarray, start: int) -> np.ndarray:
        for stage in stages[start:]:
            x = rep_rho(stage, x).data
        return x

    def conj(X: Operator) -> np.ndarray:
        return X.data[np.ix_(perm, perm)]

    gen_res = 0.0
    for i in range(1, d + 1):
        shift = creation_abelian(stages[i - 1].fock, (1,), stages[i - 1].h).data
        nested = lift(shift, i)
        original = creation_abelian(boxed.fock, generator_label(sys, i), h)
        gen_res = max(gen_res, opnorm(conj(original) - nested))

    rep_res = 0.0
    for a in sys.algebra:
        x = np.asarray(a, dtype=complex)
        for stage in stages:
            x = rep_pi(stage, x, check=False).data
        rep_res = max(rep_res, opnorm(conj(rep_pi(boxed, a, check=False)) - x))
    return Decomposition(perm, gen_res, rep_res, tol, [s.h for s in stages])
