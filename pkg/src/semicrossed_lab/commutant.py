"""Commutants, bicommutants and guard-banded commutants on the truncation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .dynamics import DynSystem, L as creation, R as creation_r, generator_label, rep_pi, rep_pibar
from .errors import InvalidParameter
from .fock import ABELIAN, FREE
from .linops import (Operator, SpanBasis, StackedNullspace, compare_spans, level_indices,
                     opnorm)
from .semicrossed import predicted_commutant_generators, predicted_commutant_span

# dense vectorised solves hold (n^2 x n^2) blocks, so n is capped well below 130
MAX_COMMUTANT_DIM = 40
DEFAULT_TOL = 1e-8


def _as_matrix(op) -> np.ndarray:
    return op.data if isinstance(op, Operator) else np.asarray(op, dtype=complex)


def _check_dim(n: int) -> None:
    if n > MAX_COMMUTANT_DIM:
        raise InvalidParameter(f"commutant problems are capped at dimension "
                               f"{MAX_COMMUTANT_DIM}, got {n}")


def matrix_commutant(ops: Union[SpanBasis, Sequence], tol: float = DEFAULT_TOL) -> SpanBasis:
    """Basis of ``{X : X T = T X for every T in ops}``.

    With row-major vectorisation ``vec(X T) = (I ⊗ T^T) vec X`` and
    ``vec(T X) = (T ⊗ I) vec X``; the stacked differences are solved for
    their nullspace.
    """
    mats = [_as_matrix(T) for T in ops]
    if not mats:
        if isinstance(ops, SpanBasis):
            # the zero span commutes with everything
            _check_dim(ops.shape[0])
            return SpanBasis.full(ops.shape[0])
        raise InvalidParameter("need at least one operator")
    n = mats[0].shape[0]
    _check_dim(n)
    I = np.eye(n)
    stack = StackedNullspace(n * n)
    for T in mats:
        if T.shape != (n, n):
            raise InvalidParameter("operators must share one square shape")
        stack.add(np.kron(I, T.T) - np.kron(T, I))
    return SpanBasis.from_columns(stack.solve(tol), (n, n))


def bicommutant(A: Union[SpanBasis, Sequence], tol: float = DEFAULT_TOL) -> SpanBasis:
    return matrix_commutant(matrix_commutant(A, tol), tol)


def has_bicommutant_property(A: SpanBasis, tol: float = DEFAULT_TOL) -> bool:
    return compare_spans(A, bicommutant(A, tol), tol).relation == "equal"


@dataclass
class GradedCommutant:
    solutions: SpanBasis
    interior: SpanBasis
    rows: np.ndarray
    cols: np.ndarray
    guard: int

    @property
    def dim(self) -> int:
        return self.interior.dim


def graded_commutant(ops: Sequence[Tuple[Operator, int]], guard: int,
                     tol: float = DEFAULT_TOL, window=None) -> GradedCommutant:
    """Solve ``P (X T - T X) Q = 0`` with ``P`` the levels ``<= L - guard``.

    ``Q`` is ``P`` further restricted to H-indices in ``window`` (all of H by
    default).  ``ops`` pairs each operator with its creation degree;
    ``guard`` must be at least the largest declared degree and at most
    ``L``.  The result holds the full solution space and its compression
    ``P X Q``.
    """
    if not ops:
        raise InvalidParameter("need at least one operator")
    first = ops[0][0]
    fock, h = first.fock, first.h
    top = fock.max_degree
    if guard > top:
        raise InvalidParameter(f"guard {guard} exceeds the truncation L={top}")
    if guard < max(deg for _, deg in ops):
        raise InvalidParameter("guard must be at least the largest operator degree")
    n = h * fock.size
    _check_dim(n)
    rows = level_indices(fock, h, top - guard)
    cols = level_indices(fock, h, top - guard, window)
    I = np.eye(n)
    stack = StackedNullspace(n * n)
    for T, _ in ops:
        T = _as_matrix(T)
        # vec(P X T Q^T) = (P ⊗ Q T^T) vec X ; vec(P T X Q^T) = (P T ⊗ Q) vec X
        stack.add(np.kron(I[rows], T.T[cols]) - np.kron(T[rows], I[cols]))
    sols = SpanBasis.from_columns(stack.solve(tol), (n, n))
    interior = SpanBasis.from_matrices([X[np.ix_(rows, cols)] for X in sols],
                                       shape=(len(rows), len(cols)))
    return GradedCommutant(sols, interior, rows, cols, guard)


def algebra_ops(sys: DynSystem, side: str = "left") -> List[Tuple[Operator, int]]:
    """Degree-0 representation of the algebra basis plus the degree-1 shifts."""
    if sys.kind == ABELIAN:
        rep, shift = rep_pi, creation
    elif side == "left":
        rep, shift = rep_pibar, creation
    else:
        rep, shift = rep_pi, creation_r
    ops = [(rep(sys, a, False), 0) for a in sys.algebra]
    ops += [(shift(sys, generator_label(sys, i)), 1) for i in range(1, sys.d + 1)]
    return ops


# ---------------------------------------------------------------------------
# commutation identities


def graded_commutator_residual(X: Operator, T: Operator, guard: int, window=None) -> float:
    """``||P (XT - TX) P_W||`` with ``P`` the levels ``<= L - guard``."""
    fock = X.fock
    rows = level_indices(fock, X.h, fock.max_degree - guard)
    cols = level_indices(fock, X.h, fock.max_degree - guard, window)
    D = (X @ T - T @ X).data
    return opnorm(D[np.ix_(rows, cols)])


def _sc_family(sys: DynSystem, algebra: SpanBasis, side: str, max_degree: int):
    """Pairs ``(generator, degree)`` of a semicrossed product over ``algebra``."""
    out = []
    for label in sys.fock.basis:
        k = sys.fock.degree(label)
        if k > max_degree:
            continue
        if sys.kind == ABELIAN:
            shift, rep = creation(sys, label), rep_pi
        elif side == "left":
            shift, rep = creation(sys, label), rep_pibar
        else:
            shift, rep = creation_r(sys, label), rep_pi
        for a in algebra:
            out.append((shift @ rep(sys, a, False), k))
    return out


def identity_residual(sys: DynSystem, predicted: Sequence[Operator],
                      family: Sequence[Tuple[Operator, int]]) -> float:
    """Worst graded commutator between predicted generators and a family.

    Predicted generators carry degree 0 or 1; the guard band is the degree
    sum and columns are restricted to the H-window.
    """
    window = sys.window(1) if sys.windowed else None
    worst = 0.0
    for X in predicted:
        dx = _degree(X)
        for T, dt in family:
            guard = dx + dt
            if guard > sys.fock.max_degree:
                continue
            worst = max(worst, graded_commutator_residual(X, T, guard, window))
    return worst


def _degree(X: Operator) -> int:
    deg = X.fock.degrees
    blocks = X.blocks_view()
    nz = [deg[i] - deg[j] for i, j in zip(*np.nonzero(np.abs(blocks).sum(axis=(2, 3)) > 0))]
    return int(max(nz, default=0))


@dataclass
class Thm41Report:
    identity_residuals: Dict[str, float]
    tol: float
    span: Optional[dict] = None
    dims: Dict[str, int] = field(default_factory=dict)

    @property
    def max_identity_residual(self) -> float:
        return max(self.identity_residuals.values(), default=0.0)

    @property
    def max_residual(self) -> float:
        r = self.max_identity_residual
        if self.span is not None:
            r = max(r, self.span["max_residual"])
        return r

    @property
    def passed(self) -> bool:
        ok = self.max_identity_residual <= self.tol
        if self.span is not None:
            ok = ok and self.span["relation"] == "equal"
        return ok

    def as_dict(self) -> dict:
        return {
            "identity_residuals": self.identity_residuals,
            "max_identity_residual": self.max_identity_residual,
            "span": self.span,
            "dims": self.dims,
            "passed": self.passed,
        }


def is_exact_instance(sys: DynSystem, limit: int = 60) -> bool:
    """One unwindowed invertible entry per generator and ``hD <= limit``."""
    return (all(r.n == 1 for r in sys.rows) and not sys.windowed
            and sys.h * sys.fock.size <= limit)


def compare_graded_spans(sys: DynSystem, guard: int = 1, tol: float = DEFAULT_TOL,
                         side: str = "left", commutant: Optional[SpanBasis] = None,
                         depth: Optional[int] = None, window=None) -> dict:
    """Graded commutant against the predicted twisted span on interior levels.

    ``depth`` bounds the length of twisted words in the predicted span
    (``L - guard`` by default).  Both spans are compressed to rows at levels
    ``<= L - guard`` and columns there with H-part in ``window``.
    """
    Ap = matrix_commutant(list(sys.algebra), tol) if commutant is None else commutant
    top = sys.fock.max_degree - guard
    depth = top if depth is None else depth
    gc = graded_commutant(algebra_ops(sys, side), guard, tol, window)
    pred = predicted_commutant_span(sys, top, depth, Ap, side, tol, window)
    cmp = compare_spans(gc.interior, pred, tol)
    return {
        "relation": {"A<B": "graded<predicted", "B<A": "predicted<graded"}.get(
            cmp.relation, cmp.relation),
        "graded_dim": gc.dim,
        "predicted_dim": pred.dim,
        "excess_dim": gc.dim - pred.dim,
        "predicted_in_graded_residual": cmp.residual_b_in_a,
        "max_residual": cmp.max_residual,
    }


def verify_thm_4_1(sys: DynSystem, tol: float = 1e-9, span_check: Optional[bool] = None,
                   span_tol: float = DEFAULT_TOL) -> Thm41Report:
    """Check that predicted commutant generators commute with the product.

    Free systems: the right-twisted family ``rho(u_ij) R_i rho(y)`` against
    ``L_mu pibar(a)`` and the left-twisted family against ``R_mu pi(a)``,
    each for ``a`` in A and in A''.  Abelian systems use the single twisted
    family against ``L_m pi(a)``.  On exact instances the graded commutant
    span is compared with the predicted span as well.
    """
    Ap = matrix_commutant(list(sys.algebra), span_tol)
    App = matrix_commutant(list(Ap), span_tol)
    pred = predicted_commutant_generators(sys, Ap)
    top = sys.fock.max_degree - 1
    res = {}
    if sys.kind == FREE:
        res["left(A)"] = identity_residual(sys, pred["left"], _sc_family(sys, sys.algebra, "left", top))
        res["right(A)"] = identity_residual(sys, pred["right"], _sc_family(sys, sys.algebra, "right", top))
        res["left(A'')"] = identity_residual(sys, pred["left"], _sc_family(sys, App, "left", top))
        res["right(A'')"] = identity_residual(sys, pred["right"], _sc_family(sys, App, "right", top))
    else:
        res["abelian(A)"] = identity_residual(sys, pred["abelian"], _sc_family(sys, sys.algebra, "left", top))
        res["abelian(A'')"] = identity_residual(sys, pred["abelian"], _sc_family(sys, App, "left", top))
    report = Thm41Report(res, tol, dims={"A": sys.algebra.dim, "A'": Ap.dim, "A''": App.dim})
    if span_check is None:
        span_check = is_exact_instance(sys)
    if span_check:
        report.span = compare_graded_spans(sys, 1, span_tol, "left", Ap)
    return report
