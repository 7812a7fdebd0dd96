"""Endomorphisms implemented by invertible row operators.

A row ``u = [u_1 ... u_n]`` with column inverse ``v`` implements
``alpha(a) = sum_j u_j a v_j``.  Finite-dimensional Cuntz families are
only isometric on part of the space, so a row may declare a *window*: the
H-basis indices on which ``v_j u_k = delta_jk I`` holds exactly.  Every
windowed assertion quantifies over window-supported vectors only.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InsufficientWindow, InvalidAlgebra, InvalidParameter, NotInAlgebra
from .fock import ABELIAN, FREE, TruncatedFock, reverse
from .generators import creation_abelian, creation_left, creation_right, unit_vector
from .linops import (Operator, SpanBasis, level_indices, matrix_unit, numerical_rank,
                     opnorm)


@dataclass(frozen=True, eq=False)
class RowOperator:
    u: Tuple[np.ndarray, ...]
    v: Tuple[np.ndarray, ...]
    window: Optional[Tuple[int, ...]] = None
    name: str = ""

    def __post_init__(self):
        u = tuple(np.asarray(x, dtype=complex) for x in self.u)
        v = tuple(np.asarray(x, dtype=complex) for x in self.v)
        if not u or len(u) != len(v):
            raise InvalidParameter("row and inverse column need the same positive length")
        h = u[0].shape[0]
        for x in u + v:
            if x.shape != (h, h):
                raise InvalidParameter(f"all entries must be {h}x{h}, got {x.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        if self.window is not None:
            win = tuple(sorted(int(i) for i in self.window))
            if any(not 0 <= i < h for i in win):
                raise InvalidParameter("window indices out of range")
            object.__setattr__(self, "window", win)

    @classmethod
    def from_unitaries(cls, *us, name: str = "", window=None) -> "RowOperator":
        return cls(tuple(us), tuple(np.asarray(x).conj().T for x in us), window, name)

    @classmethod
    def from_invertible(cls, x, name: str = "") -> "RowOperator":
        x = np.asarray(x, dtype=complex)
        return cls((x,), (np.linalg.inv(x),), None, name)

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def h(self) -> int:
        return self.u[0].shape[0]

    @property
    def window_indices(self) -> np.ndarray:
        return np.arange(self.h) if self.window is None else np.array(self.window, dtype=int)

    def row(self) -> np.ndarray:
        return np.hstack(self.u)

    def column(self) -> np.ndarray:
        return np.vstack(self.v)

    def apply(self, a) -> np.ndarray:
        a = np.asarray(a)
        return sum(uj @ a @ vj for uj, vj in zip(self.u, self.v))

    __call__ = apply

    def relation_residuals(self) -> Dict[str, float]:
        """Residuals of ``sum u_j v_j = I`` and ``v_j u_k = delta I`` (on window)."""
        h = self.h
        total = sum(uj @ vj for uj, vj in zip(self.u, self.v))
        W = self.window_indices
        worst = 0.0
        for j, k in itertools.product(range(self.n), repeat=2):
            target = np.eye(h) if j == k else np.zeros((h, h))
            worst = max(worst, opnorm((self.v[j] @ self.u[k] - target)[:, W]))
        return {"row_sum": opnorm(total - np.eye(h)), "column_inverse": worst}

    def is_isometric(self, tol: float = 1e-10) -> bool:
        return all(np.linalg.norm(vj - uj.conj().T) <= tol for uj, vj in zip(self.u, self.v))

    def with_inverse(self, v) -> "RowOperator":
        return RowOperator(self.u, tuple(v), self.window, self.name)


def ad(x, name: str = "") -> RowOperator:
    """The inner map ``a -> x a x^{-1}`` as a one-entry row."""
    return RowOperator.from_invertible(x, name)


# ---------------------------------------------------------------------------
# named algebras


def named_algebra(name: str, h: int) -> SpanBasis:
    if name == "full":
        return SpanBasis.full(h)
    if name == "diag":
        return SpanBasis.from_matrices([matrix_unit(h, i, i) for i in range(h)])
    if name == "scalar":
        return SpanBasis.from_matrices([np.eye(h)])
    if name == "I+E21":
        if h < 2:
            raise InvalidParameter("I+E21 needs h >= 2")
        return SpanBasis.from_matrices([np.eye(h), matrix_unit(h, 1, 0)])
    raise InvalidParameter(f"unknown algebra name {name!r}")


AlgebraLike = Union[SpanBasis, str, Sequence[np.ndarray]]


def as_algebra(algebra: AlgebraLike, h: int) -> SpanBasis:
    if isinstance(algebra, SpanBasis):
        return algebra
    if isinstance(algebra, str):
        return named_algebra(algebra, h)
    return SpanBasis.from_matrices(list(algebra))


class DynSystem:
    """A unital dynamical system on ``A ⊆ B(C^h)`` with a Fock truncation.

    ``kind`` is ``"free"`` (F_+^d action) or ``"abelian"`` (Z_+^d action);
    ``rows[i]`` implements the ``i+1``-th generator.  For the abelian kind
    the generators are checked to commute on the declared window.
    """

    def __init__(self, kind: str, rows: Sequence[RowOperator], algebra: AlgebraLike = "full",
                 L: int = 2, box: bool = False, tol: float = 1e-8, name: str = ""):
        if kind not in (FREE, ABELIAN):
            raise InvalidParameter(f"unknown kind {kind!r}")
        if not rows:
            raise InvalidParameter("need at least one generator")
        self.kind = kind
        self.rows = tuple(rows)
        self.d = len(self.rows)
        self.h = self.rows[0].h
        if any(r.h != self.h for r in self.rows):
            raise InvalidParameter("all rows must act on the same H")
        self.algebra = as_algebra(algebra, self.h)
        if self.algebra.shape != (self.h, self.h):
            raise InvalidParameter("algebra basis has the wrong shape")
        self.name = name
        self.tol = tol
        self.fock = TruncatedFock(kind, self.d, L, box)
        if self.algebra.residual(np.eye(self.h)) > tol:
            raise InvalidAlgebra("algebra must contain the identity")
        self._windows: Dict[int, np.ndarray] = {}
        if kind == ABELIAN:
            worst = self.generator_commutation_residual()
            if worst > tol:
                raise InvalidParameter(f"abelian generators do not commute on the window "
                                       f"(residual {worst:.3g})")
        self.K = uniform_bound(self)

    def __repr__(self):
        return (f"DynSystem(kind={self.kind!r}, d={self.d}, h={self.h}, L={self.L}, "
                f"n={[r.n for r in self.rows]}, name={self.name!r})")

    @property
    def L(self) -> int:
        return self.fock.L

    @property
    def n(self) -> List[int]:
        return [r.n for r in self.rows]

    def with_truncation(self, L: int, box: bool = False) -> "DynSystem":
        return DynSystem(self.kind, self.rows, self.algebra, L, box, self.tol, self.name)

    def with_rows(self, rows: Sequence[RowOperator]) -> "DynSystem":
        """Same system with replaced rows; skips the abelian commutation check."""
        clone = object.__new__(DynSystem)
        clone.__dict__.update(self.__dict__)
        clone.rows = tuple(rows)
        clone._windows = {}
        clone.K = uniform_bound(clone)
        return clone

    @property
    def windowed(self) -> bool:
        return any(r.window is not None for r in self.rows)

    def window(self, k: int = 1) -> np.ndarray:
        """H-basis indices on which ``k``-fold chains of row relations hold.

        ``W_0`` is everything, ``W_1`` the common row window and ``W_{k+1}``
        the indices of ``W_1`` that every ``u_{i,j}`` maps into ``span W_k``.
        """
        if k <= 0:
            return np.arange(self.h)
        if k in self._windows:
            return self._windows[k]
        if k == 1:
            keep = set(range(self.h))
            for r in self.rows:
                keep &= set(r.window_indices.tolist())
            win = np.array(sorted(keep), dtype=int)
        else:
            prev = set(self.window(k - 1).tolist())
            outside = np.array([i for i in range(self.h) if i not in prev], dtype=int)
            win = []
            for n_ in self.window(1):
                ok = True
                for r in self.rows:
                    for uj in r.u:
                        if outside.size and np.any(np.abs(uj[outside, n_]) > 0):
                            ok = False
                if ok:
                    win.append(n_)
            win = np.array(win, dtype=int)
        self._windows[k] = win
        return win

    def generator_commutation_residual(self) -> float:
        worst = 0.0
        W = self.window(2)
        for i, j in itertools.combinations(range(self.d), 2):
            res = check_commuting(self.rows[i], self.rows[j], W, np.inf)
            worst = max(worst, res.residual)
        return worst

    def algebra_residual(self, a) -> float:
        return self.algebra.residual(a)

    def require_in_algebra(self, a, tol: Optional[float] = None) -> None:
        tol = self.tol if tol is None else tol
        res = self.algebra.residual(a)
        if res > tol:
            raise NotInAlgebra(f"operator is not in the algebra span (residual {res:.3g})", res)

    @property
    def capacity(self) -> int:
        return capacity(self)


def capacity(sys: DynSystem) -> int:
    """``N = sum n_i`` for free systems, ``M = prod n_i`` for abelian ones."""
    ns = [r.n for r in sys.rows]
    return int(sum(ns)) if sys.kind == FREE else int(np.prod(ns))


# ---------------------------------------------------------------------------
# the alpha calculus


def alpha_i(sys: DynSystem, i: int, a) -> np.ndarray:
    return sys.rows[i - 1].apply(a)


def alpha(sys: DynSystem, label, a) -> np.ndarray:
    """``alpha_mu(a) = alpha_{mu_m} ... alpha_{mu_1}(a)`` (rightmost letter first).

    For the abelian kind ``label`` is a multi-index and coordinate powers are
    applied in turn.
    """
    a = np.asarray(a, dtype=complex)
    label = tuple(label)
    if sys.kind == FREE:
        for letter in reversed(label):
            a = sys.rows[letter - 1].apply(a)
        return a
    if len(label) != sys.d:
        raise InvalidParameter("multi-index has the wrong length")
    for i, c in enumerate(label):
        for _ in range(c):
            a = sys.rows[i].apply(a)
    return a


def alpha_table(sys: DynSystem, a, fock: Optional[TruncatedFock] = None) -> Dict[tuple, np.ndarray]:
    """``alpha_label(a)`` for every label of the truncation."""
    fock = sys.fock if fock is None else fock
    table = {}
    for label in fock.basis:
        if sys.fock.degree(label) == 0:
            table[label] = np.asarray(a, dtype=complex)
        elif fock.kind == FREE:
            table[label] = sys.rows[label[0] - 1].apply(table[label[1:]])
        else:
            i = next(k for k, c in enumerate(label) if c > 0)
            prev = label[:i] + (label[i] - 1,) + label[i + 1:]
            table[label] = sys.rows[i].apply(table[prev])
    return table


def hat_u(sys: DynSystem, word) -> np.ndarray:
    """Row of all products ``u_{mu_m,j_m} ... u_{mu_1,j_1}`` (``j_m`` slowest)."""
    word = tuple(word)
    if not word:
        return np.eye(sys.h, dtype=complex)
    R = sys.rows[word[0] - 1].row()
    copies = sys.rows[word[0] - 1].n
    for letter in word[1:]:
        R = R @ np.kron(np.eye(copies), sys.rows[letter - 1].row())
        copies *= sys.rows[letter - 1].n
    return R


def hat_v(sys: DynSystem, word) -> np.ndarray:
    """Column inverse of :func:`hat_u`."""
    word = tuple(word)
    if not word:
        return np.eye(sys.h, dtype=complex)
    C = sys.rows[word[0] - 1].column()
    copies = sys.rows[word[0] - 1].n
    for letter in word[1:]:
        C = np.kron(np.eye(copies), sys.rows[letter - 1].column()) @ C
        copies *= sys.rows[letter - 1].n
    return C


def alpha_product_form(sys: DynSystem, word, a) -> np.ndarray:
    """``alpha_mu(a)`` through ``hat_u_mu (I ⊗ a) hat_v_mu``."""
    U, V = hat_u(sys, word), hat_v(sys, word)
    copies = U.shape[1] // sys.h
    return U @ np.kron(np.eye(copies), np.asarray(a)) @ V


def _abelian_word(m) -> tuple:
    return tuple(i + 1 for i, c in enumerate(m) for _ in range(c))


def uniform_bound(sys: DynSystem) -> float:
    """``max ||hat_u_mu||, ||hat_v_mu||`` over labels of the truncation."""
    K = 1.0
    for label in sys.fock.basis:
        word = label if sys.kind == FREE else _abelian_word(label)
        K = max(K, opnorm(hat_u(sys, word)), opnorm(hat_v(sys, word)))
    return K


def rep_pi(sys: DynSystem, a, check: bool = True) -> Operator:
    """``pi(a)``: block ``alpha_mu(a)`` at ``e_mu``."""
    if check:
        sys.require_in_algebra(a)
    table = alpha_table(sys, a)
    return Operator.block_diagonal([table[mu] for mu in sys.fock.basis], sys.fock)


def rep_pibar(sys: DynSystem, a, check: bool = True) -> Operator:
    """``pibar(a)``: block ``alpha_{reverse(mu)}(a)`` at ``e_mu``."""
    if sys.kind != FREE:
        return rep_pi(sys, a, check)
    if check:
        sys.require_in_algebra(a)
    table = alpha_table(sys, a)
    return Operator.block_diagonal([table[reverse(mu)] for mu in sys.fock.basis], sys.fock)


def rep_rho(sys: DynSystem, x) -> Operator:
    return Operator.ampliation(x, sys.fock)


def L(sys: DynSystem, label) -> Operator:
    """Creation operator on ``H ⊗ Fock`` for the system's kind."""
    if sys.kind == FREE:
        return creation_left(sys.fock, label, sys.h)
    return creation_abelian(sys.fock, label, sys.h)


def R(sys: DynSystem, label) -> Operator:
    return creation_right(sys.fock, label, sys.h)


def generator_label(sys: DynSystem, i: int) -> tuple:
    return (i,) if sys.kind == FREE else unit_vector(sys.d, i)


# ---------------------------------------------------------------------------
# covariance


@dataclass
class CovarianceReport:
    covariance_residual: float
    row_sum_residual: float
    column_inverse_residual: float
    intertwining_residual: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.max_residual <= self.tol

    @property
    def max_residual(self) -> float:
        return max(self.covariance_residual, self.row_sum_residual,
                   self.column_inverse_residual, self.intertwining_residual)

    def as_dict(self) -> dict:
        return {
            "covariance_residual": self.covariance_residual,
            "row_sum_residual": self.row_sum_residual,
            "column_inverse_residual": self.column_inverse_residual,
            "intertwining_residual": self.intertwining_residual,
            "max_residual": self.max_residual,
            "passed": self.passed,
        }


def intertwining_residual(sys: DynSystem) -> float:
    """Worst residual of ``alpha_i(x) u_ij = u_ij x`` and ``v_ij alpha_i(x) = x v_ij``.

    The first is tested on window columns for every matrix unit ``x``; the
    second for matrix units supported in the window.
    """
    h = sys.h
    W = sys.window(1)
    win = set(W.tolist())
    worst = 0.0
    for r in sys.rows:
        for a_, b_ in itertools.product(range(h), repeat=2):
            x = matrix_unit(h, a_, b_)
            ax = r.apply(x)
            for uj, vj in zip(r.u, r.v):
                worst = max(worst, opnorm((ax @ uj - uj @ x)[:, W]))
                if a_ in win:
                    worst = max(worst, opnorm(vj @ ax - x @ vj))
    return worst


def check_covariance(sys: DynSystem, tol: float = 1e-10) -> CovarianceReport:
    """Covariance relations plus the implementing-row relations.

    ``pibar(a) L_i = L_i pibar(alpha_i(a))`` and ``pi(a) R_i = R_i pi(alpha_i(a))``
    (abelian: ``pi(a) L_i = L_i pi(alpha_i(a))``) are compared after a guard
    band of one level, on window-supported H-vectors.  Because those
    relations hold by construction of ``pi``, the report also carries the row
    inverse relations and the intertwining identities; a corrupted inverse
    column shows up there.
    """
    fock = sys.fock
    cols = level_indices(fock, sys.h, fock.max_degree - 1, sys.window(1))
    rows_ = level_indices(fock, sys.h, fock.max_degree - 1)
    cov = 0.0
    for a in sys.algebra:
        for i in range(1, sys.d + 1):
            lab = generator_label(sys, i)
            ai = alpha_i(sys, i, a)
            if sys.kind == FREE:
                pairs = [(rep_pibar(sys, a, False), L(sys, lab), rep_pibar(sys, ai, False)),
                         (rep_pi(sys, a, False), R(sys, lab), rep_pi(sys, ai, False))]
            else:
                pairs = [(rep_pi(sys, a, False), L(sys, lab), rep_pi(sys, ai, False))]
            for rep_a, shift, rep_ai in pairs:
                diff = (rep_a @ shift - shift @ rep_ai).data
                cov = max(cov, opnorm(diff[np.ix_(rows_, cols)]))
    row_sum = max(r.relation_residuals()["row_sum"] for r in sys.rows)
    col_inv = max(r.relation_residuals()["column_inverse"] for r in sys.rows)
    return CovarianceReport(cov, row_sum, col_inv, intertwining_residual(sys), tol)


# ---------------------------------------------------------------------------
# gallery


def binary_weight(n: int) -> int:
    return bin(int(n)).count("1")


def odometer(D: int) -> RowOperator:
    """``S_1 e_n = e_{2n}``, ``S_2 e_n = e_{2n+1}`` on ``C^D``, window ``2n+1 < D``."""
    if D < 2:
        raise InvalidParameter("odometer needs D >= 2")
    S1 = np.zeros((D, D), dtype=complex)
    S2 = np.zeros((D, D), dtype=complex)
    for n in range(D):
        if 2 * n < D:
            S1[2 * n, n] = 1
        if 2 * n + 1 < D:
            S2[2 * n + 1, n] = 1
    window = tuple(n for n in range(D) if 2 * n + 1 < D)
    return RowOperator((S1, S2), (S1.T.copy(), S2.T.copy()), window, f"odometer({D})")


def binary_weight_unitary(D: int, lam: complex = 1.0, mu: complex = 1.0) -> np.ndarray:
    """``U = lam * diag(mu^{phi(n)})`` with ``phi`` the binary weight."""
    _check_unimodular(lam, mu)
    return lam * np.diag([mu ** binary_weight(n) for n in range(D)]).astype(complex)


def bilateral_labels(D: int) -> np.ndarray:
    if D < 2 or D % 2:
        raise InvalidParameter("bilateral window needs an even D >= 2")
    return np.arange(-D // 2, D // 2)


def bilateral_odometer(D: int) -> RowOperator:
    """The Cuntz pair ``e_n -> e_{2n}, e_{2n+1}`` on the window ``-D/2 <= n < D/2`` of Z."""
    labels = bilateral_labels(D)
    pos = {int(n): p for p, n in enumerate(labels)}
    S1 = np.zeros((D, D), dtype=complex)
    S2 = np.zeros((D, D), dtype=complex)
    window = []
    for n in labels:
        n = int(n)
        if 2 * n in pos:
            S1[pos[2 * n], pos[n]] = 1
        if 2 * n + 1 in pos:
            S2[pos[2 * n + 1], pos[n]] = 1
        if 2 * n in pos and 2 * n + 1 in pos:
            window.append(pos[n])
    return RowOperator((S1, S2), (S1.T.copy(), S2.T.copy()), tuple(window),
                       f"bilateral_odometer({D})")


def bilateral_swap(D: int, lam: complex = 1.0, mu: complex = 1.0) -> Dict[str, np.ndarray]:
    """The two unitary forms commuting with the bilateral odometer.

    ``diagonal``: ``lam I_{H1} ⊕ mu I_{H2}``; ``swap``: ``e_n -> lam e_{-n-1}``
    for ``n >= 0`` and ``e_{-n-1} -> mu e_n``.  H1 = span{e_n, n >= 0}.
    """
    _check_unimodular(lam, mu)
    labels = bilateral_labels(D)
    pos = {int(n): p for p, n in enumerate(labels)}
    diag = np.diag([lam if n >= 0 else mu for n in labels]).astype(complex)
    swap = np.zeros((D, D), dtype=complex)
    for n in labels:
        n = int(n)
        if n >= 0:
            swap[pos[-n - 1], pos[n]] = lam
        else:
            swap[pos[-n - 1], pos[n]] = mu
    return {"diagonal": diag, "swap": swap, "labels": labels}


def clock_shift(D: int) -> Tuple[np.ndarray, np.ndarray]:
    """Clock ``U e_k = w^k e_k`` and shift ``V e_k = e_{k+1}``: ``UV = w VU``, ``w = e^{2 pi i/D}``."""
    if D < 1:
        raise InvalidParameter("clock_shift needs D >= 1")
    w = np.exp(2j * np.pi / D)
    U = np.diag(w ** np.arange(D))
    V = np.roll(np.eye(D, dtype=complex), 1, axis=0)
    return U, V


def _check_unimodular(*zs):
    for z in zs:
        if abs(abs(z) - 1) > 1e-12:
            raise InvalidParameter(f"expected a unimodular scalar, got {z}")


GALLERY = ("odometer", "binary_weight_unitary", "bilateral_swap", "bilateral_odometer",
           "clock_shift")


def gallery(name: str, **params):
    """Named dynamics.  Unitary entries come back as rows implementing ``ad``."""
    if name == "odometer":
        return odometer(int(params["D"]))
    if name == "binary_weight_unitary":
        U = binary_weight_unitary(int(params["D"]), params.get("lam", 1.0), params.get("mu", 1.0))
        return RowOperator.from_unitaries(U, name="binary_weight")
    if name == "bilateral_odometer":
        return bilateral_odometer(int(params["D"]))
    if name == "bilateral_swap":
        forms = bilateral_swap(int(params["D"]), params.get("lam", 1.0), params.get("mu", 1.0))
        return {k: RowOperator.from_unitaries(forms[k], name=f"bilateral_{k}")
                for k in ("diagonal", "swap")}
    if name == "clock_shift":
        U, V = clock_shift(int(params["D"]))
        return (RowOperator.from_unitaries(U, name="clock"),
                RowOperator.from_unitaries(V, name="shift"))
    raise InvalidParameter(f"unknown gallery entry {name!r}")


# ---------------------------------------------------------------------------
# commuting endomorphisms

Endo = Union[RowOperator, Callable[[np.ndarray], np.ndarray]]


class CommutingResult(NamedTuple):
    ok: bool
    residual: float
    worst: Optional[Tuple[int, int]]


def _as_map(e: Endo) -> Callable[[np.ndarray], np.ndarray]:
    return e.apply if isinstance(e, RowOperator) else e


def check_commuting(endo_a: Endo, endo_b: Endo, window=None, tol: float = 1e-10,
                    h: Optional[int] = None) -> CommutingResult:
    """Max of ``||ab(E_ij) - ba(E_ij)||`` over window-supported matrix units."""
    fa, fb = _as_map(endo_a), _as_map(endo_b)
    if h is None:
        h = next(e.h for e in (endo_a, endo_b) if isinstance(e, RowOperator))
    W = np.arange(h) if window is None else np.asarray(window, dtype=int)
    worst, where = 0.0, None
    for i in W:
        for j in W:
            x = matrix_unit(h, int(i), int(j))
            r = opnorm(fa(fb(x)) - fb(fa(x)))
            if r > worst:
                worst, where = r, (int(i), int(j))
    return CommutingResult(worst <= tol, worst, where)


@dataclass
class LacaResult:
    W: np.ndarray
    equation_residual: float
    unitarity_residual: float

    def passed(self, tol: float) -> bool:
        return self.equation_residual <= tol and self.unitarity_residual <= tol


def _family(f) -> List[np.ndarray]:
    if isinstance(f, RowOperator):
        return list(f.u)
    return [np.asarray(x, dtype=complex) for x in f]


def laca_intertwiner(s_fam, t_fam, window=None, tol: float = 1e-10) -> LacaResult:
    """Solve ``t_j s_i = sum_{(k,l)} w_{(k,l),(i,j)} s_k t_l`` on window columns.

    Rows and columns of ``W`` are indexed by pairs ``(k, l)`` flattened as
    ``k*m + l`` with ``m = len(t_fam)``.  Raises InsufficientWindow if the
    window columns do not determine ``W``.
    """
    s, t = _family(s_fam), _family(t_fam)
    n, m = len(s), len(t)
    h = s[0].shape[0]
    cols = np.arange(h) if window is None else np.asarray(window, dtype=int)
    basis = np.stack([(s[k] @ t[l])[:, cols].reshape(-1)
                      for k in range(n) for l in range(m)], axis=1)
    if numerical_rank(basis) < n * m:
        raise InsufficientWindow(f"window of size {len(cols)} does not determine the "
                                 f"{n * m}x{n * m} intertwiner")
    rhs = np.stack([(t[j] @ s[i])[:, cols].reshape(-1)
                    for i in range(n) for j in range(m)], axis=1)
    W, *_ = np.linalg.lstsq(basis, rhs, rcond=None)
    eq = opnorm(basis @ W - rhs)
    unit = opnorm(W.conj().T @ W - np.eye(n * m))
    return LacaResult(W, float(eq), float(unit))


# ---------------------------------------------------------------------------
# commutant transport


class TransportResult(NamedTuple):
    ok: bool
    commutant_residual: float
    transport_residual: float


def commutator_with_algebra(algebra: SpanBasis, y, window=None) -> float:
    """Worst ``||[a, y]||`` over the algebra basis, compressed to ``window`` when given."""
    y = np.asarray(y)
    if window is None:
        return max((opnorm(a @ y - y @ a) for a in algebra), default=0.0)
    ix = np.ix_(window, window)
    yw = y[ix]
    return max((opnorm(a[ix] @ yw - yw @ a[ix]) for a in algebra), default=0.0)


def check_commutant_transport(sys: DynSystem, y, tol: float = 1e-10) -> TransportResult:
    """Check ``y in A'`` and then ``v_{i,j} y u_{i,k} in A'`` for all ``i, j, k``.

    The transported elements are compared after compressing everything to
    the window, where the row relations hold.
    """
    W = sys.window(1)
    y_res = commutator_with_algebra(sys.algebra, y)
    worst = 0.0
    for r in sys.rows:
        for vj in r.v:
            for uk in r.u:
                worst = max(worst, commutator_with_algebra(sys.algebra, vj @ y @ uk, W))
    return TransportResult(y_res <= tol and worst <= tol, y_res, worst)
