"""Similarity between a free semicrossed product over B(H) and B(H) ⊗ L_N.

The larger alphabet has one letter per row entry, ordered
``(1,1), ..., (1,n_1), (2,1), ..., (d,n_d)``.  A word over it,
``(i_k,j_k) ... (i_1,j_1)``, is sent to the word ``i_k ... i_1`` with the
H-block ``u_{i_1,j_1} ... u_{i_k,j_k}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .dynamics import DynSystem, alpha_table, capacity, rep_pibar
from .errors import Unsupported
from .fock import FREE, TruncatedFock, reverse
from .generators import creation_left
from .linops import level_indices, matrix_unit, opnorm

__all__ = ["capacity", "letter_pairs", "build_U", "verify_similarity", "SimilarityReport"]


def letter_pairs(sys: DynSystem) -> List[Tuple[int, int]]:
    """Pairs ``(i, j)`` in the canonical order; letter ``k`` is ``pairs[k-1]``."""
    return [(i + 1, j + 1) for i, r in enumerate(sys.rows) for j in range(r.n)]


@dataclass
class SimilarityPair:
    U: np.ndarray
    U_inv: np.ndarray
    source: TruncatedFock
    target: TruncatedFock
    pairs: List[Tuple[int, int]]


def build_U(sys: DynSystem, L: Optional[int] = None) -> SimilarityPair:
    """``U`` from ``H ⊗ Fock_N`` onto ``H ⊗ Fock_d`` and its left-inverse formula.

    ``U_inv`` has block ``v_{i_k,j_k} ... v_{i_1,j_1}`` at the same position,
    so ``U U_inv = I`` exactly and ``U_inv U = I`` on window vectors.
    """
    if sys.kind != FREE:
        raise Unsupported("build_U needs a free system; split abelian systems first")
    L = sys.L if L is None else int(L)
    pairs = letter_pairs(sys)
    h = sys.h
    src = TruncatedFock(FREE, len(pairs), L)
    tgt = TruncatedFock(FREE, sys.d, L)
    U = np.zeros((h * tgt.size, h * src.size), dtype=complex)
    U_inv = np.zeros((h * src.size, h * tgt.size), dtype=complex)
    for q, word in enumerate(src.basis):
        letters = [pairs[c - 1] for c in word]
        mu = tuple(i for i, _ in letters)
        p = tgt.position(mu)
        fwd = np.eye(h, dtype=complex)
        back = np.eye(h, dtype=complex)
        for i, j in letters:
            back = back @ sys.rows[i - 1].v[j - 1]
        for i, j in reversed(letters):
            fwd = fwd @ sys.rows[i - 1].u[j - 1]
        U[p * h:(p + 1) * h, q * h:(q + 1) * h] = fwd
        U_inv[q * h:(q + 1) * h, p * h:(p + 1) * h] = back
    return SimilarityPair(U, U_inv, src, tgt, pairs)


def _windowed_columns(fock: TruncatedFock, h: int, sys: DynSystem, shift: int = 0,
                      max_level: Optional[int] = None) -> np.ndarray:
    """Columns at level ``k`` restricted to ``xi in W_{k+shift}``."""
    top = fock.max_degree if max_level is None else max_level
    cols = []
    for k in range(top + 1):
        win = sys.window(k + shift)
        for p in fock.level(k):
            cols.extend(p * h + win)
    return np.array(sorted(cols), dtype=int)


@dataclass
class SimilarityReport:
    residuals: Dict[str, float]
    norm_U: float
    norm_U_inv: float
    K: float
    tol: float
    column_gram_residual: float

    @property
    def bound_ok(self) -> bool:
        return self.norm_U * self.norm_U_inv <= self.K ** 2 * (1 + 1e-9)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol and self.bound_ok

    def as_dict(self) -> dict:
        return {
            "residuals": self.residuals,
            "max_residual": self.max_residual,
            "norm_U": self.norm_U,
            "norm_U_inv": self.norm_U_inv,
            "K": self.K,
            "bound_ok": self.bound_ok,
            "column_gram_residual": self.column_gram_residual,
            "passed": self.passed,
        }


def verify_similarity(sys: DynSystem, L: Optional[int] = None, tol: float = 1e-9) -> SimilarityReport:
    """Residuals of the conjugation identities for ``U``.

    ``intertwine``: ``pibar(x) U = U rho(x)`` over matrix units of B(H),
    columns at level ``k`` with H-part in ``W_k``.
    ``shift``: ``L_i U = U sum_j L_(i,j) rho(v_ij)`` (exact).
    ``recover``: ``U_inv L_i U rho(u_ij) = L_(i,j)`` on levels ``<= L-1``
    with H-part in ``W_{k+1}``.
    ``inverse``: ``U U_inv = I`` and ``U_inv U = I`` on window columns.
    """
    if sys.kind != FREE:
        raise Unsupported("verify_similarity needs a free system")
    L = sys.L if L is None else int(L)
    if L != sys.L:
        sys = sys.with_truncation(L)
    sp = build_U(sys, L)
    U, Ui, src, tgt = sp.U, sp.U_inv, sp.source, sp.target
    h = sys.h
    res = {}

    cols_k = _windowed_columns(src, h, sys, 0)
    worst = 0.0
    for a, b in np.ndindex(h, h):
        x = matrix_unit(h, a, b)
        pb = rep_pibar(sys, x, check=False).data
        rho_src = np.kron(np.eye(src.size), x)
        worst = max(worst, opnorm((pb @ U - U @ rho_src)[:, cols_k]))
    res["intertwine"] = worst

    worst = 0.0
    below = level_indices(src, h, L - 1)
    for i in range(1, sys.d + 1):
        Li = creation_left(tgt, (i,), h).data
        rhs = np.zeros_like(U)
        for j in range(sys.rows[i - 1].n):
            letter = sp.pairs.index((i, j + 1)) + 1
            Lij = creation_left(src, (letter,), h).data
            rhs = rhs + U @ Lij @ np.kron(np.eye(src.size), sys.rows[i - 1].v[j])
        worst = max(worst, opnorm((Li @ U - rhs)[:, below]))
    res["shift"] = worst

    worst = 0.0
    cols_next = _windowed_columns(src, h, sys, 1, L - 1)
    for i in range(1, sys.d + 1):
        Li = creation_left(tgt, (i,), h).data
        for j in range(sys.rows[i - 1].n):
            letter = sp.pairs.index((i, j + 1)) + 1
            Lij = creation_left(src, (letter,), h).data
            lhs = Ui @ Li @ U @ np.kron(np.eye(src.size), sys.rows[i - 1].u[j])
            worst = max(worst, opnorm((lhs - Lij)[:, cols_next]))
    res["recover"] = worst

    right = opnorm(U @ Ui - np.eye(U.shape[0]))
    left = opnorm((Ui @ U - np.eye(U.shape[1]))[:, cols_k])
    res["inverse"] = max(right, left)

    gram = U.conj().T @ U
    gram_res = opnorm((gram - np.eye(U.shape[1]))[np.ix_(cols_k, cols_k)])
    return SimilarityReport(res, opnorm(U), opnorm(Ui), sys.K, tol, gram_res)
