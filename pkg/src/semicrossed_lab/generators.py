"""Creation operators, gauge action, Fourier coefficients and Cesàro sums.

Truncated creation operators annihilate any basis vector that would leave
the truncation.  Identities involving operators of total creation degree
``k`` are therefore only asserted after compressing to levels ``<= L - k``.
"""
from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidParameter
from .fock import FREE, TruncatedFock, leq_left, leq_multi, leq_right
from .linops import Operator, opnorm, tensor


def _check_label(fock: TruncatedFock, label) -> tuple:
    label = tuple(int(c) for c in label)
    fock.check_letter_range(label)
    if fock.kind == FREE:
        too_big = len(label) > fock.L
    elif fock.box:
        too_big = any(c > fock.L for c in label)
    else:
        too_big = sum(label) > fock.L
    if too_big:
        raise InvalidParameter(f"label {label} exceeds the truncation L={fock.L}")
    return label


def _shift_matrix(fock: TruncatedFock, label, side: str) -> np.ndarray:
    D = fock.size
    f = np.zeros((D, D), dtype=complex)
    for j, w in enumerate(fock.basis):
        target = fock.shift_target(label, w, side)
        if target is not None:
            f[fock.index[target], j] = 1.0
    return f


def creation_left(fock: TruncatedFock, mu, h: int = 1) -> Operator:
    """``I_h ⊗ l_mu``: ``e_w -> e_{mu w}``."""
    if fock.kind != FREE:
        raise InvalidParameter("creation_left needs a free-semigroup truncation")
    mu = _check_label(fock, mu)
    return Operator(tensor(np.eye(h), _shift_matrix(fock, mu, "left")), h, fock)


def creation_right(fock: TruncatedFock, nu, h: int = 1) -> Operator:
    """``I_h ⊗ r_nu``: ``e_w -> e_{w reverse(nu)}``."""
    if fock.kind != FREE:
        raise InvalidParameter("creation_right needs a free-semigroup truncation")
    nu = _check_label(fock, nu)
    return Operator(tensor(np.eye(h), _shift_matrix(fock, nu, "right")), h, fock)


def creation_abelian(fock: TruncatedFock, m, h: int = 1) -> Operator:
    if fock.kind == FREE:
        raise InvalidParameter("creation_abelian needs an abelian truncation")
    m = _check_label(fock, m)
    return Operator(tensor(np.eye(h), _shift_matrix(fock, m, "left")), h, fock)


def unit_vector(d: int, i: int) -> tuple:
    """The ``i``-th (1-based) canonical basis element of Z_+^d."""
    return tuple(1 if k == i - 1 else 0 for k in range(d))


def gauge(fock: TruncatedFock, s, h: int = 1) -> Operator:
    """The gauge unitary ``U_s`` (scalar ``s``) or ``U_{s_1..s_d}``."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if fock.kind == FREE or s_arr.size == 1:
        phase = np.exp(1j * fock.degrees * float(s_arr[0]))
    else:
        if s_arr.size != fock.d:
            raise InvalidParameter(f"need {fock.d} gauge angles, got {s_arr.size}")
        labels = np.array(fock.basis, dtype=float)
        phase = np.exp(1j * labels @ s_arr)
    return Operator(np.diag(np.repeat(phase, h)), h, fock)


def _label_array(fock: TruncatedFock) -> np.ndarray:
    return np.array(fock.basis, dtype=int).reshape(fock.size, -1)


def _mask(fock: TruncatedFock, h: int, keep: np.ndarray) -> np.ndarray:
    return np.kron(keep.astype(float), np.ones((h, h)))


def fourier_graded(T: Operator, m: int) -> Operator:
    """``G_m(T) = sum_k P_{k+m} T P_k`` by total degree."""
    deg = T.fock.degrees
    keep = (deg[:, None] - deg[None, :]) == int(m)
    return Operator(T.data * _mask(T.fock, T.h, keep), T.h, T.fock)


def fourier_graded_multi(T: Operator, m) -> Operator:
    """Multi-degree coefficient ``G_m`` for ``m`` in Z^d (abelian kind)."""
    if T.fock.kind == FREE:
        raise InvalidParameter("multi-degree Fourier coefficients need an abelian truncation")
    m = np.asarray(m, dtype=int)
    lab = _label_array(T.fock)
    diff = lab[:, None, :] - lab[None, :, :]
    keep = np.all(diff == m[None, None, :], axis=2)
    return Operator(T.data * _mask(T.fock, T.h, keep), T.h, T.fock)


def fourier_quadrature(T: Operator, m, q: Optional[int] = None) -> Operator:
    """Uniform ``q``-point rule for the gauge integral defining ``G_m``.

    Nodes are ``s_j = 2*pi*j/q - pi``.  A tuple ``m`` uses the tensor grid
    over ``[-pi, pi]^d``.  Exact once ``q >= 2*max_degree + 1``.
    """
    fock = T.fock
    q = 2 * fock.max_degree + 1 if q is None else int(q)
    if q < 1:
        raise InvalidParameter("q must be >= 1")
    nodes = 2 * np.pi * np.arange(q) / q - np.pi
    multi = np.ndim(m) > 0
    if multi:
        m = np.asarray(m, dtype=float)
        grids = np.meshgrid(*([nodes] * fock.d), indexing="ij")
        points = np.stack([g.ravel() for g in grids], axis=1)
    else:
        points = nodes[:, None]
    acc = np.zeros_like(T.data)
    for s in points:
        Us = gauge(fock, s if multi else s[0], T.h)
        weight = np.exp(-1j * (float(m @ s) if multi else m * s[0]))
        acc += (Us.data @ T.data @ Us.data.conj().T) * weight
    return Operator(acc / len(points), T.h, fock)


def cesaro(T: Operator, n: int) -> Operator:
    """Cesàro mean ``sigma_{n+1}(T) = sum_{|k|<=n} (1 - |k|/(n+1)) G_k(T)``."""
    if n < 0:
        raise InvalidParameter("n must be >= 0")
    top = min(n, T.fock.max_degree)
    acc = Operator.zeros(T.fock, T.h)
    for k in range(-top, top + 1):
        acc = acc + (1 - abs(k) / (n + 1)) * fourier_graded(T, k)
    return acc


def cesaro_error_bound(T: Operator, n: int) -> float:
    top = T.fock.max_degree
    return sum(abs(k) / (n + 1) * fourier_graded(T, k).norm() for k in range(-top, top + 1))


class Triangularity(NamedTuple):
    ok: bool
    worst_block: Optional[tuple]
    worst_norm: float


_ORDERS = {
    "left": leq_left,
    "right": leq_right,
    "abelian": leq_multi,
}


def allowed_block_mask(fock: TruncatedFock, flavor: str) -> np.ndarray:
    """Boolean ``D x D`` mask of blocks ``(mu, nu)`` allowed for the flavor."""
    try:
        order = _ORDERS[flavor]
    except KeyError:
        raise InvalidParameter(f"unknown triangularity flavor {flavor!r}") from None
    if (flavor == "abelian") != (fock.kind != FREE):
        raise InvalidParameter(f"flavor {flavor!r} does not match Fock kind {fock.kind!r}")
    B = fock.basis
    return np.array([[order(nu, mu) for nu in B] for mu in B], dtype=bool)


def is_lower_triangular(T: Operator, flavor: str = "left", tol: float = 1e-10) -> Triangularity:
    """Check that every forbidden block has norm <= tol.

    Returns the worst offending block ``(mu, nu)`` (first in basis order on
    ties) together with its norm.
    """
    allowed = allowed_block_mask(T.fock, flavor)
    blocks = T.blocks_view()
    worst, worst_norm = None, 0.0
    for i, j in zip(*np.nonzero(~allowed)):
        nb = opnorm(blocks[i, j])
        if nb > worst_norm:
            worst, worst_norm = (T.fock.basis[i], T.fock.basis[j]), nb
    return Triangularity(worst_norm <= tol, worst if worst_norm > tol else None, worst_norm)


def triangular_fourier_formula(T: Operator, m: int, flavor: str = "left") -> Operator:
    """Reassemble ``G_m(T)`` block by block from the lower-triangular formula.

    left:  ``sum_{|mu|=m} L_mu (sum_w T_{mu w, w} ⊗ p_w)``
    right: ``sum_{|mu|=m} R_mu (sum_w T_{w rev(mu), w} ⊗ p_w)``
    abelian: ``L_m (sum_w T_{m+w, w} ⊗ p_w)`` for a multi-index ``m``.
    Negative degrees give 0.
    """
    fock, h = T.fock, T.h
    out = Operator.zeros(fock, h)
    if flavor == "abelian":
        m = tuple(m)
        if any(c < 0 for c in m):
            return out
        labels = [m] if m in fock else []
    else:
        if m < 0:
            return out
        labels = [mu for mu in fock.basis if len(mu) == m]
    for mu in labels:
        diag = []
        for w in fock.basis:
            if flavor == "right":
                target = fock.shift_target(mu, w, "right")
            else:
                target = fock.shift_target(mu, w, "left")
            diag.append(T.block(target, w) if target is not None else np.zeros((h, h)))
        inner = Operator.block_diagonal(diag, fock)
        if flavor == "left":
            shift = creation_left(fock, mu, h)
        elif flavor == "right":
            shift = creation_right(fock, mu, h)
        else:
            shift = creation_abelian(fock, mu, h)
        out = out + shift @ inner
    return out


def eigenvector(fock: TruncatedFock, lam: Sequence[complex], normalize: bool = False) -> np.ndarray:
    """Truncated eigenvector ``(1-|lam|^2)^{1/2} sum_w w(lam) e_w`` of the ``l_i^*``."""
    if fock.kind != FREE:
        raise InvalidParameter("eigenvector is defined for the free truncation")
    lam = np.asarray(lam, dtype=complex)
    if lam.shape != (fock.d,):
        raise InvalidParameter(f"lambda must have {fock.d} entries")
    r2 = float(np.sum(np.abs(lam) ** 2))
    if r2 >= 1:
        raise InvalidParameter("need ||lambda|| < 1")
    coeff = np.array([np.prod(lam[np.array(w, dtype=int) - 1]) if w else 1.0
                      for w in fock.basis], dtype=complex)
    vec = np.sqrt(1 - r2) * coeff
    if normalize:
        vec = vec / np.linalg.norm(vec)
    return vec


def eigen_residual(fock: TruncatedFock, lam: Sequence[complex], normalize: bool = False) -> float:
    """``sqrt(sum_i ||l_i^* v - lam_i v||^2)`` for the truncated eigenvector."""
    v = eigenvector(fock, lam, normalize)
    lam = np.asarray(lam, dtype=complex)
    total = 0.0
    for i in range(1, fock.d + 1):
        li = creation_left(fock, (i,)).data
        total += np.linalg.norm(li.conj().T @ v - lam[i - 1] * v) ** 2
    return float(np.sqrt(total))


def random_operator(fock: TruncatedFock, h: int, rng: np.random.Generator) -> Operator:
    n = h * fock.size
    return Operator(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)), h, fock)


def compressed_residual(X: Operator, guard: int) -> float:
    """Operator norm of ``P X P`` with ``P`` the projection on levels <= L - guard."""
    return opnorm(X.compress(X.fock.max_degree - guard))


__all__ = [
    "creation_left", "creation_right", "creation_abelian", "gauge",
    "fourier_graded", "fourier_graded_multi", "fourier_quadrature",
    "cesaro", "cesaro_error_bound", "is_lower_triangular", "Triangularity",
    "triangular_fourier_formula", "eigenvector", "eigen_residual",
    "random_operator", "unit_vector", "compressed_residual",
]
