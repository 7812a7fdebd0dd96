"""Dense complex linear algebra on ``H ⊗ Fock`` truncations.

Layout convention: the Fock index is the outer (slow) index, so the
``(mu, nu)`` block of an operator is the contiguous ``h x h`` slice at
rows ``h*pos(mu)`` and columns ``h*pos(nu)``.  Consequently the operator
``x ⊗ f`` (``x`` on H, ``f`` on Fock) is ``np.kron(f, x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidParameter
from .fock import TruncatedFock

DEFAULT_RANK_TOL = 1e-8


def kron(a, b) -> np.ndarray:
    """Standard Kronecker product (``a`` outer, ``b`` inner)."""
    return np.kron(np.asarray(a), np.asarray(b))


def tensor(x, f) -> np.ndarray:
    """Matrix of ``x ⊗ f`` on ``H ⊗ Fock`` in the Fock-outer layout."""
    return np.kron(np.asarray(f), np.asarray(x))


def matrix_unit(n: int, i: int, j: int, dtype=complex) -> np.ndarray:
    e = np.zeros((n, n), dtype=dtype)
    e[i, j] = 1
    return e


def opnorm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True, eq=False)
class Operator:
    """A matrix acting on ``C^h ⊗`` (truncated Fock space)."""

    data: np.ndarray
    h: int
    fock: TruncatedFock

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        n = self.h * self.fock.size
        if data.shape != (n, n):
            raise InvalidParameter(f"operator shape {data.shape} does not match h*D = {n}")
        if not np.all(np.isfinite(data)):
            raise InvalidParameter("operator has non-finite entries")
        object.__setattr__(self, "data", data)

    # construction -------------------------------------------------------
    @classmethod
    def identity(cls, fock: TruncatedFock, h: int) -> "Operator":
        return cls(np.eye(h * fock.size, dtype=complex), h, fock)

    @classmethod
    def zeros(cls, fock: TruncatedFock, h: int) -> "Operator":
        n = h * fock.size
        return cls(np.zeros((n, n), dtype=complex), h, fock)

    @classmethod
    def ampliation(cls, x, fock: TruncatedFock) -> "Operator":
        """``x ⊗ I`` on ``H ⊗ Fock``."""
        x = np.asarray(x, dtype=complex)
        return cls(tensor(x, np.eye(fock.size)), x.shape[0], fock)

    @classmethod
    def block_diagonal(cls, blocks: Sequence[np.ndarray], fock: TruncatedFock) -> "Operator":
        h = np.asarray(blocks[0]).shape[0]
        out = np.zeros((h * fock.size,) * 2, dtype=complex)
        for p, b in enumerate(blocks):
            out[p * h:(p + 1) * h, p * h:(p + 1) * h] = b
        return cls(out, h, fock)

    def _like(self, data) -> "Operator":
        return Operator(data, self.h, self.fock)

    def _check(self, other: "Operator"):
        if self.h != other.h or self.fock != other.fock:
            raise InvalidParameter("operators act on different spaces")

    # arithmetic ---------------------------------------------------------
    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return self._like(self.data @ other.data)
        return self.data @ np.asarray(other)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return self._like(self.data + other.data)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return self._like(self.data - other.data)

    def __mul__(self, c) -> "Operator":
        return self._like(self.data * c)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return self._like(-self.data)

    def adjoint(self) -> "Operator":
        return self._like(self.data.conj().T)

    @property
    def H(self) -> "Operator":
        return self.adjoint()

    def norm(self) -> float:
        return opnorm(self.data)

    def commutator(self, other: "Operator") -> "Operator":
        return self @ other - other @ self

    # blocks -------------------------------------------------------------
    def block(self, mu, nu) -> np.ndarray:
        i = self.fock.position(mu)
        j = self.fock.position(nu)
        h = self.h
        return self.data[i * h:(i + 1) * h, j * h:(j + 1) * h]

    def blocks_view(self) -> np.ndarray:
        """View of shape ``(D, D, h, h)`` indexed by Fock positions."""
        D, h = self.fock.size, self.h
        return self.data.reshape(D, h, D, h).transpose(0, 2, 1, 3)

    def compress(self, max_level: int) -> np.ndarray:
        """The matrix ``P T P`` restricted to labels of degree <= max_level."""
        idx = level_indices(self.fock, self.h, max_level)
        return self.data[np.ix_(idx, idx)]


def block_entry(T: Operator, mu, nu) -> np.ndarray:
    return T.block(mu, nu)


def level_indices(fock: TruncatedFock, h: int, max_level: int,
                  window: Optional[Sequence[int]] = None) -> np.ndarray:
    """Flat indices of ``H ⊗ span{e_w : |w| <= max_level}``.

    With ``window`` only the listed H-basis vectors are kept in each block.
    """
    pos = np.flatnonzero(fock.degrees <= max_level)
    inner = np.arange(h) if window is None else np.asarray(sorted(window), dtype=int)
    return (pos[:, None] * h + inner[None, :]).ravel()


def graded_projection(fock: TruncatedFock, k: int, h: int = 1) -> Operator:
    if not 0 <= k <= fock.max_degree:
        raise InvalidParameter(f"level {k} outside 0..{fock.max_degree}")
    diag = np.repeat((fock.degrees == k).astype(complex), h)
    return Operator(np.diag(diag), h, fock)


def projection_upto(fock: TruncatedFock, k: int, h: int = 1) -> np.ndarray:
    diag = np.repeat((fock.degrees <= k).astype(complex), h)
    return np.diag(diag)


# ---------------------------------------------------------------------------
# nullspaces and spans


def _threshold(s: np.ndarray, tol: float) -> float:
    top = float(s[0]) if s.size else 0.0
    return tol * max(top, 1.0)


def nullspace(M, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical nullspace of ``M``.

    Singular values below ``tol * max(sigma_max, 1)`` count as zero.
    """
    if tol <= 0:
        raise InvalidParameter("tol must be positive")
    M = np.atleast_2d(np.asarray(M))
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > _threshold(s, tol)))
    return vh[rank:].conj().T


def numerical_rank(M, tol: float = DEFAULT_RANK_TOL) -> int:
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > _threshold(s, tol)))


class StackedNullspace:
    """Nullspace of a tall stack of blocks, accumulated through QR.

    Keeps only the ``n x n`` triangular factor, so memory stays at ``n^2``
    regardless of how many constraint blocks are added.
    """

    def __init__(self, n: int):
        self.n = n
        self._r = np.zeros((0, n), dtype=complex)
        self._scale = 0.0

    def add(self, block) -> None:
        block = np.asarray(block, dtype=complex).reshape(-1, self.n)
        if block.shape[0] == 0:
            return
        self._scale = max(self._scale, opnorm(block))
        stacked = np.vstack([self._r, block])
        if stacked.shape[0] > self.n:
            self._r = np.linalg.qr(stacked, mode="r")
        else:
            self._r = stacked

    def solve(self, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
        return nullspace(self._r, tol)

    def nullity(self, tol: float = DEFAULT_RANK_TOL) -> int:
        return self.n - numerical_rank(self._r, tol)


class SpanBasis:
    """Orthonormal (Frobenius) basis of a finite-dimensional matrix span."""

    def __init__(self, mats: np.ndarray, shape: tuple):
        self.mats = mats
        self.shape = tuple(shape)

    @classmethod
    def from_matrices(cls, mats: Iterable, tol: float = DEFAULT_RANK_TOL,
                      shape: Optional[tuple] = None) -> "SpanBasis":
        mats = [np.asarray(m, dtype=complex) for m in mats]
        if not mats:
            if shape is None:
                raise InvalidParameter("shape required for an empty span")
            return cls(np.zeros((0,) + tuple(shape), dtype=complex), shape)
        shape = mats[0].shape
        V = np.stack([m.reshape(-1) for m in mats], axis=1)
        u, s, _ = np.linalg.svd(V, full_matrices=False)
        rank = int(np.sum(s > _threshold(s, tol)))
        basis = u[:, :rank].T.reshape((rank,) + shape)
        return cls(basis, shape)

    @classmethod
    def from_columns(cls, cols: np.ndarray, shape: tuple) -> "SpanBasis":
        """Wrap orthonormal vectorised matrices (row-major) as a span."""
        k = cols.shape[1]
        return cls(cols.T.reshape((k,) + tuple(shape)).copy(), shape)

    @classmethod
    def full(cls, n: int) -> "SpanBasis":
        return cls(np.stack([matrix_unit(n, i, j) for i in range(n) for j in range(n)]), (n, n))

    @property
    def dim(self) -> int:
        return self.mats.shape[0]

    def __len__(self):
        return self.dim

    def __iter__(self):
        return iter(self.mats)

    def __getitem__(self, i):
        return self.mats[i]

    def vectors(self) -> np.ndarray:
        """Basis as columns of a ``prod(shape) x dim`` matrix."""
        return self.mats.reshape(self.dim, -1).T

    def coefficients(self, X) -> np.ndarray:
        return self.vectors().conj().T @ np.asarray(X).reshape(-1)

    def project(self, X) -> np.ndarray:
        return (self.vectors() @ self.coefficients(X)).reshape(self.shape)

    def residual(self, X) -> float:
        """Relative Frobenius distance from ``X`` to the span."""
        X = np.asarray(X)
        nx = np.linalg.norm(X)
        if nx == 0:
            return 0.0
        return float(np.linalg.norm(X - self.project(X)) / nx)

    def contains(self, X, tol: float = 1e-9) -> bool:
        return self.residual(X) <= tol

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return np.tensordot(c, self.mats, axes=1)

    def map(self, f, tol: float = DEFAULT_RANK_TOL) -> "SpanBasis":
        return SpanBasis.from_matrices([f(m) for m in self.mats], tol, shape=None
                                       ) if self.dim else self

    def __repr__(self):
        return f"SpanBasis(dim={self.dim}, shape={self.shape})"


class SpanComparison(NamedTuple):
    relation: str
    residual_a_in_b: float
    residual_b_in_a: float

    @property
    def max_residual(self) -> float:
        return max(self.residual_a_in_b, self.residual_b_in_a)


def _max_residual(A: SpanBasis, B: SpanBasis) -> float:
    if A.dim == 0:
        return 0.0
    if B.dim == 0:
        return 1.0
    Va, Vb = A.vectors(), B.vectors()
    R = Va - Vb @ (Vb.conj().T @ Va)
    return float(np.max(np.linalg.norm(R, axis=0)))


def compare_spans(A: SpanBasis, B: SpanBasis, tol: float = 1e-8) -> SpanComparison:
    """Compare two spans through projection residuals.

    ``relation`` is one of ``"equal"``, ``"A<B"``, ``"B<A"`` or
    ``"incomparable"`` (``A<B`` meaning A is strictly contained in B).
    """
    if A.shape != B.shape:
        raise InvalidParameter(f"ambient shapes differ: {A.shape} vs {B.shape}")
    ab = _max_residual(A, B)
    ba = _max_residual(B, A)
    a_in_b, b_in_a = ab <= tol, ba <= tol
    if a_in_b and b_in_a:
        rel = "equal"
    elif a_in_b:
        rel = "A<B"
    elif b_in_a:
        rel = "B<A"
    else:
        rel = "incomparable"
    return SpanComparison(rel, ab, ba)
