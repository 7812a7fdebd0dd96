"""Sampled reflexive covers and a reflexivity certificate.

``Ref(A) = {T : T xi in A xi for every xi}``.  Every sampled vector gives
necessary linear constraints on ``T``, so intersecting them over many
vectors yields a cover that always contains ``Ref(A)``.  Generic Gaussian
vectors are often cyclic for ``A`` and then constrain nothing; the sampler
therefore mixes them with vectors built from eigenvectors of a random
element of ``A`` and with sparse vectors on random coordinate subsets.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .dynamics import DynSystem
from .errors import InvalidAlgebra, InvalidParameter
from .generators import is_lower_triangular
from .linops import Operator, SpanBasis, StackedNullspace, matrix_unit

DEFAULT_TRIALS = 200
STABLE_FRACTION = 0.25
SPAN_TOL = 1e-9


def orbit_basis(A: SpanBasis, xi: np.ndarray, tol: float = SPAN_TOL) -> np.ndarray:
    """Orthonormal columns spanning ``A xi``."""
    M = np.stack([a @ xi for a in A], axis=1)
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > tol * max(float(s[0]) if s.size else 0.0, 1.0)))
    return u[:, :rank]


def ref_constraints(A: SpanBasis, xi, tol: float = SPAN_TOL) -> np.ndarray:
    """Rows ``C`` with ``C vec(T) = 0`` iff ``T xi`` lies in ``A xi``.

    ``vec`` is row-major, so ``T xi = (I ⊗ xi^T) vec(T)``; the rows are the
    components orthogonal to ``A xi``.
    """
    xi = np.asarray(xi, dtype=complex).ravel()
    n = A.shape[0]
    if xi.shape != (n,):
        raise InvalidParameter(f"vector must have length {n}")
    if not np.any(xi):
        raise InvalidParameter("vector must be non-zero")
    xi = xi / np.linalg.norm(xi)
    Q = orbit_basis(A, xi, tol)
    # complement of A xi
    full, _ = np.linalg.qr(np.hstack([Q, np.eye(n)]))
    comp = full[:, Q.shape[1]:n]
    return comp.conj().T @ np.kron(np.eye(n), xi[None, :])


def sample_vector(A: SpanBasis, rng: np.random.Generator) -> np.ndarray:
    """One draw from the mixture of Gaussian, eigenvector and sparse vectors."""
    n = A.shape[0]
    mode = rng.integers(3)
    if mode == 0:
        return rng.standard_normal(n) + 1j * rng.standard_normal(n)
    if mode == 1:
        _, vecs = np.linalg.eig(A.random_element(rng))
        k = rng.integers(1, n + 1)
        pick = rng.choice(n, size=k, replace=False)
        c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        return vecs[:, pick] @ c
    k = rng.integers(1, n + 1)
    pick = rng.choice(n, size=k, replace=False)
    xi = np.zeros(n, dtype=complex)
    xi[pick] = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return xi


def _trial_constraints(A: SpanBasis, seed_seq, tol: float) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    xi = sample_vector(A, rng)
    while not np.any(np.abs(xi) > 1e-12):
        xi = sample_vector(A, rng)
    return ref_constraints(A, xi, tol)


@dataclass
class RefCover:
    basis: SpanBasis
    dims: List[int] = field(repr=False)
    stabilized: bool = False

    @property
    def dim(self) -> int:
        return self.basis.dim


def sampled_ref(A: SpanBasis, trials: int = DEFAULT_TRIALS, seed: int = 0,
                tol: float = 1e-9, workers: int = 1) -> RefCover:
    """Intersect sampled constraints; ``dims[t]`` is the cover dimension after ``t+1`` trials.

    Trial ``t`` draws from the ``t``-th child of ``SeedSequence(seed)``, so the
    result does not depend on ``workers``.  ``stabilized`` means the
    dimension did not change over the final quarter of the trials.
    """
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    n = A.shape[0]
    children = np.random.SeedSequence(seed).spawn(trials)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            blocks = list(pool.map(lambda s: _trial_constraints(A, s, SPAN_TOL), children))
    else:
        blocks = [_trial_constraints(A, s, SPAN_TOL) for s in children]
    stack = StackedNullspace(n * n)
    dims = []
    for C in blocks:
        stack.add(C)
        dims.append(stack.nullity(tol))
    basis = SpanBasis.from_columns(stack.solve(tol), (n, n))
    tail = dims[len(dims) - max(1, int(np.ceil(STABLE_FRACTION * trials))):]
    return RefCover(basis, dims, len(set(tail)) == 1)


def constraint_residual(A: SpanBasis, T, count: int = 1000, seed: int = 1) -> float:
    """Worst ``||(I - P_{A xi}) T xi|| / ||xi||`` over fresh sampled vectors."""
    T = np.asarray(T, dtype=complex)
    worst = 0.0
    for s in np.random.SeedSequence(seed).spawn(count):
        rng = np.random.default_rng(s)
        xi = sample_vector(A, rng)
        nx = np.linalg.norm(xi)
        if nx == 0:
            continue
        xi = xi / nx
        Q = orbit_basis(A, xi)
        t = T @ xi
        worst = max(worst, float(np.linalg.norm(t - Q @ (Q.conj().T @ t))))
    return worst


@dataclass
class Certificate:
    verdict: str
    cover: RefCover
    algebra_dim: int
    witnesses: List[tuple] = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified-reflexive"

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "cover_dim": self.cover.dim,
            "algebra_dim": self.algebra_dim,
            "stabilized": self.cover.stabilized,
            "witnesses": [list(w) for w in self.witnesses],
        }


def certify(A: SpanBasis, trials: int = DEFAULT_TRIALS, seed: int = 0,
            tol: float = 1e-9, workers: int = 1) -> Certificate:
    """``certified-reflexive`` when the stabilized cover equals ``span(A)``.

    Otherwise ``inconclusive``, with the matrix units that lie in the cover
    but not in ``A`` listed as witnesses ``(i, j)`` (0-based).  The
    certificate never asserts non-reflexivity.
    """
    n = A.shape[0]
    if A.residual(np.eye(n)) > tol:
        raise InvalidAlgebra("algebra must contain the identity")
    cover = sampled_ref(A, trials, seed, tol, workers)
    if cover.stabilized and cover.dim == A.dim:
        return Certificate("certified-reflexive", cover, A.dim)
    witnesses = []
    for i, j in np.ndindex(n, n):
        e = matrix_unit(n, i, j)
        if cover.basis.residual(e) <= tol and A.residual(e) > tol:
            witnesses.append((int(i), int(j)))
    return Certificate("inconclusive", cover, A.dim, witnesses)


@dataclass
class NecessaryReport:
    triangular: bool
    triangular_witness: Optional[tuple]
    block_residual: float
    block_witness: Optional[tuple]
    tol: float

    @property
    def passed(self) -> bool:
        return self.triangular and self.block_residual <= self.tol

    def as_dict(self) -> dict:
        return {
            "triangular": self.triangular,
            "triangular_witness": None if self.triangular_witness is None
            else [list(x) for x in self.triangular_witness],
            "block_residual": self.block_residual,
            "block_witness": None if self.block_witness is None
            else [list(x) for x in self.block_witness],
            "passed": self.passed,
        }


def ref_necessary_semicrossed(sys: DynSystem, T: Operator, tol: float = 1e-9,
                              cover: Optional[RefCover] = None, trials: int = DEFAULT_TRIALS,
                              seed: int = 0) -> NecessaryReport:
    """Necessary conditions for ``T`` in the reflexive cover of the left product.

    ``T`` must be left lower triangular and every block ``T_{mu w, w}`` must
    lie in the sampled cover of ``A``.
    """
    tri = is_lower_triangular(T, "abelian" if sys.kind != "free" else "left", tol)
    if cover is None:
        cover = sampled_ref(sys.algebra, trials, seed, tol)
    fock = sys.fock
    worst, where = 0.0, None
    for mu in fock.basis:
        for w in fock.basis:
            target = fock.shift_target(mu, w, "left")
            if target is None:
                continue
            B = T.block(target, w)
            r = float(np.linalg.norm(B - cover.basis.project(B)))
            if r > worst:
                worst, where = r, (target, w)
    return NecessaryReport(tri.ok, tri.worst_block, worst, where, tol)
