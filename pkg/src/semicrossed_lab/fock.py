"""Truncated Fock bases for the free semigroup and for Z_+^d.

Words are tuples of letters in written order, so ``(2, 1)`` is the word
``21`` whose rightmost letter acts first.  Multi-indices are tuples of
non-negative integers of length ``d``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Dict, Tuple

import numpy as np

from .errors import InvalidParameter, LabelError

Word = Tuple[int, ...]
MultiIndex = Tuple[int, ...]
Label = Tuple[int, ...]

FREE = "free"
ABELIAN = "abelian"


def concat(mu: Word, w: Word) -> Word:
    return tuple(mu) + tuple(w)


def reverse(mu: Word) -> Word:
    return tuple(reversed(mu))


def leq_left(nu: Word, mu: Word) -> bool:
    """True iff ``mu = z nu`` for some word ``z`` (``nu`` is a suffix)."""
    k = len(nu)
    return k <= len(mu) and tuple(mu[len(mu) - k:]) == tuple(nu)


def leq_right(nu: Word, mu: Word) -> bool:
    """True iff ``mu = nu z`` for some word ``z`` (``nu`` is a prefix)."""
    k = len(nu)
    return k <= len(mu) and tuple(mu[:k]) == tuple(nu)


def leq_multi(n: MultiIndex, m: MultiIndex) -> bool:
    return len(n) == len(m) and all(a <= b for a, b in zip(n, m))


def word_str(w: Word) -> str:
    if not w:
        return "∅"
    sep = "" if max(w) < 10 else "."
    return sep.join(str(c) for c in w)


def label_str(label: Label, kind: str = FREE) -> str:
    if kind == FREE:
        return word_str(label)
    return "(" + ",".join(str(c) for c in label) + ")"


def _free_key(w: Word):
    # degree-major, then lexicographic starting from the rightmost letter
    return (len(w), tuple(reversed(w)))


def _abelian_key(m: MultiIndex):
    return (sum(m), tuple(-c for c in m))


@dataclass(frozen=True, eq=False)
class TruncatedFock:
    """Ordered basis of all labels of degree at most ``L``.

    With ``box=True`` (abelian only) the truncation keeps every coordinate
    at most ``L`` instead of the total degree; this is the rectangular
    truncation that factors as a tensor product.
    """

    kind: str
    d: int
    L: int
    box: bool = False
    basis: Tuple[Label, ...] = field(init=False, repr=False)
    index: Dict[Label, int] = field(init=False, repr=False)
    degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in (FREE, ABELIAN):
            raise InvalidParameter(f"unknown Fock kind {self.kind!r}")
        if int(self.d) != self.d or self.d < 1:
            raise InvalidParameter(f"d must be a positive integer, got {self.d}")
        if int(self.L) != self.L or self.L < 0:
            raise InvalidParameter(f"L must be a non-negative integer, got {self.L}")
        if self.box and self.kind != ABELIAN:
            raise InvalidParameter("box truncation only exists for the abelian kind")
        if self.kind == FREE:
            labels = [w for k in range(self.L + 1)
                      for w in itertools.product(range(1, self.d + 1), repeat=k)]
            labels.sort(key=_free_key)
        elif self.box:
            labels = list(itertools.product(range(self.L + 1), repeat=self.d))
            labels.sort(key=_abelian_key)
        else:
            labels = [m for m in itertools.product(range(self.L + 1), repeat=self.d)
                      if sum(m) <= self.L]
            labels.sort(key=_abelian_key)
        basis = tuple(tuple(x) for x in labels)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "index", {lab: i for i, lab in enumerate(basis)})
        degs = np.array([self.degree(lab) for lab in basis], dtype=int)
        degs.setflags(write=False)
        object.__setattr__(self, "degrees", degs)

    def __len__(self):
        return len(self.basis)

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def max_degree(self) -> int:
        return self.d * self.L if self.box else self.L

    def __contains__(self, label) -> bool:
        return tuple(label) in self.index

    def __eq__(self, other):
        if not isinstance(other, TruncatedFock):
            return NotImplemented
        return (self.kind, self.d, self.L, self.box) == (other.kind, other.d, other.L, other.box)

    def __hash__(self):
        return hash((self.kind, self.d, self.L, self.box))

    def degree(self, label: Label) -> int:
        return len(label) if self.kind == FREE else int(sum(label))

    def position(self, label: Label) -> int:
        try:
            return self.index[tuple(label)]
        except KeyError:
            raise LabelError(f"label {label_str(tuple(label), self.kind)} is outside "
                             f"the truncation (kind={self.kind}, d={self.d}, L={self.L})") from None

    def level(self, k: int) -> np.ndarray:
        """Positions of the labels of degree ``k``."""
        return np.flatnonzero(self.degrees == k)

    def check_letter_range(self, label: Label) -> None:
        if self.kind == FREE:
            if any(not 1 <= c <= self.d for c in label):
                raise InvalidParameter(f"letters must lie in 1..{self.d}: {label}")
        elif len(label) != self.d or any(c < 0 for c in label):
            raise InvalidParameter(f"multi-index must have {self.d} non-negative entries: {label}")

    def shift_target(self, mu: Label, w: Label, side: str = "left"):
        """Label reached from ``w`` by creating ``mu``, or None if truncated."""
        if self.kind == FREE:
            new = concat(mu, w) if side == "left" else concat(w, reverse(mu))
        else:
            new = tuple(a + b for a, b in zip(mu, w))
        return new if new in self.index else None


def enumerate_basis(kind: str, d: int, L: int, box: bool = False) -> TruncatedFock:
    return TruncatedFock(kind, d, L, box)


def expected_size(kind: str, d: int, L: int) -> int:
    if kind == FREE:
        return L + 1 if d == 1 else (d ** (L + 1) - 1) // (d - 1)
    return comb(L + d, d)
