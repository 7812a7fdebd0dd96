import numpy as np
import pytest

from semicrossed_lab.dynamics import DynSystem, RowOperator, clock_shift, odometer

ACCEPTANCE_LINES = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES[number] = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


# ---------------------------------------------------------------------------
# exact rank oracle


PRIMES = (2_147_483_629, 2_147_483_587)


def rank_mod_p(M, p: int) -> int:
    """Rank of an integer matrix over GF(p) by row reduction."""
    A = np.array(M, dtype=np.int64) % p
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r] = (A[r] * inv) % p
        below = np.nonzero(A[:, c])[0]
        below = below[below != r]
        if below.size:
            # split the multiply so intermediate products stay below 2^63
            f = A[below, c][:, None]
            A[below] = (A[below] - (f * A[r][None, :]) % p) % p
        r += 1
    return r


def exact_rank(M) -> int:
    """Rank over Q of an integer matrix (max over two large primes)."""
    return max(rank_mod_p(M, p) for p in PRIMES)


def commutant_dim_oracle(ops) -> int:
    """``n^2 - rank`` of the stacked integer commutator constraints."""
    ops = [np.asarray(T) for T in ops]
    n = ops[0].shape[0]
    blocks = []
    for T in ops:
        Ti = np.rint(T.real).astype(np.int64)
        assert np.allclose(T, Ti), "oracle needs integer matrices"
        blocks.append(np.kron(np.eye(n, dtype=np.int64), Ti.T) - np.kron(Ti, np.eye(n, dtype=np.int64)))
    return n * n - exact_rank(np.vstack(blocks))


# ---------------------------------------------------------------------------
# systems


def trivial_system(h=2, d=1, L=2, kind="free", algebra="full"):
    rows = [RowOperator.from_unitaries(np.eye(h)) for _ in range(d)]
    return DynSystem(kind, rows, algebra, L)


def odometer_system(D=4, L=3, algebra="full"):
    return DynSystem("free", [odometer(D)], algebra, L)


def clock_shift_system(D=3, L=2, kind="abelian", algebra="full"):
    U, V = clock_shift(D)
    return DynSystem(kind, [RowOperator.from_unitaries(U), RowOperator.from_unitaries(V)], algebra, L)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
