"""Acceptance criteria, one test per criterion.

Each check returns ``(ok, detail)``; the outcome is recorded for the
terminal summary.  Running this file directly prints the same lines.
"""
import time

import numpy as np
import pytest

from semicrossed_lab import commutant, dynamics, generators, reflexivity, semicrossed, similarity
from semicrossed_lab.dynamics import DynSystem, RowOperator
from semicrossed_lab.fock import TruncatedFock
from semicrossed_lab.linops import SpanBasis, compare_spans, matrix_unit

from conftest import (clock_shift_system, commutant_dim_oracle, odometer_system,
                      record_acceptance, trivial_system)


def gallery_systems():
    """Every gallery system with d <= 2, h <= 8, L <= 4."""
    out = []
    for D in (4, 8):
        for L in (1, 4):
            out.append((f"odometer({D}),L={L}", DynSystem("free", [dynamics.odometer(D)], "full", L)))
    out.append(("bilateral_odometer(8)", DynSystem("free", [dynamics.bilateral_odometer(8)], "full", 3)))
    for lam, mu in [(1, 1), (1j, -1), (np.exp(0.4j), np.exp(1.1j))]:
        bw = dynamics.gallery("binary_weight_unitary", D=8, lam=lam, mu=mu)
        out.append((f"binary_weight(8,{lam:.2g},{mu:.2g})", DynSystem("free", [bw], "full", 4)))
    forms = dynamics.gallery("bilateral_swap", D=8, lam=1j, mu=-1)
    for name, row in forms.items():
        out.append((f"bilateral_{name}(8)", DynSystem("free", [row], "full", 4)))
    for D in (2, 3, 5):
        out.append((f"clock_shift({D}) abelian", clock_shift_system(D, 4)))
        out.append((f"clock_shift({D}) free", clock_shift_system(D, 3, kind="free")))
    bw = dynamics.gallery("binary_weight_unitary", D=8, lam=1, mu=1j)
    out.append(("odometer+binary_weight", DynSystem("free", [dynamics.odometer(8), bw], "diag", 3)))
    return out


def criterion_1():
    t0 = time.perf_counter()
    worst, where = 0.0, None
    for name, sys in gallery_systems():
        rep = dynamics.check_covariance(sys, 1e-10)
        if rep.max_residual >= worst:
            worst, where = rep.max_residual, name
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10
    return ok, f"covariance max residual {worst:.2e} ({where}), {elapsed:.1f}s"


def criterion_2():
    rng = np.random.default_rng(2)
    quad, resolution = 0.0, 0.0
    for d, L in [(1, 4), (2, 3)]:
        fock = TruncatedFock("free", d, L)
        for _ in range(100):
            T = generators.random_operator(fock, 2, rng)
            total = None
            for m in range(-L, L + 1):
                G = generators.fourier_graded(T, m)
                quad = max(quad, (generators.fourier_quadrature(T, m, 2 * L + 1) - G).norm())
                total = G if total is None else total + G
            resolution = max(resolution, (total - T).norm())
    ok = quad <= 1e-9 and resolution <= 1e-12
    return ok, f"quadrature {quad:.2e}, resolution {resolution:.2e}"


def criterion_3():
    rng = np.random.default_rng(3)
    increase, excess = -np.inf, -np.inf
    for t in range(50):
        kind, d, L = [("free", 1, 4), ("free", 2, 3), ("abelian", 2, 3)][t % 3]
        fock = TruncatedFock(kind, d, L)
        T = generators.random_operator(fock, 2, rng)
        errs = [(generators.cesaro(T, n) - T).norm() for n in range(65)]
        bounds = [generators.cesaro_error_bound(T, n) for n in range(65)]
        increase = max(increase, float(np.max(np.diff(errs))))
        excess = max(excess, float(np.max(np.subtract(errs, bounds))))
    ok = increase <= 1e-12 and excess <= 1e-12
    return ok, f"max step increase {increase:.2e}, max bound excess {excess:.2e}"


def membership_systems():
    perm = np.eye(3)[[1, 2, 0]]
    return [
        ("odometer", odometer_system(4, 3, "full")),
        ("odometer/diag", odometer_system(8, 2, "diag")),
        ("binary_weight", DynSystem("free", [dynamics.gallery(
            "binary_weight_unitary", D=4, lam=1j, mu=-1)], "diag", 3)),
        ("permutation d=2", DynSystem("free", [RowOperator.from_unitaries(perm),
                                               RowOperator.from_unitaries(perm.T)], "diag", 2)),
        ("invertible n=1", DynSystem("free", [RowOperator.from_invertible(np.diag([1.0, 2.0]))],
                                     "diag", 3)),
        ("clock_shift abelian", clock_shift_system(3, 2)),
        ("trivial abelian I+E21", trivial_system(2, 2, 2, "abelian", "I+E21")),
    ]


def criterion_4():
    rng = np.random.default_rng(4)
    wrong = []
    accepted = rejected = 0
    for name, sys in membership_systems():
        sides = ["left"] if sys.kind == "abelian" else ["left", "right"]
        for side in sides:
            for _ in range(50):
                T, _ = semicrossed.random_span_element(sys, rng, side)
                if semicrossed.membership(sys, T, side, 1e-9).member:
                    accepted += 1
                else:
                    wrong.append((name, side, "span element"))
            for cname, B in semicrossed.corrupted_battery(sys, rng, side):
                if semicrossed.membership(sys, B, side, 1e-9).member:
                    wrong.append((name, side, cname))
                else:
                    rejected += 1
    return not wrong, (f"{accepted} accepted, {rejected} corrupted rejected, "
                       f"{len(wrong)} misclassified {wrong[:3]}")


def criterion_5():
    bw = dynamics.gallery("binary_weight_unitary", D=8, lam=1, mu=1j)
    identity_systems = [
        ("odometer h=4 L=3", odometer_system(4, 3)),
        ("odometer+binary_weight", DynSystem("free", [dynamics.odometer(8), bw], "diag", 2)),
        ("binary_weight n=1", DynSystem("free", [bw], "diag", 3)),
        ("clock_shift abelian", clock_shift_system(3, 3)),
    ]
    worst = 0.0
    for _, sys in identity_systems:
        rep = commutant.verify_thm_4_1(sys, 1e-9, span_check=False)
        worst = max(worst, rep.max_identity_residual)
    exact = [
        ("trivial d=1 M2", trivial_system(2, 1, 2)),
        ("trivial d=2 M2", trivial_system(2, 2, 2)),
        ("binary_weight(4) diag", DynSystem("free", [dynamics.gallery(
            "binary_weight_unitary", D=4, lam=1, mu=-1)], "diag", 3)),
        ("clock_shift free", clock_shift_system(2, 2, kind="free")),
        ("clock_shift abelian", clock_shift_system(3, 2)),
        ("unary d=1 h=2 L=19", trivial_system(2, 1, 19, algebra="diag")),
    ]
    relations = []
    for name, sys in exact:
        assert commutant.is_exact_instance(sys)
        cmp = commutant.compare_graded_spans(sys, 1, 1e-8)
        relations.append((name, cmp["relation"]))
    ok = worst <= 1e-9 and all(r == "equal" for _, r in relations)
    return ok, f"identity residual {worst:.2e}; exact spans {sorted(set(r for _, r in relations))}"


def algebras_for_bicommutant():
    out = []
    for n in (2, 3, 4):
        out.append((f"diag({n})", dynamics.named_algebra("diag", n), True))
        out.append((f"M{n}", dynamics.named_algebra("full", n), True))
    out.append(("I+E21", dynamics.named_algebra("I+E21", 2), True))
    out.append(("CI in M2", dynamics.named_algebra("scalar", 2), False))
    out.append(("CI in M3", dynamics.named_algebra("scalar", 3), False))
    return out


def oracle_instances():
    """Integer operator families with hD <= 30."""
    out = []
    for name, A, _ in algebras_for_bicommutant():
        out.append((name, _integer_basis(A)))
    for L in (2, 5):
        fock = TruncatedFock("free", 1, L)
        out.append((f"J_{L + 1}", [generators.creation_left(fock, (1,)).data.real]))
    for h, d, L in [(2, 2, 2), (2, 1, 4), (3, 2, 1)]:
        sys = trivial_system(h, d, L)
        ops = [op.data.real for op, _ in commutant.algebra_ops(sys)]
        out.append((f"trivial h={h} d={d} L={L}", ops))
    sys = trivial_system(3, 2, 2, "abelian", "diag")
    out.append(("abelian diag h=3 L=2", [op.data.real for op, _ in commutant.algebra_ops(sys)]))
    return out


def _integer_basis(A: SpanBasis):
    n = A.shape[0]
    # named algebras are spanned by matrix units and the identity
    cands = [np.eye(n)] + [matrix_unit(n, i, j).real for i in range(n) for j in range(n)]
    picked = []
    for c in cands:
        if A.residual(c) < 1e-12:
            trial = SpanBasis.from_matrices(picked + [c]) if picked else SpanBasis.from_matrices([c])
            if trial.dim > len(picked):
                picked.append(c)
    return picked


def criterion_6():
    wrong = []
    for name, A, expect in algebras_for_bicommutant():
        App = commutant.bicommutant(A)
        # oracle: exact dimension of A'' from integer data
        Ap_basis = _integer_basis(commutant.matrix_commutant(A)) or [np.eye(A.shape[0])]
        dim_App = commutant_dim_oracle(Ap_basis)
        got = compare_spans(A, App).relation == "equal"
        if got != expect or (dim_App == A.dim) != expect or App.dim != dim_App:
            wrong.append(f"{name}: dim A={A.dim}, A''={App.dim}, oracle A''={dim_App}")
    mismatched = []
    for name, ops in oracle_instances():
        n = ops[0].shape[0]
        assert n <= 30
        if commutant.matrix_commutant(ops).dim != commutant_dim_oracle(ops):
            mismatched.append(name)
    ok = not wrong and not mismatched
    return ok, f"bicommutant mismatches {wrong}, dimension mismatches {mismatched}"


def criterion_7():
    invertible = [
        ("diag(1,2)", [RowOperator.from_invertible(np.diag([1.0, 2.0]))]),
        ("jordan", [RowOperator.from_invertible(np.array([[1.0, 1.0], [0.0, 1.0]]))]),
        ("d=2 invertible", [RowOperator.from_invertible(np.array([[2.0, 1.0], [1.0, 1.0]])),
                            RowOperator.from_invertible(np.diag([1.0, 0.5]))]),
        ("unitary", [RowOperator.from_unitaries(dynamics.clock_shift(3)[1])]),
    ]
    worst_exact, worst_window, bound_ok, slow = 0.0, 0.0, True, 0.0
    for name, rows in invertible:
        sys = DynSystem("free", rows, "full", 3)
        t0 = time.perf_counter()
        rep = similarity.verify_similarity(sys)
        slow = max(slow, time.perf_counter() - t0)
        worst_exact = max(worst_exact, rep.max_residual)
        bound_ok &= rep.bound_ok
    for D, L in [(4, 3), (8, 3), (16, 2)]:
        sys = odometer_system(D, L)
        t0 = time.perf_counter()
        rep = similarity.verify_similarity(sys)
        slow = max(slow, time.perf_counter() - t0)
        worst_window = max(worst_window, rep.max_residual)
        bound_ok &= rep.bound_ok
    ok = worst_exact <= 1e-12 and worst_window <= 1e-9 and bound_ok and slow < 5
    return ok, (f"n=1 residual {worst_exact:.2e}, odometer residual {worst_window:.2e}, "
                f"norm bound {'ok' if bound_ok else 'violated'}, slowest {slow:.2f}s")


def criterion_8():
    D = 16
    od = dynamics.odometer(D)
    window = od.window_indices
    worst = 0.0
    for lam, mu in [(1, 1), (1j, -1), (np.exp(0.3j), np.exp(2.1j))]:
        U = dynamics.binary_weight_unitary(D, lam, mu)
        res = dynamics.check_commuting(dynamics.ad(U), od, window, 1e-12)
        worst = max(worst, res.residual)
    U = dynamics.binary_weight_unitary(D, 1, 1j)
    U_bad = U.copy()
    U_bad[5, 5] *= np.exp(0.5j)
    perturbed = dynamics.check_commuting(dynamics.ad(U_bad), od, window).residual
    mu = np.exp(2.1j)
    U = dynamics.binary_weight_unitary(D, np.exp(0.3j), mu)
    laca = dynamics.laca_intertwiner(od, [U], window)
    W = laca.W
    a, b, c, d = W[0, 0], W[1, 0], W[0, 1], W[1, 1]
    laca_ok = (max(laca.equation_residual, laca.unitarity_residual) <= 1e-10
               and abs(b) <= 1e-10 and abs(c) <= 1e-10
               and abs(abs(a) - 1) <= 1e-10 and abs(abs(d) - 1) <= 1e-10
               and abs(a - 1) <= 1e-10 and abs(d - mu) <= 1e-10)
    ok = worst <= 1e-12 and perturbed >= 1e-2 and laca_ok
    return ok, (f"commuting residual {worst:.2e}, perturbed {perturbed:.2e}, "
                f"W diag ({a:.3f}, {d:.3f}) off-diag max {max(abs(b), abs(c)):.1e}")


def criterion_9():
    worst_weyl, worst_comm = 0.0, 0.0
    for D in (2, 3, 5):
        U, V = dynamics.clock_shift(D)
        lam = np.exp(2j * np.pi / D)
        worst_weyl = max(worst_weyl, np.linalg.norm(U @ V - lam * V @ U, 2))
        res = dynamics.check_commuting(dynamics.ad(U), dynamics.ad(V), None, 1e-12)
        worst_comm = max(worst_comm, res.residual)
    ok = worst_weyl <= 1e-12 and worst_comm <= 1e-12
    return ok, f"Weyl residual {worst_weyl:.2e}, automorphism commutation {worst_comm:.2e}"


def criterion_10():
    lam = (0.5, 0.3)
    res = [generators.eigen_residual(TruncatedFock("free", 2, L), lam) for L in range(3, 8)]
    ratios = [res[k + 1] / res[k] for k in range(len(res) - 1)]
    bound = float(np.linalg.norm(lam)) + 0.05
    ok = max(ratios) <= bound
    return ok, f"ratios {[round(r, 4) for r in ratios]} <= {bound:.4f}"


def criterion_11():
    seeds = range(10)
    problems = []
    for seed in seeds:
        for n in range(2, 7):
            if not reflexivity.certify(dynamics.named_algebra("diag", n), seed=seed).certified:
                problems.append(f"diag({n}) seed {seed}")
        for n in range(2, 5):
            if not reflexivity.certify(dynamics.named_algebra("full", n), seed=seed).certified:
                problems.append(f"M{n} seed {seed}")
        cert = reflexivity.certify(dynamics.named_algebra("I+E21", 2), seed=seed)
        E22 = matrix_unit(2, 1, 1)
        if (cert.verdict != "inconclusive" or cert.cover.dim != 3 or not cert.cover.stabilized
                or cert.cover.basis.residual(E22) > 1e-10 or (1, 1) not in cert.witnesses):
            problems.append(f"I+E21 seed {seed}")
    fresh = reflexivity.constraint_residual(dynamics.named_algebra("I+E21", 2),
                                            matrix_unit(2, 1, 1), 1000, seed=99)
    ok = not problems and fresh <= 1e-10
    return ok, f"failures {problems[:3]}, E22 fresh-constraint residual {fresh:.1e}"


def criterion_12():
    worst = 0.0
    systems = [
        trivial_system(1, 2, 3, "abelian", "full"),
        trivial_system(2, 2, 3, "abelian", "full"),
        clock_shift_system(3, 3),
        clock_shift_system(2, 3),
    ]
    for sys in systems:
        rep = semicrossed.decompose_abelian(sys, 3, 1e-10)
        worst = max(worst, rep.max_residual)
    return worst <= 1e-10, f"max conjugation residual {worst:.2e} (box 4x4)"


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 13)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_acceptance(number):
    ok, detail = CRITERIA[number]()
    record_acceptance(number, ok, detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


if __name__ == "__main__":
    for number, check in CRITERIA.items():
        ok, detail = check()
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
