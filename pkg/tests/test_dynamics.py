import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semicrossed_lab import dynamics
from semicrossed_lab.dynamics import (DynSystem, RowOperator, ad, alpha, alpha_product_form,
                                      binary_weight, check_commutant_transport, check_commuting,
                                      check_covariance, clock_shift, intertwining_residual,
                                      laca_intertwiner, odometer, rep_pi, rep_pibar, rep_rho)
from semicrossed_lab.errors import InsufficientWindow, InvalidAlgebra, InvalidParameter, NotInAlgebra
from semicrossed_lab.linops import Operator, matrix_unit, opnorm

from conftest import clock_shift_system, odometer_system, trivial_system


def random_unitary(n, rng):
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_alpha_unit_and_unitality():
    x = np.array([[2.0, 1.0], [0.0, 1.0]])
    sys = DynSystem("free", [RowOperator.from_invertible(x)], "full", 2)
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    assert np.array_equal(alpha(sys, (), a), a)
    assert np.allclose(alpha(sys, (1,), a), x @ a @ np.linalg.inv(x))
    assert np.allclose(alpha(sys, (1, 1), np.eye(2)), np.eye(2))


def test_alpha_odometer_direct():
    sys = odometer_system(8, 2)
    S1, S2 = sys.rows[0].u
    E00 = matrix_unit(8, 0, 0)
    expect = S1 @ E00 @ S1.T + S2 @ E00 @ S2.T
    assert np.array_equal(alpha(sys, (1,), E00), expect)
    assert np.array_equal(expect, matrix_unit(8, 0, 0) + matrix_unit(8, 1, 1))


def test_alpha_word_order():
    rng = np.random.default_rng(3)
    x, y = random_unitary(2, rng), random_unitary(2, rng)
    sys = DynSystem("free", [RowOperator.from_unitaries(x), RowOperator.from_unitaries(y)], "full", 2)
    a = rng.standard_normal((2, 2))
    # rightmost letter acts first: alpha_21 = alpha_2 alpha_1
    assert np.allclose(alpha(sys, (2, 1), a), y @ x @ a @ x.conj().T @ y.conj().T)


def test_representations():
    sys = trivial_system(2, 2, 2)
    a = np.array([[1, 2j], [0, 3]])
    assert np.array_equal(rep_pi(sys, a).data, np.kron(np.eye(sys.fock.size), a))
    od = odometer_system(4, 3)
    assert np.allclose(rep_pi(od, np.eye(4)).data, np.eye(4 * od.fock.size))
    bw = DynSystem("free", [dynamics.gallery("binary_weight_unitary", D=4, lam=1j, mu=-1)], "full", 3)
    b = np.arange(16).reshape(4, 4)
    assert np.array_equal(rep_pi(bw, b).data, rep_pibar(bw, b).data)
    assert np.array_equal(rep_rho(od, b).data, Operator.ampliation(b, od.fock).data)


def test_pibar_reverses_words():
    rng = np.random.default_rng(8)
    x, y = random_unitary(2, rng), random_unitary(2, rng)
    sys = DynSystem("free", [RowOperator.from_unitaries(x), RowOperator.from_unitaries(y)], "full", 2)
    a = rng.standard_normal((2, 2))
    assert np.allclose(rep_pi(sys, a).block((2, 1), (2, 1)), alpha(sys, (2, 1), a))
    assert np.allclose(rep_pibar(sys, a).block((2, 1), (2, 1)), alpha(sys, (1, 2), a))


def test_not_in_algebra():
    sys = trivial_system(2, 1, 2, algebra="diag")
    with pytest.raises(NotInAlgebra):
        rep_pi(sys, matrix_unit(2, 0, 1))


def test_algebra_must_contain_identity():
    with pytest.raises(InvalidAlgebra):
        DynSystem("free", [RowOperator.from_unitaries(np.eye(2))], [matrix_unit(2, 0, 0)], 2)


def test_covariance_examples():
    assert check_covariance(trivial_system(3, 2, 3)).max_residual == 0
    rng = np.random.default_rng(4)
    sys = DynSystem("free", [RowOperator.from_unitaries(random_unitary(3, rng))], "full", 3)
    assert check_covariance(sys, 1e-12).passed
    od = odometer(8)
    bad = od.with_inverse([2 * v for v in od.v])
    rep = check_covariance(DynSystem("free", [bad], "full", 3))
    assert not rep.passed and rep.max_residual >= 0.5


def test_gallery_examples():
    assert [binary_weight(n) for n in (0, 3, 5, 7)] == [0, 2, 2, 3]
    od = odometer(8)
    assert od.window == (0, 1, 2, 3)
    S1 = od.u[0]
    assert np.array_equal((S1.T @ S1)[:, :4], np.eye(8)[:, :4])
    U, V = clock_shift(3)
    assert opnorm(U @ V - np.exp(2j * np.pi / 3) * V @ U) < 1e-15
    clock, shift = dynamics.gallery("clock_shift", D=3)
    assert np.array_equal(clock.u[0], U) and np.array_equal(shift.u[0], V)
    with pytest.raises(InvalidParameter):
        dynamics.gallery("unknown", D=2)
    with pytest.raises(InvalidParameter):
        dynamics.binary_weight_unitary(4, 2.0, 1.0)


def test_bilateral_forms_commute_with_bilateral_odometer():
    D = 8
    od = dynamics.bilateral_odometer(D)
    forms = dynamics.bilateral_swap(D, 1j, -1)
    for key in ("diagonal", "swap"):
        U = forms[key]
        assert np.allclose(U @ U.conj().T, np.eye(D))
        res = check_commuting(ad(U), od, DynSystem("free", [od, ad(U)], "full", 1).window(2))
        assert res.residual <= 1e-12, key


def test_windows_shrink():
    sys = odometer_system(4, 2)
    assert sys.window(1).tolist() == [0, 1]
    assert sys.window(2).tolist() == [0]
    assert odometer_system(16, 2).window(2).tolist() == [0, 1, 2, 3]


def test_intertwining_identities_on_gallery():
    for sys in [odometer_system(8, 2), clock_shift_system(3, 2),
                DynSystem("free", [dynamics.bilateral_odometer(8)], "full", 2)]:
        assert intertwining_residual(sys) <= 1e-12


word = st.lists(st.integers(1, 2), max_size=3).map(tuple)


@settings(max_examples=40, deadline=None)
@given(word, st.integers(0, 2 ** 32 - 1))
def test_product_form_matches_iteration(mu, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    rows = [odometer(3), RowOperator.from_invertible(x)]
    sys = DynSystem("free", rows, "full", 3)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    direct = alpha(sys, mu, a)
    assert np.abs(alpha_product_form(sys, mu, a) - direct).max() <= 1e-10 * max(1, np.abs(direct).max())


def test_uniform_bound():
    assert odometer_system(8, 3).K == pytest.approx(1.0)
    assert clock_shift_system(3, 3).K == pytest.approx(1.0)
    sys = DynSystem("free", [RowOperator.from_invertible(np.diag([1.0, 2.0]))], "full", 3)
    assert sys.K == pytest.approx(8.0)
    for label in sys.fock.basis:
        assert opnorm(dynamics.hat_u(sys, label)) <= sys.K + 1e-12
        assert opnorm(dynamics.hat_v(sys, label)) <= sys.K + 1e-12


def test_abelian_requires_commuting_generators():
    rng = np.random.default_rng(5)
    rows = [RowOperator.from_unitaries(random_unitary(3, rng)) for _ in range(2)]
    with pytest.raises(InvalidParameter):
        DynSystem("abelian", rows, "full", 2)
    sys = clock_shift_system(5, 2)
    assert sys.generator_commutation_residual() <= 1e-12


def test_check_commuting_examples():
    od = odometer(16)
    U = dynamics.binary_weight_unitary(16, np.exp(0.2j), 1j)
    assert check_commuting(ad(U), od, od.window).residual <= 1e-12
    U_bad = U.copy()
    U_bad[3, 3] *= -1
    res = check_commuting(ad(U_bad), od, od.window)
    assert not res.ok and res.residual >= 1e-2
    assert check_commuting(od, od).residual == 0


def test_laca_odometer_pair():
    od = odometer(16)
    res = laca_intertwiner(od, od, od.window)
    assert res.passed(1e-10)
    # t_j s_i = s_i t_j after relabelling (i, j) -> (j, i): a flip permutation
    flip = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            flip[j * 2 + i, i * 2 + j] = 1
    assert np.allclose(res.W, flip)


def test_laca_binary_weight():
    od = odometer(16)
    mu = np.exp(1.3j)
    U = dynamics.binary_weight_unitary(16, 1j, mu)
    res = laca_intertwiner(od, [U], od.window)
    assert res.passed(1e-10)
    assert np.allclose(res.W, np.diag([1, mu]), atol=1e-10)
    U_bad = U.copy()
    U_bad[5, 5] *= np.exp(0.7j)
    assert laca_intertwiner(od, [U_bad], od.window).equation_residual >= 1e-2


def test_laca_insufficient_window():
    od = odometer(2)
    with pytest.raises(InsufficientWindow):
        laca_intertwiner(od, od, [0])


def test_commutant_transport():
    sys = odometer_system(8, 2)
    assert check_commutant_transport(sys, np.eye(8)).ok
    perm = np.eye(4)[[2, 0, 3, 1]]
    masa = DynSystem("free", [RowOperator.from_unitaries(perm)], "diag", 2)
    y = np.diag([1.0, 2j, -3.0, 0.5])
    res = check_commutant_transport(masa, y)
    assert res.ok and res.transport_residual == 0
    assert not check_commutant_transport(masa, matrix_unit(4, 0, 1)).ok
