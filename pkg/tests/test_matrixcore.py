import numpy as np
import pytest

from gtoda import matrixcore as mc
from gtoda.errors import FactorizationBlowUp


def test_minor_identity():
    assert mc.minor(np.eye(3), 2, 1) == pytest.approx(0.0)
    assert mc.minor(np.eye(3), 2, 0) == 1.0


def test_minor_known_values():
    b = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert mc.minor(b, 1, 1) == pytest.approx(1.0)
    assert mc.minor(b, 2, 1) == pytest.approx(2.0)
    assert mc.minor(b, 2, 2) == pytest.approx(1.0)


def test_minor_out_of_range():
    with pytest.raises(IndexError):
        mc.minor(np.eye(2), 3, 1)
    with pytest.raises(IndexError):
        mc.minor(np.eye(2), 2, 3)


def test_gauss_ldu_roundtrip():
    rng = np.random.default_rng(5)
    for n in (2, 3, 5):
        A = rng.standard_normal((n, n)) + 4.0 * np.eye(n)
        L, d, U = mc.gauss_ldu(A)
        assert np.allclose(L @ np.diag(d) @ U, A, atol=1e-10)
        assert np.allclose(np.diag(L), 1.0)
        assert np.allclose(np.diag(U), 1.0)
        assert np.allclose(np.triu(L, 1), 0.0)
        assert np.allclose(np.tril(U, -1), 0.0)


def test_gauss_ldu_blowup():
    # leading 1x1 minor vanishes
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(FactorizationBlowUp) as exc:
        mc.gauss_ldu(A)
    assert exc.value.pivot_index == 1  # 1-based pivot position


def test_matrix_exp_vs_series():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.allclose(mc.matrix_exp(A, 2.0), [[1.0, 2.0], [0.0, 1.0]])


def test_epsilon_matrix_shape():
    e = mc.epsilon_matrix([1.0, 2.0, 3.0])
    assert np.allclose(e, [[1, 1, 0], [0, 2, 1], [0, 0, 3]])


def test_wbar0_unitary_and_pattern():
    for n in (2, 3, 4, 5):
        w = mc.wbar0(n)
        assert np.allclose(w @ w.T, np.eye(n))
        # antidiagonal support with unit entries up to sign
        assert np.allclose(np.abs(w), np.fliplr(np.eye(n)))


def test_wbar0_n2():
    assert np.allclose(mc.wbar0(2), [[0.0, -1.0], [1.0, 0.0]])


def test_eigenvalues_sorted_real():
    ev = mc.eigenvalues(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(np.sort(ev.real), [1.0, 2.0, 3.0])


def test_json_roundtrip():
    b = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert np.allclose(mc.matrix_from_json(mc.matrix_to_json(b)), b)


def test_is_positive_upper():
    assert mc.is_positive_upper(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert not mc.is_positive_upper(np.array([[1.0, -1.0], [0.0, 1.0]]))
