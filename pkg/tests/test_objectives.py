import numpy as np
import pytest

from projgrad import LogSumExp, PNorm, Quadratic, check_gradient
from projgrad.core import dot, norm


def test_pnorm_values():
    f = PNorm(p=2.0, shift=np.zeros(2))
    assert f.value(np.array([3.0, 4.0])) == pytest.approx(12.5)
    assert PNorm(p=4.0, shift=np.zeros(2)).value(np.zeros(2)) == 0.0
    q = Quadratic(Q=np.eye(2), b=np.zeros(2))
    assert q.value(np.array([1.0, 1.0])) == pytest.approx(1.0)


def test_gradients():
    f2 = PNorm(p=2.0, shift=np.zeros(2))
    assert np.allclose(f2.gradient(np.array([3.0, 4.0])), [3.0, 4.0])
    f4 = PNorm(p=4.0, shift=np.zeros(2))
    assert np.allclose(f4.gradient(np.array([1.0, 0.0])), [1.0, 0.0])
    q = Quadratic(Q=np.diag([2.0, 2.0]), b=np.array([-2.0, 0.0]))
    assert np.allclose(q.gradient(np.array([1.0, 0.0])), [0.0, 0.0])


def test_pnorm_gradient_at_shift_is_zero():
    for p in (1.5, 2.0, 3.0, 4.0):
        f = PNorm(p=p, shift=np.array([1.0, -2.0]))
        assert np.array_equal(f.gradient(np.array([1.0, -2.0])), [0.0, 0.0])


def test_check_gradient_examples():
    assert check_gradient(Quadratic(Q=np.eye(2), b=np.zeros(2)), np.array([1.0, 2.0]), 1e-5) <= 1e-9
    assert check_gradient(PNorm(p=4.0, shift=np.zeros(2)), np.array([1.0, 1.0]), 1e-5) <= 1e-7
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.uniform(-2, 2, 3)
        assert check_gradient(PNorm(p=2.0, shift=np.zeros(3)), x, 1e-5) <= 1e-9


def test_logsumexp_value_and_gradient():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((4, 3))
    t = rng.standard_normal(4)
    f = LogSumExp(rows=A, offsets=t)
    x = rng.standard_normal(3)
    scores = A @ x + t
    assert f.value(x) == pytest.approx(np.log(np.exp(scores).sum()))
    assert check_gradient(f, x, 1e-5) <= 1e-8
    # stable for large scores
    big = f.value(np.full(3, 50.0))
    assert np.isfinite(big)


def test_convexity_monotonicity_random():
    rng = np.random.default_rng(17)
    objectives = [
        PNorm(p=1.5, shift=rng.standard_normal(3)),
        PNorm(p=4.0, shift=rng.standard_normal(3)),
        Quadratic(Q=np.diag([1.0, 2.0, 0.5]), b=rng.standard_normal(3)),
        LogSumExp(rows=rng.standard_normal((4, 3)), offsets=rng.standard_normal(4)),
    ]
    for obj in objectives:
        for _ in range(200):
            x = rng.uniform(-3, 3, 3)
            y = rng.uniform(-3, 3, 3)
            # gradient monotonicity
            assert dot(obj.gradient(x) - obj.gradient(y), x - y) >= -1e-10
            # gradient inequality
            assert obj.value(y) >= obj.value(x) + dot(obj.gradient(x), y - x) - 1e-10


def test_check_gradient_error_decays_quadratically():
    f = PNorm(p=4.0, shift=np.zeros(2))
    x = np.array([1.3, -0.7])
    coarse = check_gradient(f, x, 1e-2)
    fine = check_gradient(f, x, 1e-3)
    assert fine <= coarse / 50.0  # h down 10x, error down ~100x


def test_pnorm4_gradient_not_lipschitz():
    # difference quotients of the gradient grow with the base point: the
    # ratio at norm 1e3 exceeds the ratio at norm 1 by at least 1e4
    f = PNorm(p=4.0, shift=np.zeros(2))
    e = np.array([1.0, 0.0])
    h = 1e-3 * np.array([1.0, 0.0])

    def ratio(scale):
        x = scale * e
        return norm(f.gradient(x + h) - f.gradient(x)) / norm(h)

    assert ratio(1e3) >= 1e4 * ratio(1.0)


def test_objective_validation():
    with pytest.raises(ValueError):
        PNorm(p=1.0, shift=np.zeros(2))
    with pytest.raises(ValueError):
        Quadratic(Q=np.array([[0.0, 1.0], [0.0, 0.0]]), b=np.zeros(2))  # not symmetric
    with pytest.raises(ValueError):
        Quadratic(Q=np.array([[-1.0]]), b=np.zeros(1))  # not PSD
    with pytest.raises(ValueError):
        LogSumExp(rows=np.zeros((2, 2)), offsets=np.zeros(3))
    with pytest.raises(ValueError):
        PNorm(p=2.0, shift=np.zeros(2)).value(np.zeros(3))
    with pytest.raises(ValueError):
        check_gradient(Quadratic(Q=np.eye(1), b=np.zeros(1)), np.zeros(1), 0.0)
