import numpy as np
import pytest

from projgrad import IterateRecord, SolverConfig, as_vector, axpby, constant_step, dot, norm


def test_dot_examples():
    assert dot(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0
    assert dot(np.array([0.0, 0.0]), np.array([5.0, -7.0])) == 0.0
    assert dot(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_dot_symmetry_and_dim_mismatch():
    a, b = np.array([1.0, -2.0, 3.0]), np.array([0.5, 0.25, -1.0])
    assert dot(a, b) == dot(b, a)
    with pytest.raises(ValueError):
        dot(np.array([1.0]), np.array([1.0, 2.0]))


def test_norm_examples():
    assert norm(np.array([3.0, 4.0])) == 5.0
    assert norm(np.zeros(3)) == 0.0
    assert norm(np.array([-2.0])) == 2.0


def test_axpby_examples():
    assert np.array_equal(axpby(1.0, np.array([1.0, 1.0]), 0.0, np.array([9.0, 9.0])), [1.0, 1.0])
    assert np.array_equal(axpby(0.5, np.array([2.0, 0.0]), 0.5, np.array([0.0, 2.0])), [1.0, 1.0])
    assert np.array_equal(axpby(1.0, np.array([1.0, 2.0]), -1.0, np.array([1.0, 2.0])), [0.0, 0.0])
    with pytest.raises(ValueError):
        axpby(1.0, np.zeros(2), 1.0, np.zeros(3))


def test_cauchy_schwarz_random():
    rng = np.random.default_rng(0)
    for _ in range(500):
        dim = int(rng.integers(1, 12))
        a = rng.standard_normal(dim) * rng.uniform(0.1, 10)
        b = rng.standard_normal(dim) * rng.uniform(0.1, 10)
        assert abs(dot(a, b)) <= norm(a) * norm(b) * (1 + 1e-12)


def test_parallelogram_law_random():
    rng = np.random.default_rng(1)
    for _ in range(500):
        dim = int(rng.integers(1, 12))
        a = rng.standard_normal(dim)
        b = rng.standard_normal(dim)
        lhs = norm(axpby(1, a, 1, b)) ** 2 + norm(axpby(1, a, -1, b)) ** 2
        rhs = 2 * norm(a) ** 2 + 2 * norm(b) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-10)


def test_as_vector_rejects_bad_input():
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])
    with pytest.raises(ValueError):
        as_vector([1.0, np.inf])
    with pytest.raises(ValueError):
        as_vector([[1.0, 2.0]])
    with pytest.raises(ValueError):
        as_vector([])


def test_config_validation():
    SolverConfig()  # defaults valid
    with pytest.raises(ValueError):
        SolverConfig(theta=1.0)
    with pytest.raises(ValueError):
        SolverConfig(theta=0.0)
    with pytest.raises(ValueError):
        SolverConfig(delta=1.0)
    with pytest.raises(ValueError):
        SolverConfig(beta_min=0.0)
    with pytest.raises(ValueError):
        SolverConfig(beta_min=2.0, beta_max=1.0)
    with pytest.raises(ValueError):
        SolverConfig(residual_tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_outer_iters=0)


def test_beta_schedule_range_enforced():
    cfg = SolverConfig(beta_schedule=constant_step(0.5))
    assert cfg.beta_at(0) == 0.5
    assert cfg.beta_at(100) == 0.5
    bad = SolverConfig(beta_schedule=lambda k: 100.0)
    with pytest.raises(ValueError):
        bad.beta_at(0)
    # default schedule is the constant 1
    assert SolverConfig().beta_at(7) == 1.0


def test_record_defaults():
    rec = IterateRecord(k=0, x=np.zeros(2), f_val=1.0, alpha=1.0, beta=1.0, inner_trials=0, residual=0.5)
    assert rec.f_lev is None and rec.epsilon_qf is None and rec.dist_anchor is None
    assert rec.stop is None
