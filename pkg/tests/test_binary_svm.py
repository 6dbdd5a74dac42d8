import numpy as np
import pytest

import stormsched.binary_svm as binary_svm
from stormsched import kernels
from stormsched._smo import _pure
from stormsched.binary_svm import (
    SmoConvergenceError,
    decision_value,
    decision_values,
    dual_objective,
    predict_binary,
    train_binary,
)
from stormsched.kernels import kernel_matrix


def _train(x, y, c=10.0, kernel=None, seed=0):
    return train_binary(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64),
                        c, kernel or kernels.linear(), seed=seed)


def test_two_point_analytic_solution():
    # symmetric pair at x = +-1: maximum margin plane is x1 = 0 with
    # weight (1, 0), bias 0 and both multipliers at 0.5
    model = _train([[1.0, 0.0], [-1.0, 0.0]], [1.0, -1.0])
    assert model.bias == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(np.sort(model.alphas), [-0.5, 0.5], atol=1e-9)
    assert decision_value(model, np.array([0.3, 0.0])) == pytest.approx(0.3, abs=1e-9)
    assert decision_value(model, np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-9)
    assert predict_binary(model, np.array([-0.1, 5.0])) == -1


def test_one_dimensional_margin_pair():
    # five points on a line, separable; the margin is set by the closest
    # opposite pair at -0.3 and 0.8, giving weight 2 / 1.1
    x = np.array([[-2.0], [-1.0], [-0.3], [0.8], [2.2]])
    y = np.array([-1.0, -1.0, -1.0, 1.0, 1.0])
    model = _train(x, y, c=2.0)
    w = float(model.alphas @ model.support_vectors[:, 0])
    assert w == pytest.approx(2.0 / 1.1, rel=1e-6)
    K = kernel_matrix(kernels.linear(), x, x)
    alpha = np.zeros(5)
    # recover raw multipliers from the signed ones stored on the model
    sv_rows = {tuple(r): i for i, r in enumerate(x)}
    for sv, a in zip(model.support_vectors, model.alphas):
        alpha[sv_rows[tuple(sv)]] = abs(a)
    assert dual_objective(alpha, y, K) == pytest.approx(1.6528925619834711, rel=1e-6)


def test_xor_gaussian_dual_optimum():
    # frozen optimum computed by an independent constrained-QP solve:
    # all four multipliers 2.5026503, dual objective 5.0053006, bias 0
    x = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
    y = np.array([1.0, 1.0, -1.0, -1.0])
    spec = kernels.gaussian(1.0)
    model = _train(x, y, c=10.0, kernel=spec)
    d = decision_values(model, x)
    assert np.all(np.sign(d) == y)
    assert model.bias == pytest.approx(0.0, abs=1e-6)
    K = kernel_matrix(spec, x, x)
    alpha = np.abs(model.alphas)  # all four rows stay support vectors
    assert alpha.shape == (4,)
    assert dual_objective(alpha, y, K) == pytest.approx(5.0053006021542386, rel=1e-4)


def test_overlapping_gaussian_dual_optimum():
    # frozen optimum from the same independent QP solve
    x = np.array([[0.1, 0.2], [0.9, 0.4], [0.45, 0.55], [0.5, 0.5], [0.8, 0.9]])
    y = np.array([1.0, 1.0, -1.0, 1.0, -1.0])
    spec = kernels.gaussian(0.5)
    model = _train(x, y, c=1.5, kernel=spec)
    K = kernel_matrix(spec, x, x)
    alpha = np.zeros(5)
    sv_rows = {tuple(r): i for i, r in enumerate(x)}
    for sv, a in zip(model.support_vectors, model.alphas):
        alpha[sv_rows[tuple(sv)]] = abs(a)
    assert dual_objective(alpha, y, K) == pytest.approx(5.663924303379, rel=1e-3)


def _random_problem(seed, n=30):
    rng = np.random.default_rng(seed)
    half = n // 2
    pos = rng.normal(loc=(1.2, 1.2), scale=0.55, size=(half, 2))
    neg = rng.normal(loc=(-1.2, -1.2), scale=0.55, size=(n - half, 2))
    x = np.vstack([pos, neg])
    y = np.concatenate([np.ones(half), -np.ones(n - half)])
    perm = rng.permutation(n)
    return x[perm], y[perm]


def test_dual_constraints_hold_across_seeds():
    for seed in range(8):
        x, y = _random_problem(seed)
        c = 4.0
        model = _train(x, y, c=c)
        # signed multipliers balance and respect the box
        assert abs(model.alphas.sum()) <= 1e-6
        assert np.all(np.abs(model.alphas) <= c + 1e-9)
        assert np.all(np.abs(model.alphas) > 0.0)


def test_nonbound_support_vectors_sit_on_margin():
    for seed in range(6):
        x, y = _random_problem(seed, n=40)
        c = 5.0
        model = _train(x, y, c=c, kernel=kernels.gaussian(0.8))
        d = decision_values(model, model.support_vectors)
        raw = np.abs(model.alphas)
        nonbound = (raw > 1e-7) & (raw < c - 1e-7)
        if nonbound.any():
            signs = np.sign(model.alphas[nonbound])
            margins = signs * d[nonbound]
            np.testing.assert_allclose(margins, 1.0, atol=5e-3)


def test_training_is_deterministic():
    x, y = _random_problem(12, n=50)
    a = _train(x, y, c=3.0, kernel=kernels.gaussian())
    b = _train(x, y, c=3.0, kernel=kernels.gaussian())
    assert np.array_equal(a.alphas, b.alphas)
    assert np.array_equal(a.support_vectors, b.support_vectors)
    assert a.bias == b.bias


def test_backends_agree_bitwise():
    from stormsched import _smo

    x, y = _random_problem(4, n=36)
    K = kernel_matrix(kernels.gaussian(0.5), x, x)
    args = (K, y, 2.5, binary_svm.KKT_TOLERANCE, binary_svm.STEP_TOLERANCE,
            binary_svm.ALPHA_EPSILON, 2000, 0)
    pure = _pure.smo_solve(*args)
    active = _smo.smo_solve(*args)
    assert np.array_equal(pure[0], active[0])
    assert pure[1:] == active[1:]


def test_input_validation():
    x = np.array([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(ValueError):
        _train(x, [1.0, 1.0])  # single class
    with pytest.raises(ValueError):
        _train(x, [1.0, 2.0])  # labels outside {-1, +1}
    with pytest.raises(ValueError):
        _train(x, [1.0, -1.0], c=0.0)
    with pytest.raises(ValueError):
        _train(x[:1], [1.0])
    with pytest.raises(ValueError):
        _train(np.array([[np.inf, 0.0], [0.0, 0.0]]), [1.0, -1.0])


def test_exhausted_pass_budget_raises(monkeypatch):
    rng = np.random.default_rng(0)
    x = rng.uniform(size=(60, 2))
    y = np.where(rng.uniform(size=60) < 0.5, 1.0, -1.0)
    if (y > 0).all() or (y < 0).all():
        y[0] = -y[0]
    monkeypatch.setattr(binary_svm, "PASS_FACTOR", 0)  # clamps budget to 10 passes
    with pytest.raises(SmoConvergenceError) as err:
        _train(x, y, c=100.0)
    assert err.value.passes == 10
    assert err.value.kkt_violations > 0


def test_decision_batch_matches_scalar():
    x, y = _random_problem(9)
    model = _train(x, y, c=2.0, kernel=kernels.polynomial(2))
    batch = decision_values(model, x[:5])
    # batch BLAS and single-row dot may differ in summation order only
    for i in range(5):
        assert batch[i] == pytest.approx(decision_value(model, x[i]), rel=1e-12)
