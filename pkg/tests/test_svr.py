import numpy as np
import pytest

from ssqp.svr import (
    Normalizer,
    SvrHyperparams,
    SvrModel,
    fit_svr,
    grid_search_cv,
    train_nu_svr,
)


def assert_dual_feasible(model, C):
    if model.n_support:
        assert abs(model.dual_coeffs.sum()) < 1e-6
        assert np.abs(model.dual_coeffs).max() <= C + 1e-9


def test_normalizer_basic_and_clamp():
    norm = Normalizer.fit(np.array([[2.0], [4.0], [6.0]]))
    assert np.allclose(norm.apply(np.array([[2.0], [4.0], [6.0]])).ravel(), [0.0, 0.5, 1.0])
    assert norm.apply(np.array([8.0]))[0] == 1.0
    assert norm.apply(np.array([0.0]))[0] == 0.0


def test_normalizer_constant_dimension():
    norm = Normalizer.fit(np.array([[3.0, 1.0], [3.0, 2.0]]))
    out = norm.apply(np.array([[3.0, 1.5], [99.0, 2.0]]))
    assert np.allclose(out[:, 0], 0.5)
    assert np.allclose(out[:, 1], [0.5, 1.0])


def test_normalizer_requires_rows():
    with pytest.raises(ValueError):
        Normalizer.fit(np.array([[1.0, 2.0]]))


def test_constant_targets_shortcut():
    X = np.linspace(0, 1, 10)[:, None]
    m = train_nu_svr(X, np.full(10, 4.5), nu=0.5, C=1.0, gamma=1.0)
    assert m.n_support == 0
    assert m.predict(np.array([0.123])) == 4.5


def test_noiseless_linear_fit_quality():
    x = np.linspace(0, 1, 50)[:, None]
    y = x[:, 0].copy()
    m = train_nu_svr(x, y, nu=0.5, C=10.0, gamma=10.0)
    pred = m.predict_batch(x)
    assert float(np.sqrt(np.mean((pred - y) ** 2))) < 0.05
    assert_dual_feasible(m, 10.0)


def test_nu_property_at_n200():
    rng = np.random.default_rng(7)
    X = rng.uniform(0, 1, (200, 1))
    y = np.sin(2 * np.pi * X[:, 0]) + rng.normal(0, 0.2, 200)
    nu, C = 0.5, 10.0
    m = train_nu_svr(X, y, nu=nu, C=C, gamma=10.0)
    assert_dual_feasible(m, C)
    frac_sv = m.n_support / 200
    frac_err = float(np.sum(np.abs(m.dual_coeffs) >= C * (1 - 1e-6))) / 200
    assert frac_sv >= nu - 0.1
    assert frac_err <= nu + 0.1


def test_tube_property_on_trained_model():
    rng = np.random.default_rng(8)
    X = rng.uniform(0, 1, (80, 1))
    y = np.sin(2 * np.pi * X[:, 0])
    C = 50.0
    m = train_nu_svr(X, y, nu=0.6, C=C, gamma=20.0)
    pred = m.predict_batch(X)
    resid = np.abs(pred - y)
    # points that are not margin errors stay inside the optimized tube
    coef = np.zeros(80)
    sv_map = {tuple(v): c for v, c in zip(m.support_vectors, m.dual_coeffs)}
    for i, x in enumerate(X):
        coef[i] = sv_map.get(tuple(x), 0.0)
    inside = np.abs(coef) < C * (1 - 1e-6)
    assert np.all(resid[inside] <= m.epsilon + 1e-2)


def test_predict_batch_matches_scalar_and_checks_dims():
    rng = np.random.default_rng(9)
    X = rng.uniform(0, 1, (30, 2))
    y = X.sum(axis=1)
    m = train_nu_svr(X, y, nu=0.5, C=5.0, gamma=2.0)
    batch = m.predict_batch(X)
    single = np.array([m.predict(x) for x in X])
    # same values up to BLAS accumulation order between the two call shapes
    assert np.allclose(batch, single, rtol=1e-12, atol=1e-12)
    assert np.array_equal(m.predict_batch(X), m.predict_batch(X))
    with pytest.raises(ValueError):
        m.predict(np.array([1.0, 2.0, 3.0]))


def test_prediction_lipschitz_bound():
    rng = np.random.default_rng(10)
    X = rng.uniform(0, 1, (40, 2))
    y = np.cos(3 * X[:, 0]) * X[:, 1]
    gamma = 4.0
    m = train_nu_svr(X, y, nu=0.5, C=10.0, gamma=gamma)
    L = np.abs(m.dual_coeffs).sum() * np.sqrt(2 * gamma / np.e)
    for _ in range(50):
        a = rng.uniform(-0.2, 1.2, 2)
        d = rng.normal(0, 0.05, 2)
        lhs = abs(m.predict(a) - m.predict(a + d))
        assert lhs <= L * np.linalg.norm(d) + 1e-9


def test_training_bit_reproducible():
    rng = np.random.default_rng(11)
    X = rng.uniform(0, 1, (60, 3))
    y = rng.normal(0, 1, 60)
    a = train_nu_svr(X, y, nu=0.4, C=3.0, gamma=1.5)
    b = train_nu_svr(X, y, nu=0.4, C=3.0, gamma=1.5)
    assert np.array_equal(a.dual_coeffs, b.dual_coeffs)
    assert a.bias == b.bias and a.epsilon == b.epsilon


def test_train_input_validation():
    with pytest.raises(ValueError):
        train_nu_svr(np.zeros((3, 1)), np.zeros(2), nu=0.5, C=1.0, gamma=1.0)
    with pytest.raises(ValueError):
        train_nu_svr(np.zeros((1, 1)), np.zeros(1), nu=0.5, C=1.0, gamma=1.0)
    with pytest.raises(ValueError):
        train_nu_svr(np.zeros((3, 1)), np.zeros(3), nu=1.5, C=1.0, gamma=1.0)


def test_hyperparams_validation():
    with pytest.raises(ValueError):
        SvrHyperparams(nu=0.0)
    with pytest.raises(ValueError):
        SvrHyperparams(C_grid=())
    with pytest.raises(ValueError):
        SvrHyperparams(gamma_grid=(0.0,))
    with pytest.raises(ValueError):
        SvrHyperparams(cv_folds=1)
    defaults = SvrHyperparams()
    assert len(defaults.C_grid) == 11 and len(defaults.gamma_grid) == 10


def test_grid_search_single_pair():
    rng = np.random.default_rng(12)
    X = rng.uniform(0, 1, (20, 1))
    y = X[:, 0]
    hyper = SvrHyperparams(C_grid=(7.0,), gamma_grid=(0.3,), cv_folds=4)
    C, gamma, mse = grid_search_cv(X, y, hyper, seed=0)
    assert (C, gamma) == (7.0, 0.3)
    assert np.isfinite(mse)


def test_grid_search_deterministic():
    rng = np.random.default_rng(13)
    X = rng.uniform(0, 1, (40, 2))
    y = np.sin(X.sum(axis=1) * 3)
    hyper = SvrHyperparams(C_grid=(1.0, 10.0), gamma_grid=(0.5, 4.0), cv_folds=3)
    assert grid_search_cv(X, y, hyper, seed=5) == grid_search_cv(X, y, hyper, seed=5)


def test_grid_search_gamma_recovery():
    # Targets drawn from an RBF mixture with a known width: cross validation
    # must land within one grid step of the generating gamma.
    rng = np.random.default_rng(14)
    gamma_true = 4.0
    centers = rng.uniform(0, 1, (5, 1))
    amps = rng.uniform(0.5, 1.5, 5)
    X = rng.uniform(0, 1, (80, 1))
    dists = (X[:, None, 0] - centers[None, :, 0]) ** 2
    y = (np.exp(-gamma_true * dists) * amps).sum(axis=1)
    grid = (gamma_true / 16, gamma_true / 4, gamma_true, gamma_true * 4, gamma_true * 16)
    hyper = SvrHyperparams(C_grid=(10.0,), gamma_grid=grid, cv_folds=5)
    _, gamma_hat, _ = grid_search_cv(X, y, hyper, seed=1)
    assert gamma_true / 4 <= gamma_hat <= gamma_true * 4


def test_grid_search_too_few_rows():
    with pytest.raises(ValueError):
        grid_search_cv(np.zeros((3, 1)), np.zeros(3), SvrHyperparams(cv_folds=5), seed=0)


def test_fit_svr_pipeline_and_serialization():
    rng = np.random.default_rng(15)
    X = rng.uniform(-3, 7, (50, 2))
    y = X[:, 0] * 0.5 - X[:, 1] + rng.normal(0, 0.05, 50)
    hyper = SvrHyperparams(C_grid=(1.0, 10.0), gamma_grid=(0.5, 2.0), cv_folds=3)
    m = fit_svr(X, y, hyper, seed=2)
    assert m.norm_lo is not None and m.norm_hi is not None
    assert np.isfinite(m.cv_mse)
    assert_dual_feasible(m, m.c)

    back = SvrModel.from_dict(m.to_dict())
    probes = rng.uniform(-3, 7, (10, 2))
    assert np.array_equal(m.predict_batch(probes), back.predict_batch(probes))


def test_fit_svr_deterministic():
    rng = np.random.default_rng(16)
    X = rng.uniform(0, 1, (30, 2))
    y = rng.normal(0, 1, 30)
    hyper = SvrHyperparams(C_grid=(1.0, 8.0), gamma_grid=(1.0,), cv_folds=3)
    a = fit_svr(X, y, hyper, seed=3)
    b = fit_svr(X, y, hyper, seed=3)
    assert np.array_equal(a.dual_coeffs, b.dual_coeffs)
    assert a.bias == b.bias and a.c == b.c and a.gamma == b.gamma
