"""Smoke tests for the python bindings: thin sanity checks that the main
operations are reachable and agree with simple hand computations. The heavy
verification lives in the C++ test suites."""

import numpy as np
import pytest

import relasso


def test_forward_hand_example():
    net = relasso.TwoLayerNet(
        W=np.array([[1.0], [0.0]]), a=np.array([1.0]), b=np.array([-1.0])
    )
    assert relasso.forward(net, np.array([3.0, 7.0])) == pytest.approx(2.0)
    out = relasso.forward_batch(net, np.array([[3.0, 7.0], [0.0, 0.0]]))
    assert out[0] == pytest.approx(2.0)
    assert out[1] == 0.0


def test_dimension_mismatch_raises_value_error():
    net = relasso.TwoLayerNet(
        W=np.zeros((3, 2)), a=np.ones(2), b=np.zeros(2)
    )
    with pytest.raises(ValueError):
        relasso.forward(net, np.zeros(4))


def test_canonicalize_and_match_roundtrip():
    rng = np.random.default_rng(0)
    W = rng.normal(size=(4, 3))
    net = relasso.TwoLayerNet(W=W, a=np.array([2.0, -0.5, 1.0]), b=rng.normal(size=3))
    canon = relasso.canonicalize(net)
    assert set(np.asarray(canon.a)) <= {-1.0, 1.0}
    res = relasso.match_networks(canon, canon)
    assert res.D1 == 0.0
    assert res.D2 == 0.0


def test_fit_recovers_a_planted_signal():
    train, test = relasso.gen_planted(
        p=10, r_star=2, s=3, n_train=300, n_test=50, sigma=0.0, seed=4
    )
    result = relasso.fit(
        train.X, train.y, lambda_=0.01, width=10, lr=0.01, epochs=150, seed=1
    )
    imp = relasso.importance_deep(result.net)
    selected, degenerate = relasso.cluster_select(imp, "gmm", seed=1)
    assert not degenerate
    assert relasso.auc_score(imp, train.true_support) > 0.9
    pred = relasso.forward_deep_batch(result.net, test.X)
    assert np.mean((pred - np.asarray(test.y)) ** 2) < np.var(np.asarray(test.y))


def test_selection_helpers():
    imp = np.array([0.1, 5.0, 0.2, 7.0])
    assert relasso.threshold_select(imp, 1.0) == [1, 3]
    assert relasso.topk_select(imp, 1) == [3]
    tp, fp = relasso.evaluate_selection([1, 3], [1, 2])
    assert (tp, fp) == (1, 1)
    assert relasso.auc_score(imp, [1, 3]) == 1.0


def test_lasso_and_omp_on_linear_data():
    train, test = relasso.gen_linear(n_train=100, n_test=50, sigma=0.0, seed=2)
    lam = relasso.lasso_lambda_max(train.X, train.y)
    null_fit = relasso.lasso_cd(train.X, train.y, lam)
    assert np.all(np.asarray(null_fit.beta) == 0.0)

    fit = relasso.lasso_cd(train.X, train.y, 0.001 * lam, tol=1e-10, max_iter=100000)
    assert sorted(np.flatnonzero(np.abs(np.asarray(fit.beta)) > 0.5).tolist()) == [0, 1, 4]

    greedy = relasso.omp(train.X, train.y, 3)
    assert sorted(np.flatnonzero(np.asarray(greedy.beta)).tolist()) == [0, 1, 4]
    pred = relasso.predict(greedy, test.X)
    assert np.max(np.abs(pred - np.asarray(test.y))) < 1e-8


def test_json_roundtrip():
    rng = np.random.default_rng(3)
    net = relasso.TwoLayerNet(
        W=rng.normal(size=(3, 2)), a=np.array([1.0, -1.0]), b=rng.normal(size=2)
    )
    back = relasso.net_from_json(relasso.net_to_json(net))
    assert np.array_equal(np.asarray(back.W), np.asarray(net.W))
    assert np.array_equal(np.asarray(back.b), np.asarray(net.b))
