import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_schema, signal_dataset
from rgsearch.data import Dataset, encode
from rgsearch.errors import DataError, UsageError
from rgsearch.learners import (AdaBoost, CategoricalNB, DecisionTree, GradientBoosting, KernelSVM,
                               LogisticModel, RandomForest, adaboost_stage_weight, dump_model, fit,
                               impurity, kernel_eval, knn_score, load_model, logistic_gradient,
                               logistic_loss, nb_class_conditional, xgb_leaf_weight)
from rgsearch.learners.boosting import StageRejected
from rgsearch.learners.tree import apply_tree
from rgsearch.space import Hypes, builtin_space, sample_hypes

NON_NEURAL = ("NB", "LR", "LASSO", "DT", "KNN", "SVC", "RaF", "ADB", "XGB")


def central_difference(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


# --- closed-form helpers ------------------------------------------------------------------

def test_nb_class_conditional():
    assert nb_class_conditional(0, 0, 1.0, 2) == 0.5
    assert nb_class_conditional(3, 10, 1.0, 5) == pytest.approx(4 / 15)
    assert abs(nb_class_conditional(2, 4, 0.00001, 3) - 0.5) < 1e-5
    with pytest.raises(UsageError):
        nb_class_conditional(0, 0, 0.0, 2)


def test_impurity_values():
    assert impurity([1, 1, 0, 0], "gini") == 0.5
    assert impurity([1, 0, 0, 0], "gini") == pytest.approx(0.375)
    assert impurity([1, 1, 0, 0], "entropy") == pytest.approx(1.0)
    assert impurity([1, 1, 0, 0], "log_loss") == pytest.approx(math.log(2))
    for c in ("gini", "entropy", "log_loss"):
        assert impurity([1, 1, 1], c) == 0.0


def test_logistic_gradient_examples():
    gw, _ = logistic_gradient(np.zeros(1), 0.0, np.array([[1.0], [1.0]]), np.array([1, 0]))
    assert gw[0] == 0.0
    gw, gb = logistic_gradient(np.zeros(1), 0.0, np.array([[1.0]]), np.array([1]))
    assert gw[0] == pytest.approx(-0.5) and gb == pytest.approx(-0.5)


@pytest.mark.parametrize("penalty", ["none", "l1", "l2", "elasticnet"])
@pytest.mark.parametrize("cw", [None, "balanced"])
def test_logistic_gradient_finite_differences(penalty, cw):
    rng = np.random.default_rng(3)
    X = rng.normal(size=(12, 4))
    y = (rng.random(12) < 0.4).astype(int)
    y[:2] = [0, 1]
    w = rng.normal(size=4) + 0.3 * np.sign(rng.normal(size=4))  # keep away from the L1 kink
    b = 0.2
    gw, gb = logistic_gradient(w, b, X, y, penalty, 0.7, cw)
    num = central_difference(lambda t: logistic_loss(t[:4], t[4], X, y, penalty, 0.7, cw), np.r_[w, b])
    ana = np.r_[gw, gb]
    assert np.linalg.norm(ana - num) / np.linalg.norm(num) < 1e-6


def test_adaboost_stage_weight():
    assert adaboost_stage_weight(0.5) == 0.0
    assert adaboost_stage_weight(0.1) == pytest.approx(math.log(9))
    with pytest.raises(StageRejected):
        adaboost_stage_weight(0.6)
    assert adaboost_stage_weight(0.0) == pytest.approx(math.log(1e12))


def test_kernel_eval():
    x = np.array([1.0, 0.0, 1.0])
    assert kernel_eval("rbf", x, x, gamma=3.7) == 1.0
    assert kernel_eval("linear", [1, 0, 0, 1], [0, 1, 1, 0]) == 0.0
    assert kernel_eval("poly", [3, 2], [5, 7], gamma=1.3, degree=0, coef0=0.4) == 1.0
    assert kernel_eval("sigmoid", [1, 1], [1, 0], gamma=0.5, coef0=0.1) == pytest.approx(math.tanh(0.6))


def test_xgb_leaf_weight():
    assert xgb_leaf_weight(4, 2, 0, 0) == -2
    assert xgb_leaf_weight(0.7, 5, 1, 1) == 0.0
    assert xgb_leaf_weight(-3, 1, 1, 1) == 1.0


def test_knn_score():
    assert knn_score([1, 1, 0], [1, 2, 3]) == pytest.approx(2 / 3)
    assert knn_score([1, 0], [1, 2], "distance") == pytest.approx(2 / 3)
    assert knn_score([1, 0], [0, 2], "distance") == 1.0
    assert knn_score([1, 0], [0, 0], "distance") == 0.5


# --- fitted models ------------------------------------------------------------------------

def test_nb_hand_counts():
    # two predictors (2 and 3 categories), five cases
    schema = make_schema((2, 3))
    X = np.array([[0, 0], [0, 1], [1, 2], [1, 2], [0, 2]])
    y = np.array([1, 1, 0, 0, 0])
    m = CategoricalNB(1.0, None, True, [2, 3]).fit(X, y)
    assert np.allclose(np.exp(m.log_theta[0]), [[(1 + 1) / (3 + 2), (2 + 1) / (3 + 2)],
                                                [(2 + 1) / (2 + 2), (0 + 1) / (2 + 2)]])
    assert np.allclose(np.exp(m.log_theta[1]), [[1 / 6, 1 / 6, 4 / 6], [2 / 5, 2 / 5, 1 / 5]])
    # posterior for case (0, 0) by hand
    p1 = 2 / 5 * 3 / 4 * 2 / 5
    p0 = 3 / 5 * 2 / 5 * 1 / 6
    assert m.predict_proba([[0, 0]])[0] == pytest.approx(p1 / (p1 + p0))
    d = Dataset(schema, X, y)
    h = Hypes("NB", {"alpha": 1.0, "min_categories": 2, "fit_prior": True})
    assert np.allclose(fit("NB", h, d, 0).predict_proba(X), m.predict_proba(X))


def test_nb_symmetric_counts_half():
    X = np.array([[0], [1], [0], [1]])
    y = np.array([1, 1, 0, 0])
    m = CategoricalNB(1.0, None, True, [2]).fit(X, y)
    assert np.allclose(m.predict_proba(X), 0.5)


def test_nb_onehot_matches_ordinal(toy):
    m = CategoricalNB(0.5, None, True, [c.cardinality for c in toy.schema.columns]).fit(toy.X, toy.y)
    np.testing.assert_allclose(m.predict_onehot(encode(toy).values), m.predict_proba(toy.X), atol=1e-12)


def test_stump_finds_separating_feature():
    rng = np.random.default_rng(0)
    n = 40
    y = np.r_[np.ones(20, int), np.zeros(20, int)]
    X = np.column_stack([rng.integers(0, 2, n), y, rng.integers(0, 3, n)])
    d = Dataset(make_schema((2, 2, 3)), X, y)
    h = {"criterion": "gini", "splitter": "best", "max_depth": 1, "min_samples_split": 2,
         "min_samples_leaf": 1, "min_weight_fraction_leaf": 0.0, "max_features": 7,
         "max_leaf_nodes": 10, "min_impurity_decrease": 0.0, "class_weight": "none"}
    m = fit("DT", Hypes("DT", h), d, 0)
    assert m.nodes["feature"][0] in (2, 3)  # one-hot coordinates of the second column
    assert m.predict_proba(encode(d).values).tolist() == y.astype(float).tolist()


def test_missing_axis_rejected(toy):
    h = dict(sample_hypes(builtin_space("DT", toy.n_cases), 1, 0)[0].values)
    del h["criterion"]
    with pytest.raises(UsageError):
        fit("DT", Hypes("DT", h), toy, 0)


def test_single_class_rejected(toy):
    one = Dataset(toy.schema, toy.X, np.ones(toy.n_cases, int))
    h = sample_hypes(builtin_space("NB", toy.n_cases), 1, 0)[0]
    with pytest.raises(DataError):
        fit("NB", h, one, 0)


def test_forest_of_one_equals_tree(toy):
    X = encode(toy).values
    params = dict(criterion="entropy", max_depth=5, min_samples_split=4, min_samples_leaf=2,
                  max_features=X.shape[1], max_leaf_nodes=30)
    tree = DecisionTree(**params).fit(X, toy.y, seed=9)
    forest = RandomForest(1, bootstrap=False, **params).fit(X, toy.y, seed=9)
    assert np.max(np.abs(tree.predict_proba(X) - forest.predict_proba(X))) <= 1e-12


def test_forest_leaf_fraction(toy):
    X = encode(toy).values
    forest = RandomForest(1, bootstrap=False, max_depth=2, max_features=X.shape[1]).fit(X, toy.y, seed=1)
    tree = forest.trees[0] if hasattr(forest, "trees") else forest.tree
    leaves = apply_tree(tree.nodes, X)
    for leaf in np.unique(leaves):
        frac = toy.y[leaves == leaf].mean()
        assert np.allclose(forest.predict_proba(X[leaves == leaf]), frac)


def test_lr_zero_model_half():
    m = LogisticModel("LR", "none")
    m.coef, m.intercept, m.n_inputs = np.zeros(3), 0.0, 3
    assert np.allclose(m.predict_proba(np.eye(3)), 0.5)


def test_lasso_shrinks_to_prior(toy):
    X = encode(toy).values
    prior = toy.y.mean()
    for C in (1e-4, 0.0):
        m = LogisticModel("LASSO", "l1", C, 500, 1e-8).fit(X, toy.y)
        assert np.all(m.coef == 0.0)
        assert np.allclose(m.predict_proba(X), prior, atol=1e-6)


def test_adaboost_weights_normalized(toy):
    m = AdaBoost(25, 1.0).fit(encode(toy).values, toy.y)
    assert m.weight_sums and np.allclose(m.weight_sums, 1.0)


@pytest.mark.parametrize("booster", ["gbtree", "gblinear"])
def test_xgb_loss_non_increasing(toy, booster):
    m = GradientBoosting(booster, eta=0.3, gamma=0.0, max_depth=3).fit(encode(toy).values, toy.y)
    assert np.all(np.diff(m.train_loss) <= 1e-12)
    assert m.train_loss[-1] < m.train_loss[0]


def test_xgb_warnings_for_mapped_options():
    m = GradientBoosting("dart", sampling_method="gradient_based", tree_method="hist")
    assert len(m.warnings) == 3


@pytest.mark.parametrize("kernel", ["linear", "poly", "rbf", "sigmoid"])
def test_svm_score_monotone_in_decision(toy, kernel):
    X = encode(toy).values
    m = KernelSVM(1.0, kernel, 2, "scale", True, 1e-3, None, 50).fit(X, toy.y)
    f = m.decision_function(X)
    p = m.predict_proba(X)
    order = np.argsort(f, kind="stable")
    fs, ps = f[order], p[order]
    assert np.all(ps[1:][fs[1:] > fs[:-1]] > ps[:-1][fs[1:] > fs[:-1]])


def test_deep_tree_zero_training_impurity():
    rng = np.random.default_rng(4)
    X = np.unique(rng.integers(0, 2, (80, 8)), axis=0).astype(float)
    y = rng.integers(0, 2, len(X))
    y[:2] = [0, 1]
    m = DecisionTree(max_depth=10 ** 6, min_samples_leaf=1).fit(X, y)
    assert np.all(m.predict_proba(X) == y)


@given(st.integers(0, 10 ** 6), st.integers(2, 30))
@settings(max_examples=25, deadline=None)
def test_min_samples_split_honoured(seed, mss):
    d = signal_dataset(120, seed=seed)
    X = encode(d).values
    m = DecisionTree(min_samples_split=mss, max_depth=12).fit(X, d.y, seed=seed)
    internal = m.nodes["feature"] >= 0
    assert np.all(m.nodes["n_samples"][internal] >= mss)
    leaves = m.nodes["feature"] < 0
    assert m.n_leaves == int(leaves.sum())


@pytest.mark.parametrize("method", NON_NEURAL)
def test_probability_range_and_determinism(method):
    d = signal_dataset(90, seed=2)
    space = builtin_space(method, d.n_cases, "desk")
    X = encode(d, "ordinal" if method == "NB" else "onehot").values
    rng = np.random.default_rng(0)
    probes = rng.random((25, X.shape[1])) * 3 - 1 if method != "NB" else X[:25]
    for i, h in enumerate(sample_hypes(space, 6, 100)):
        try:
            with np.errstate(all="ignore"):
                m = fit(method, h, d, i)
                m2 = fit(method, h, d, i)
        except ArithmeticError:
            continue
        for rows in (X, probes):
            p = m.predict_proba(rows)
            assert np.all((p >= 0) & (p <= 1))
            np.testing.assert_array_equal(p, m2.predict_proba(rows))
        with pytest.raises(UsageError):
            m.predict_proba(np.zeros((1, X.shape[1] + 1)))


def test_nb_posterior_normalized(toy):
    m = CategoricalNB(0.3, None, True, [2, 3, 3, 2]).fit(toy.X, toy.y)
    jll = m.joint_log_likelihood(toy.X)
    post = np.exp(jll - np.logaddexp(jll[:, 0], jll[:, 1])[:, None])
    assert np.allclose(post.sum(1), 1.0, atol=1e-12)
    assert np.allclose(post[:, 1], m.predict_proba(toy.X), atol=1e-12)


@pytest.mark.parametrize("method", NON_NEURAL)
def test_model_dump_round_trip(method, toy):
    h = sample_hypes(builtin_space(method, toy.n_cases, "desk"), 1, 4)[0]
    with np.errstate(all="ignore"):
        m = fit(method, h, toy, 0)
    X = encode(toy, "ordinal" if method == "NB" else "onehot").values
    m2 = load_model(dump_model(m))
    np.testing.assert_array_equal(m.predict_proba(X), m2.predict_proba(X))
    with pytest.raises(DataError):
        load_model('{"format": "rgsearch-model", "version": 99}')
