import itertools
import random
import tempfile
import unittest
from pathlib import Path

import numpy as np

from pathml.domain.errors import (
    EmptyTraining,
    InsufficientData,
    InvalidFraction,
    LengthMismatch,
    NonFiniteData,
    SingleClassAuc,
    SingularSystem,
)
from pathml.ml import (
    BoostingParams,
    Dataset,
    ForestParams,
    IForestParams,
    SplitSpec,
    TreeParams,
    accuracy,
    anomaly_score,
    auc_roc,
    average_path_length,
    confusion_matrix,
    f1,
    fit_forest,
    fit_iforest,
    fit_linreg,
    fit_tree,
    fit_tree_ensemble_regressor,
    mae,
    precision,
    predict_forest,
    predict_forest_proba,
    predict_linreg,
    recall,
    temporal_split,
)
from pathml.ml.linreg import ridge_gradient
from pathml.ml.serialize import dumps_model, load_model, loads_model, save_model


def _brute_force_auc(y: list[int], s: list[float]) -> float:
    pos = [v for v, t in zip(s, y) if t == 1]
    neg = [v for v, t in zip(s, y) if t == 0]
    credit = 0.0
    for p, n in itertools.product(pos, neg):
        credit += 1.0 if p > n else 0.5 if p == n else 0.0
    return credit / (len(pos) * len(neg))


def _xor(noise: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    centers = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    labels = np.array([0, 0, 1, 1])
    X = np.repeat(centers, 50, axis=0)
    y = np.repeat(labels, 50)
    if noise:
        X = X + np.random.default_rng(seed).normal(0.0, noise, size=X.shape)
    return X, y


class TestMetrics(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertAlmostEqual(mae([2, 4], [1, 2]), 1.5)
        y, p = [1, 1, 1, 0], [1, 1, 0, 1]
        self.assertAlmostEqual(precision(y, p), 2 / 3)
        self.assertAlmostEqual(recall(y, p), 2 / 3)
        self.assertAlmostEqual(f1(y, p), 2 / 3)
        self.assertAlmostEqual(auc_roc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]), 0.75)
        self.assertAlmostEqual(accuracy([0, 1, 2], [0, 1, 1]), 2 / 3)

    def test_no_positive_predictions(self) -> None:
        self.assertEqual(precision([1, 0], [0, 0]), 0.0)
        self.assertEqual(f1([0, 0], [0, 0]), 0.0)

    def test_auc_matches_pairwise_oracle(self) -> None:
        rng = random.Random(11)
        for _ in range(200):
            n = rng.randint(2, 200)
            y = [rng.randint(0, 1) for _ in range(n)]
            y[0], y[1] = 0, 1
            s = [round(rng.random(), 1) for _ in range(n)]
            self.assertAlmostEqual(auc_roc(y, s), _brute_force_auc(y, s), places=12)

    def test_f1_is_permutation_invariant(self) -> None:
        rng = random.Random(3)
        y = [rng.randint(0, 1) for _ in range(100)]
        p = [rng.randint(0, 1) for _ in range(100)]
        base = f1(y, p)
        for _ in range(20):
            order = list(range(100))
            rng.shuffle(order)
            self.assertAlmostEqual(f1([y[i] for i in order], [p[i] for i in order]), base)

    def test_errors(self) -> None:
        with self.assertRaises(LengthMismatch):
            mae([1, 2], [1])
        with self.assertRaises(SingleClassAuc):
            auc_roc([1, 1, 1], [0.1, 0.2, 0.3])

    def test_confusion_matrix(self) -> None:
        labels, table = confusion_matrix([0, 0, 1, 2], [0, 1, 1, 2])
        self.assertEqual(labels, [0, 1, 2])
        self.assertEqual(table, [[1, 1, 0], [0, 1, 0], [0, 0, 1]])


class TestDataset(unittest.TestCase):
    def test_validation(self) -> None:
        with self.assertRaises(LengthMismatch):
            Dataset(X=np.zeros((3, 2)), y=np.zeros(2))
        with self.assertRaises(NonFiniteData):
            Dataset(X=np.array([[1.0], [np.nan]]), y=np.zeros(2))

    def test_temporal_split(self) -> None:
        ds = Dataset(X=np.arange(10.0).reshape(-1, 1), y=np.arange(10.0))
        train, test = temporal_split(ds, SplitSpec(0.8))
        self.assertEqual(train.t_index.tolist(), list(range(8)))
        self.assertEqual(test.t_index.tolist(), [8, 9])
        self.assertEqual(train.y.tolist(), [float(i) for i in range(8)])

    def test_split_respects_time_ties(self) -> None:
        t = np.array([0, 0, 1, 1, 2, 2, 3, 3, 4, 4])
        ds = Dataset(X=np.zeros((10, 1)), y=np.arange(10.0), t_index=t)
        train, test = temporal_split(ds, SplitSpec(0.7))
        self.assertLess(train.t_index.max(), test.t_index.min())
        self.assertEqual(len(train), 8)

    def test_split_errors(self) -> None:
        with self.assertRaises(InvalidFraction):
            SplitSpec(1.0)
        with self.assertRaises(InvalidFraction):
            SplitSpec(0.0)
        same_time = Dataset(X=np.zeros((4, 1)), y=np.zeros(4), t_index=np.zeros(4, dtype=np.int64))
        with self.assertRaises(InsufficientData):
            temporal_split(same_time)


class TestLinreg(unittest.TestCase):
    def test_exact_line(self) -> None:
        ds = Dataset(X=np.array([[1.0], [2.0], [3.0]]), y=np.array([3.0, 5.0, 7.0]))
        model = fit_linreg(ds)
        self.assertAlmostEqual(float(model.coef[0]), 2.0, places=9)
        self.assertAlmostEqual(model.intercept, 1.0, places=9)
        self.assertLess(mae(ds.y, predict_linreg(model, ds.X)), 1e-9)

    def test_constant_target(self) -> None:
        X = np.random.default_rng(0).normal(size=(50, 3))
        model = fit_linreg(Dataset(X=X, y=np.full(50, 4.5)))
        self.assertAlmostEqual(model.intercept, 4.5, places=9)
        self.assertTrue(np.allclose(model.coef, 0.0, atol=1e-9))

    def test_duplicated_column(self) -> None:
        rng = np.random.default_rng(1)
        x = rng.normal(size=(80, 1))
        y = 2.5 * x[:, 0] - 1.0 + rng.normal(0, 0.1, size=80)
        single = fit_linreg(Dataset(X=x, y=y))
        doubled = fit_linreg(Dataset(X=np.hstack([x, x]), y=y), ridge_lambda=1e-8)
        self.assertTrue(np.isfinite(doubled.coef).all())
        self.assertTrue(np.allclose(doubled.predict(np.hstack([x, x])), single.predict(x), atol=1e-6))
        with self.assertRaises(SingularSystem):
            fit_linreg(Dataset(X=np.hstack([x, x]), y=y), ridge_lambda=0.0)

    def test_gradient_vanishes(self) -> None:
        rng = np.random.default_rng(2)
        X = rng.normal(size=(120, 4))
        y = X @ np.array([1.0, -2.0, 0.5, 3.0]) + 7.0 + rng.normal(0, 0.3, size=120)
        for lam in (0.0, 0.5, 10.0):
            model = fit_linreg(Dataset(X=X, y=y), ridge_lambda=lam)
            grad = ridge_gradient(model, X, y)
            scale = np.linalg.norm(2.0 * X.T @ y)
            self.assertLess(np.linalg.norm(grad) / scale, 1e-6)

    def test_empty(self) -> None:
        with self.assertRaises(EmptyTraining):
            fit_linreg(Dataset(X=np.zeros((0, 2)), y=np.zeros(0)))


class TestTreesAndForest(unittest.TestCase):
    def _blobs(self) -> Dataset:
        rng = np.random.default_rng(4)
        X = np.vstack([rng.normal(0.0, 0.5, size=(100, 2)), rng.normal(5.0, 0.5, size=(100, 2))])
        y = np.repeat([0, 1], 100)
        return Dataset(X=X, y=y)

    def test_single_tree(self) -> None:
        ds = self._blobs()
        tree = fit_tree(ds.X, ds.y, TreeParams())
        self.assertEqual(accuracy(ds.y, tree.predict(ds.X)), 1.0)
        x = np.linspace(-1, 1, 200)
        step = np.where(x < 0, 0.0, 10.0)
        reg = fit_tree(x.reshape(-1, 1), step, TreeParams(criterion="mse", max_depth=2))
        self.assertLess(mae(step, reg.predict(x.reshape(-1, 1))), 1e-9)

    def test_separable_blobs(self) -> None:
        ds = self._blobs()
        model = fit_forest(ds, "classify", ForestParams(n_trees=25, seed=1))
        self.assertEqual(accuracy(ds.y, predict_forest(model, ds.X)), 1.0)
        proba = predict_forest_proba(model, ds.X)
        self.assertTrue(np.allclose(proba.sum(axis=1), 1.0))

    def test_single_class_is_constant(self) -> None:
        ds = Dataset(X=np.random.default_rng(0).normal(size=(20, 3)), y=np.full(20, 1.0))
        model = fit_forest(ds, "classify")
        self.assertEqual(model.trees, [])
        self.assertEqual(predict_forest(model, ds.X).tolist(), [1.0] * 20)

    def test_xor_needs_interactions(self) -> None:
        X, y = _xor(0.02, seed=9)
        model = fit_forest(Dataset(X=X, y=y), "classify", ForestParams(n_trees=50, seed=3))
        self.assertGreaterEqual(accuracy(y, predict_forest(model, X)), 0.95)
        X0, y0 = _xor(0.0, seed=0)
        linear = fit_linreg(Dataset(X=X0, y=y0.astype(float)), ridge_lambda=1.0)
        self.assertLessEqual(accuracy(y0, (linear.predict(X0) > 0.5).astype(int)), 0.6)

    def test_seed_determinism(self) -> None:
        ds = self._blobs()
        a = fit_forest(ds, "classify", ForestParams(n_trees=10, seed=5))
        b = fit_forest(ds, "classify", ForestParams(n_trees=10, seed=5))
        c = fit_forest(ds, "classify", ForestParams(n_trees=10, seed=6))
        parallel = fit_forest(ds, "classify", ForestParams(n_trees=10, seed=5, n_jobs=2))
        self.assertEqual(dumps_model(a), dumps_model(b))
        self.assertEqual(dumps_model(a), dumps_model(parallel))
        self.assertNotEqual(dumps_model(a), dumps_model(c))


class TestEnsembleRegressor(unittest.TestCase):
    def _data(self, fn, seed: int = 0, noise: float = 0.0) -> tuple[Dataset, Dataset]:
        rng = np.random.default_rng(seed)
        x = rng.uniform(-1, 1, size=(400, 1))
        y = fn(x[:, 0]) + (rng.normal(0, noise, size=400) if noise else 0.0)
        return Dataset(X=x[:300], y=y[:300]), Dataset(X=x[300:], y=y[300:])

    def test_step_beats_linear(self) -> None:
        train, test = self._data(lambda v: np.where(v < 0.2, 0.0, 10.0))
        lin = mae(test.y, fit_linreg(train).predict(test.X))
        ens = mae(test.y, fit_tree_ensemble_regressor(train).predict(test.X))
        self.assertLess(ens, 0.5 * lin)

    def test_linear_target_sanity(self) -> None:
        train, test = self._data(lambda v: 3.0 * v + 1.0, seed=1, noise=0.1)
        lin = mae(test.y, fit_linreg(train).predict(test.X))
        ens = mae(test.y, fit_tree_ensemble_regressor(train).predict(test.X))
        self.assertLess(ens, 2.0 * lin)

    def test_constant_target(self) -> None:
        train, test = self._data(lambda v: np.full_like(v, 3.0))
        for params in (BoostingParams(), BoostingParams(init="mean"), BoostingParams(kind="forest", forest=ForestParams(n_trees=5))):
            model = fit_tree_ensemble_regressor(train, params)
            self.assertLess(mae(test.y, model.predict(test.X)), 1e-9)


class TestIsolationForest(unittest.TestCase):
    def test_average_path_length(self) -> None:
        self.assertEqual(average_path_length(1), 0.0)
        self.assertAlmostEqual(average_path_length(2), 1.0)
        self.assertAlmostEqual(average_path_length(3), 2 * 1.5 - 2 * 2 / 3)

    def test_outlier_scores_high(self) -> None:
        rng = np.random.default_rng(7)
        inliers = rng.normal(0.0, 0.1, size=(200, 2))
        X = np.vstack([inliers, [[8.0, 8.0]]])
        model = fit_iforest(X, IForestParams(n_trees=100, seed=1))
        scores = model.score(X)
        self.assertGreater(scores[-1], np.quantile(scores[:-1], 0.95))
        self.assertTrue(((scores > 0) & (scores <= 1)).all())
        self.assertEqual(anomaly_score(model, X[3]), anomaly_score(model, X[3]))
        self.assertIsInstance(anomaly_score(model, X[3]), float)

    def test_empty(self) -> None:
        with self.assertRaises(EmptyTraining):
            fit_iforest(np.zeros((0, 3)))


class TestSerialization(unittest.TestCase):
    def test_round_trip_preserves_predictions(self) -> None:
        rng = np.random.default_rng(8)
        X = rng.normal(size=(120, 3))
        y_reg = X @ np.array([1.0, 2.0, -1.0])
        y_cls = (X[:, 0] > 0).astype(int)
        models = [
            fit_linreg(Dataset(X=X, y=y_reg)),
            fit_tree(X, y_cls),
            fit_forest(Dataset(X=X, y=y_cls), "classify", ForestParams(n_trees=5)),
            fit_tree_ensemble_regressor(Dataset(X=X, y=y_reg), BoostingParams(n_rounds=10)),
        ]
        for model in models:
            restored = loads_model(dumps_model(model))
            self.assertTrue(np.array_equal(model.predict(X), restored.predict(X)))
            self.assertEqual(dumps_model(model), dumps_model(restored))
        iforest = fit_iforest(X, IForestParams(n_trees=5))
        with tempfile.TemporaryDirectory() as d:
            path = save_model(iforest, Path(d) / "iforest.json")
            self.assertTrue(np.array_equal(iforest.score(X), load_model(path).score(X)))


if __name__ == "__main__":
    unittest.main()
