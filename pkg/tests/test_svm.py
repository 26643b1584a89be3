import numpy as np
import pytest

from roomrec.errors import ConfigurationError, ShapeError
from roomrec.svm import (
    KKT_TOL,
    KernelConfig,
    SvmModel,
    kernel_matrix,
    svm_predict,
    svm_train,
)


def blobs(centers, per_class=25, spread=0.15, seed=0):
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for ci, c in enumerate(centers):
        xs.append(np.asarray(c) + spread * rng.normal(size=(per_class, len(c))))
        ys += [ci] * per_class
    return np.vstack(xs), np.asarray(ys)


class TestKernelMatrix:
    def test_linear_is_gram(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(6, 3))
        assert np.allclose(kernel_matrix(a, a, KernelConfig(kind="linear")), a @ a.T)

    def test_rbf_diagonal_is_one(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(8, 4))
        k = kernel_matrix(a, a, KernelConfig())
        assert np.allclose(np.diag(k), 1.0)

    def test_rbf_matches_formula(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(5, 4))
        b = rng.normal(size=(7, 4))
        cfg = KernelConfig(gamma=0.3)
        k = kernel_matrix(a, b, cfg)
        for i in range(5):
            for j in range(7):
                want = np.exp(-0.3 * np.sum((a[i] - b[j]) ** 2))
                assert abs(k[i, j] - want) < 1e-12

    def test_default_gamma_is_inverse_feature_count(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(5, 10))
        assert np.allclose(kernel_matrix(a, a, KernelConfig()),
                           kernel_matrix(a, a, KernelConfig(gamma=0.1)))

    def test_rbf_positive_semidefinite(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(20, 6))
        k = kernel_matrix(a, a, KernelConfig())
        eig = np.linalg.eigvalsh(k)
        assert eig.min() > -1e-10

    def test_bad_kernel_rejected(self):
        with pytest.raises(ConfigurationError):
            KernelConfig(kind="poly")
        with pytest.raises(ConfigurationError):
            KernelConfig(C=0.0)


class TestBinaryTraining:
    def test_separable_blobs(self):
        x, y = blobs([(0, 0), (3, 3)])
        model = svm_train(x, y)
        assert np.mean(svm_predict(model, x) == y) == 1.0

    def test_kkt_conditions_hold(self):
        x, y = blobs([(0, 0), (2.5, 2.5)], seed=6)
        cfg = KernelConfig()
        model = svm_train(x, y, kernel=cfg)
        m = model.machines[0]
        c = cfg.C
        # box constraint
        assert np.all(m.alphas > 0) and np.all(m.alphas <= c + 1e-9)
        # margin conditions on the support set: free SVs sit on the margin,
        # bounded SVs inside or beyond it
        decisions = m.decision(m.support_vectors, cfg)
        margins = m.sv_labels * decisions
        free = m.alphas < c - 1e-9
        tol = 10 * KKT_TOL
        assert np.all(np.abs(margins[free] - 1.0) < tol)
        assert np.all(margins[~free] <= 1.0 + tol)

    def test_duplicate_training_points_harmless(self):
        x, y = blobs([(0, 0), (3, 0)], per_class=15, seed=7)
        x2 = np.vstack([x, x[:5]])
        y2 = np.concatenate([y, y[:5]])
        model = svm_train(x2, y2)
        assert np.mean(svm_predict(model, x) == y) == 1.0


class TestMulticlass:
    def test_three_blobs(self):
        x, y = blobs([(0, 0), (4, 0), (0, 4)], seed=8)
        model = svm_train(x, y)
        assert len(model.machines) == 3  # one machine per class pair
        assert np.mean(svm_predict(model, x) == y) == 1.0

    def test_single_sample_prediction(self):
        x, y = blobs([(0, 0), (4, 0), (0, 4)], seed=9)
        model = svm_train(x, y)
        pred = svm_predict(model, x[0])
        assert isinstance(pred, int)
        assert pred == 0

    def test_deterministic_given_seed(self):
        x, y = blobs([(0, 0), (3, 3), (3, -3)], seed=10)
        m1 = svm_train(x, y, seed=5)
        m2 = svm_train(x, y, seed=5)
        assert m1.to_json() == m2.to_json()

    def test_feature_length_mismatch_rejected(self):
        x, y = blobs([(0, 0), (3, 3)])
        model = svm_train(x, y)
        with pytest.raises(ShapeError):
            svm_predict(model, np.zeros((2, 5)))

    def test_single_class_rejected(self):
        with pytest.raises(ConfigurationError):
            svm_train(np.zeros((5, 2)), np.zeros(5, dtype=int))


class TestSerialization:
    def test_json_round_trip(self):
        x, y = blobs([(0, 0), (4, 0), (0, 4)], seed=11)
        model = svm_train(x, y)
        back = SvmModel.from_json(model.to_json())
        assert np.array_equal(svm_predict(back, x), svm_predict(model, x))
        assert back.num_classes == 3
        assert back.kernel.C == 1.0
