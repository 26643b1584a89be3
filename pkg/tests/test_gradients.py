"""Finite-difference checks for every backward pass.

All checks run in float64 with central differences (h = 1e-5) and require
relative error below 1e-4 against the analytic gradients.
"""
import numpy as np
import pytest

from roomrec.nn import ops
from roomrec.nn.arch import build_named_arch
from roomrec.nn.model import forward, init_params, loss_and_grads

H = 1e-5
REL_TOL = 1e-4


def rel_err(a, b):
    denom = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-12)
    return np.max(np.abs(a - b)) / denom


def numeric_grad(f, x):
    x = x.astype(np.float64)
    g = np.zeros_like(x)
    flat = x.ravel()
    gflat = g.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + H
        fp = f(x)
        flat[i] = orig - H
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2 * H)
    return g


class TestLayerGradients:
    def test_conv2d(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=(2, 5, 4, 2))
        filters = rng.normal(size=(3, 3, 2, 3))
        bias = rng.normal(size=3)
        up = rng.normal(size=(2, 5, 4, 3))  # fixed upstream cotangent

        def loss_x(xv):
            y, _ = ops.conv2d_forward(xv, filters, bias)
            return np.sum(y * up)

        def loss_f(fv):
            y, _ = ops.conv2d_forward(x, fv, bias)
            return np.sum(y * up)

        def loss_b(bv):
            y, _ = ops.conv2d_forward(x, filters, bv)
            return np.sum(y * up)

        _, cache = ops.conv2d_forward(x, filters, bias)
        dx, df, db = ops.conv2d_backward(up, cache, filters)
        assert rel_err(dx, numeric_grad(loss_x, x.copy())) < REL_TOL
        assert rel_err(df, numeric_grad(loss_f, filters.copy())) < REL_TOL
        assert rel_err(db, numeric_grad(loss_b, bias.copy())) < REL_TOL

    def test_maxpool(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(2, 6, 4, 3))
        up = rng.normal(size=(2, 3, 2, 3))

        def loss_x(xv):
            y, _ = ops.maxpool_forward(xv, (2, 2))
            return np.sum(y * up)

        _, cache = ops.maxpool_forward(x, (2, 2))
        dx = ops.maxpool_backward(up, cache)
        assert rel_err(dx, numeric_grad(loss_x, x.copy())) < REL_TOL

    def test_relu(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=(4, 7)) + 0.05  # stay away from the kink
        up = rng.normal(size=(4, 7))
        dx = ops.relu_backward(up, x)
        assert rel_err(dx, numeric_grad(lambda v: np.sum(ops.relu(v) * up), x.copy())) < REL_TOL

    def test_dense(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(3, 6))
        w = rng.normal(size=(4, 6))
        b = rng.normal(size=4)
        up = rng.normal(size=(3, 4))
        dx, dw, db = ops.dense_backward(up, x, w)
        assert rel_err(dx, numeric_grad(lambda v: np.sum(ops.dense(v, w, b) * up), x.copy())) < REL_TOL
        assert rel_err(dw, numeric_grad(lambda v: np.sum(ops.dense(x, v, b) * up), w.copy())) < REL_TOL
        assert rel_err(db, numeric_grad(lambda v: np.sum(ops.dense(x, w, v) * up), b.copy())) < REL_TOL

    def test_dropout(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(5, 8))
        up = rng.normal(size=(5, 8))
        _, mask = ops.dropout_forward(x, 0.4, training=True,
                                      rng=np.random.default_rng(7))
        dx = ops.dropout_backward(up, mask)

        def loss_x(xv):
            y, _ = ops.dropout_forward(xv, 0.4, training=True,
                                       rng=np.random.default_rng(7))
            return np.sum(y * up)

        assert rel_err(dx, numeric_grad(loss_x, x.copy())) < REL_TOL

    def test_softmax_xent(self):
        rng = np.random.default_rng(5)
        logits = rng.normal(size=(4, 6))
        labels = np.array([1, 0, 5, 3])
        _, probs = ops.softmax_xent(logits, labels)
        g = ops.softmax_xent_backward(probs, labels)
        num = numeric_grad(lambda v: ops.softmax_xent(v, labels)[0], logits.copy())
        assert rel_err(g, num) < REL_TOL


class TestWholeNetworkGradients:
    """Spot-check the composed backward pass against central differences.

    Per parameter tensor, 24 randomly chosen coordinates are perturbed; every
    tensor in the network is covered.
    """

    @pytest.mark.parametrize("name,shape", [
        ("CNN-C", (32, 5, 1)),
        ("DNN-spec", (32, 5, 1)),
        ("CNN-psd", (1, 147, 1)),
    ])
    def test_end_to_end(self, name, shape):
        rng = np.random.default_rng(11)
        arch = build_named_arch(name, 3)
        params = init_params(arch, np.random.default_rng(9), dtype=np.float64)
        x = rng.normal(size=(2,) + shape)
        y = np.array([0, 2])
        # dropout off: its mask would differ between the two f(x +/- h) calls
        _, grads = loss_and_grads(arch, params, x, y, training=False)

        def loss_now():
            logits, _ = forward(arch, params, x, training=False)
            return ops.softmax_xent(logits, y)[0]

        pick = np.random.default_rng(5)
        for tname, g in grads.items():
            tensor = params[tname]
            flat = tensor.ravel()
            coords = pick.choice(flat.size, size=min(24, flat.size), replace=False)
            analytic = g.ravel()[coords]
            numeric = np.empty(len(coords))
            for ci, i in enumerate(coords):
                orig = flat[i]
                flat[i] = orig + H
                fp = loss_now()
                flat[i] = orig - H
                fm = loss_now()
                flat[i] = orig
                numeric[ci] = (fp - fm) / (2 * H)
            assert rel_err(analytic, numeric) < REL_TOL, (name, tname)
