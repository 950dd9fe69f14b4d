import numpy as np
import pytest

from wlembed import autodiff as ad
from wlembed.errors import DimensionMismatch, NonScalarOutput

from gradcheck import checked_error, max_relative_error


def test_simple_gradients():
    x = ad.parameter([[1.0, -2.0], [3.0, 0.5]])
    w = ad.parameter([[2.0], [1.0]])
    loss = ad.total(ad.square(x @ w))
    gx, gw = ad.gradient_of(loss, [x, w])
    y = x.data @ w.data
    np.testing.assert_allclose(gx, 2 * y @ w.data.T)
    np.testing.assert_allclose(gw, x.data.T @ (2 * y))


def test_shared_node_accumulates():
    x = ad.parameter([2.0])
    y = x * x + x
    (g,) = ad.gradient_of(ad.total(y), [x])
    assert g[0] == pytest.approx(5.0)


def test_broadcast_add_unbroadcasts():
    x = ad.parameter(np.ones((3, 2)))
    b = ad.parameter(np.zeros(2))
    gx, gb = ad.gradient_of(ad.total(x + b), [x, b])
    np.testing.assert_array_equal(gb, [3.0, 3.0])


def test_unreached_parameter_gets_zero():
    x = ad.parameter([1.0, 2.0])
    z = ad.parameter([[5.0]])
    gx, gz = ad.gradient_of(ad.total(x), [x, z])
    assert gz.shape == (1, 1) and not gz.any()


def test_non_scalar_output_rejected():
    x = ad.parameter([1.0, 2.0])
    with pytest.raises(NonScalarOutput):
        ad.gradient_of(x * 2.0, [x])


def test_matmul_shape_error():
    with pytest.raises(DimensionMismatch):
        ad.matmul(ad.parameter(np.ones((2, 3))), ad.parameter(np.ones((2, 3))))


def test_sigmoid_is_stable():
    out = ad.sigmoid(ad.parameter([-1000.0, 0.0, 1000.0])).data
    np.testing.assert_allclose(out, [0.0, 0.5, 1.0])


def test_cross_entropy_matches_log_softmax():
    logits = np.array([[2.0, -1.0], [0.3, 0.3]])
    loss = ad.softmax_cross_entropy(ad.parameter(logits), [0, 1]).data
    lp = logits - np.log(np.exp(logits).sum(1, keepdims=True))
    assert float(loss) == pytest.approx(-(lp[0, 0] + lp[1, 1]) / 2)


def test_spmm_and_segment_sum_grads(rng):
    A = ad.CsrMatrix.from_dense(rng.normal(size=(4, 3)) * (rng.random((4, 3)) < 0.6))
    x = ad.parameter(rng.normal(size=(3, 2)))

    def loss():
        return ad.total(ad.square(ad.segment_sum(ad.spmm(A, x), [0, 1, 1, 0], 2)))

    assert max_relative_error(loss, [x]) < 1e-6


def test_gather_rows_repeated_indices(rng):
    table = ad.parameter(rng.normal(size=(4, 2)))
    idx = np.array([1, 1, 3])
    (g,) = ad.gradient_of(ad.total(ad.gather_rows(table, idx)), [table])
    np.testing.assert_array_equal(g[:, 0], [0, 2, 0, 1])


def test_random_graphs_small_sample():
    rng = np.random.default_rng(7)
    for _ in range(20):
        assert checked_error(rng) < 1e-4
