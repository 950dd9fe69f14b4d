import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from wlembed import autodiff as ad
from wlembed.analysis import (Metrics, cwl_weight_magnitudes, mae, roc_auc, shuffle_importance)
from wlembed.embedding import CwlParams, EmbeddingTable
from wlembed.errors import (EmptyInputError, LengthMismatch, ShufflePoolTooSmall, SingleClass,
                            WrongEmbeddingVariant)
from wlembed.graph import DatasetRecord, build_graph
from wlembed.nn import ModelSpec, TrainConfig, train

from conftest import random_graph


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
    return total / (len(pos) * len(neg))


def test_mae_examples():
    assert mae([1, 2], [1, 2]) == 0
    assert mae([0], [3]) == 3
    assert mae([1, 2, 4], [2, 2, 1]) == pytest.approx(4 / 3)
    with pytest.raises(LengthMismatch):
        mae([1], [1, 2])
    with pytest.raises(EmptyInputError):
        mae([], [])


def test_auc_examples():
    assert roc_auc([0.9, 0.1], [1, 0]) == 1.0
    assert roc_auc([0.3, 0.3, 0.3], [1, 0, 1]) == 0.5
    assert roc_auc([0.8, 0.6, 0.4], [1, 0, 1]) == 0.5
    with pytest.raises(SingleClass):
        roc_auc([0.1, 0.2], [1, 1])


labelled = st.lists(st.tuples(st.integers(-5, 5).map(float), st.integers(0, 1)), min_size=2, max_size=30)


@settings(max_examples=200)
@given(labelled)
def test_auc_matches_pair_count(data):
    scores, labels = zip(*data)
    assume(0 < sum(labels) < len(labels))
    assert roc_auc(scores, labels) == pytest.approx(pairwise_auc(scores, labels))


@settings(max_examples=100)
@given(labelled)
def test_auc_monotone_invariance_and_negation(data):
    scores, labels = zip(*data)
    assume(0 < sum(labels) < len(labels))
    s = np.array(scores)
    a = roc_auc(s, labels)
    assert roc_auc(np.exp(s / 3) + 2, labels) == pytest.approx(a)
    assert 0.0 <= a <= 1.0
    if len(set(scores)) == len(scores):
        assert roc_auc(-s, labels) == pytest.approx(1 - a)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=20))
def test_mae_symmetric(pairs):
    p, t = zip(*pairs)
    assert mae(p, t) == mae(t, p) >= 0


def test_metrics_summary():
    m = Metrics("classification", [0.5, 0.7])
    assert m.name == "roc_auc" and m.mean == pytest.approx(0.6) and m.std == pytest.approx(0.1)
    assert Metrics("regression", [1.0]).std == 0.0


def test_weight_magnitude_examples():
    d = 3
    zero = CwlParams(EmbeddingTable.from_array(np.ones((3, d))), EmbeddingTable.from_array(np.ones((4, d))),
                     ad.parameter(np.zeros((d, 2 * d))))
    rep = cwl_weight_magnitudes(zero)
    assert not rep.magnitude.any()
    rows = np.vstack([np.zeros(d), np.eye(d)])  # UNKNOWN row then unit-norm rows
    ident = CwlParams(EmbeddingTable.from_array(rows), EmbeddingTable.from_array(rows),
                      ad.parameter(np.hstack([np.eye(d), np.zeros((d, d))])))
    rep = cwl_weight_magnitudes(ident)
    np.testing.assert_allclose(rep.magnitude[:, :d], np.eye(d))
    assert rep.left_mean == pytest.approx(1 / d)
    assert rep.right_mean == 0.0


def _records(n=30, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        g = random_graph(rng, K=3, n_min=3)
        out.append(DatasetRecord(g, int(sum(g.degrees) > 2 * g.num_nodes)))
    return out


def test_shuffle_requires_cwl():
    recs = _records()
    model = train(ModelSpec("wl", 1, 4), recs, TrainConfig(epochs=1)).model
    with pytest.raises(WrongEmbeddingVariant):
        shuffle_importance(model, recs, "atom", np.random.default_rng(0))
    with pytest.raises(WrongEmbeddingVariant):
        cwl_weight_magnitudes(model)


def test_shuffle_pool_too_small():
    recs = [DatasetRecord(build_graph(2, [1, 1], [(0, 1)], K=1), 0),
            DatasetRecord(build_graph(3, [1, 1, 1], [(0, 1), (1, 2)], K=1), 1)]
    model = train(ModelSpec("cwl", 1, 2), recs, TrainConfig(epochs=1)).model
    # only one atom label exists
    with pytest.raises(ShufflePoolTooSmall):
        shuffle_importance(model, recs, "atom", np.random.default_rng(0))
    res = shuffle_importance(model, recs, "nl", np.random.default_rng(0))
    assert 0.0 <= res.shuffled <= 1.0


def test_shuffle_leaves_model_untouched():
    recs = _records()
    model = train(ModelSpec("cwl", 1, 4), recs, TrainConfig(epochs=3)).model
    before = {k: v.data.copy() for k, v in model.named_parameters().items()}
    J = (model.encoder.atoms.J, model.encoder.hoods.J)
    for mode in ("atom", "nl"):
        res = shuffle_importance(model, recs, mode, np.random.default_rng(1))
        assert res.delta == pytest.approx(res.shuffled - res.base)
    for k, v in model.named_parameters().items():
        np.testing.assert_array_equal(v.data, before[k])
    assert J == (model.encoder.atoms.J, model.encoder.hoods.J)


@pytest.mark.slow
def test_trained_cwl_leans_on_neighborhood():
    # detection graphs: perturbing the neighborhood label costs at least as much as the atom label
    from wlembed.experiments import load_or_generate
    recs = load_or_generate("detection", 0, 0)
    model = train(ModelSpec("cwl", 2, 32), recs, TrainConfig(alpha=0.01, epochs=100, seed=0)).model
    atom = shuffle_importance(model, recs, "atom", np.random.default_rng(0))
    nl = shuffle_importance(model, recs, "nl", np.random.default_rng(0))
    assert nl.delta <= atom.delta
    w = cwl_weight_magnitudes(model)
    assert w.left_mean > 0 and w.right_mean > 0
