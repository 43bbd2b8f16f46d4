"""Multi-head attention against an independent straight-line reference."""
import numpy as np
import pytest

from egoforecast.autodiff import Tensor, ops
from egoforecast.model.layers import (MASK_VALUE, MultiHeadAttention,
                                      causal_mask, sinusoidal_positions)
from egoforecast.model.parameters import ParamStore

from oracles import mha_np


def _build(d_model, n_heads, seed):
    params = ParamStore()
    rng = np.random.default_rng(seed)
    return MultiHeadAttention(params, "attn", rng, d_model, n_heads)


@pytest.mark.parametrize("d_model,n_heads,tq,tk", [
    (8, 1, 3, 3),
    (8, 2, 3, 4),
    (16, 4, 4, 2),
    (6, 3, 2, 5),
])
def test_matches_straight_line_reference(d_model, n_heads, tq, tk):
    attn = _build(d_model, n_heads, seed=d_model + n_heads)
    rng = np.random.default_rng(42)
    xq = rng.standard_normal((tq, d_model))
    xkv = rng.standard_normal((tk, d_model))
    got = attn(Tensor(xq), Tensor(xkv), Tensor(xkv)).data
    want = mha_np(xq, xkv, xkv, attn.wq.data, attn.wk.data, attn.wv.data,
                  attn.wo.data, n_heads)
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-10)


def test_batched_equals_per_sample():
    attn = _build(8, 2, seed=0)
    rng = np.random.default_rng(1)
    x = rng.standard_normal((3, 4, 8))
    batched = attn(Tensor(x), Tensor(x), Tensor(x)).data
    for b in range(3):
        single = attn(Tensor(x[b]), Tensor(x[b]), Tensor(x[b])).data
        np.testing.assert_allclose(batched[b], single, rtol=0, atol=1e-12)


def test_masked_positions_get_exact_zero_weight():
    # a masked score of MASK_VALUE must vanish entirely after the
    # shifted softmax, not merely become small
    attn = _build(4, 1, seed=3)
    rng = np.random.default_rng(4)
    x = rng.standard_normal((1, 3, 4))
    q = attn.project_q(Tensor(x))
    k = attn.project_k(Tensor(x))
    scores = ops.scale(ops.matmul(q, ops.transpose(k)), 0.5)
    mask = causal_mask(3)
    masked = ops.add(scores, Tensor(mask))
    weights = ops.softmax_rows(masked).data
    assert weights[0, 0, 0, 1] == 0.0
    assert weights[0, 0, 0, 2] == 0.0
    assert weights[0, 0, 1, 2] == 0.0
    np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-12)


def test_causal_mask_layout():
    m = causal_mask(4)
    assert m.shape == (4, 4)
    assert np.all(np.triu(np.ones((4, 4)), k=1).astype(bool) == (m == MASK_VALUE))
    assert np.all(m[np.tril_indices(4)] == 0.0)


def test_mask_shape_mismatch_raises():
    attn = _build(4, 1, seed=5)
    x = Tensor(np.zeros((1, 3, 4)))
    with pytest.raises(ops.ShapeError):
        attn(x, x, x, mask=np.zeros((2, 2)))


def test_sinusoidal_position_row0():
    pos = sinusoidal_positions(5, 8)
    np.testing.assert_array_equal(pos[0], [0, 1, 0, 1, 0, 1, 0, 1])
    assert pos.shape == (5, 8)
    # interleaved sine and cosine share one frequency per pair
    np.testing.assert_allclose(pos[:, 0] ** 2 + pos[:, 1] ** 2, 1.0,
                               atol=1e-12)
