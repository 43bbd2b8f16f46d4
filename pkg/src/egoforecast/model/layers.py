"""Transformer building blocks: attention, Pre-LN layers, positions.

All modules work on batched activations shaped (B, T, d_model); 2D
inputs (T, d) are lifted to a batch of one and squeezed back.  Masks
are additive: 0 where attention is allowed, a large negative constant
where it is blocked, which underflows to an exact zero weight after
the shifted softmax.
"""
import numpy as np

from ..autodiff import Tensor, ops
from .parameters import uniform_init

# Additive pre-softmax penalty for blocked positions. After row-max
# subtraction exp() underflows to exactly 0.0, so masking is exact.
MASK_VALUE = -1e30


def sinusoidal_positions(t_steps, d_model):
    """Sine/cosine position table, shape (t_steps, d_model), base 10000.

    Even columns carry sin, odd columns cos, so row 0 is [0, 1, 0, 1, ...].
    """
    if t_steps < 1:
        raise ValueError("need at least one position, got %d" % t_steps)
    pos = np.arange(t_steps)[:, None]
    idx = np.arange(d_model)[None, :]
    angle = pos / np.power(10000.0, (2.0 * (idx // 2)) / d_model)
    table = np.empty((t_steps, d_model))
    table[:, 0::2] = np.sin(angle[:, 0::2])
    table[:, 1::2] = np.cos(angle[:, 1::2])
    return table


def causal_mask(t):
    """(t, t) additive mask hiding strictly-future positions."""
    m = np.zeros((t, t))
    m[np.triu_indices(t, k=1)] = MASK_VALUE
    return m


class Linear:
    def __init__(self, params, name, rng, d_in, d_out, bias=True):
        self.w = params.add(name + ".w", uniform_init(rng, (d_in, d_out), d_in))
        self.b = params.add(name + ".b", np.zeros(d_out)) if bias else None

    def __call__(self, x):
        return ops.linear(x, self.w, self.b)


class LayerNorm:
    def __init__(self, params, name, d):
        self.gain = params.add(name + ".gain", np.ones(d))
        self.bias = params.add(name + ".bias", np.zeros(d))

    def __call__(self, x):
        return ops.layer_norm(x, self.gain, self.bias)


class MultiHeadAttention:
    """Scaled dot-product attention with n_heads heads.

    Query/key/value projections carry no bias; heads are concatenated
    and passed through an output projection.  ``project_k``/``attend``
    are exposed separately so the decoder can cache keys and values
    across autoregressive steps.
    """

    def __init__(self, params, name, rng, d_model, n_heads):
        if d_model % n_heads != 0:
            raise ValueError(
                "d_model=%d not divisible by n_heads=%d" % (d_model, n_heads))
        self.d_model = d_model
        self.n_heads = n_heads
        self.d_k = d_model // n_heads
        self.wq = params.add(name + ".wq", uniform_init(rng, (d_model, d_model), d_model))
        self.wk = params.add(name + ".wk", uniform_init(rng, (d_model, d_model), d_model))
        self.wv = params.add(name + ".wv", uniform_init(rng, (d_model, d_model), d_model))
        self.wo = params.add(name + ".wo", uniform_init(rng, (d_model, d_model), d_model))

    def _split(self, x):
        # (B, T, d_model) -> (B, h, T, d_k)
        b, t, _ = x.shape
        x = ops.reshape(x, (b, t, self.n_heads, self.d_k))
        return ops.transpose(x, (0, 2, 1, 3))

    def project_q(self, x):
        return self._split(ops.matmul(x, self.wq))

    def project_k(self, x):
        return self._split(ops.matmul(x, self.wk))

    def project_v(self, x):
        return self._split(ops.matmul(x, self.wv))

    def attend(self, q, k, v, mask=None):
        """q: (B,h,Tq,dk); k, v: (B,h,Tk,dk) -> (B,Tq,d_model)."""
        tq, tk = q.shape[2], k.shape[2]
        scores = ops.scale(ops.matmul(q, ops.transpose(k)), 1.0 / np.sqrt(self.d_k))
        if mask is not None:
            mask = np.asarray(mask, dtype=np.float64)
            if mask.shape != (tq, tk):
                raise ops.ShapeError(
                    "attention mask shape %r does not match (%d, %d)"
                    % (mask.shape, tq, tk))
            scores = ops.add(scores, Tensor(mask))
        weights = ops.softmax_rows(scores)
        ctx = ops.matmul(weights, v)                     # (B, h, Tq, dk)
        b = ctx.shape[0]
        ctx = ops.transpose(ctx, (0, 2, 1, 3))
        ctx = ops.reshape(ctx, (b, tq, self.d_model))
        return ops.matmul(ctx, self.wo)

    def __call__(self, queries_in, keys_in, values_in, mask=None):
        squeeze = queries_in.ndim == 2
        if squeeze:
            queries_in = ops.reshape(queries_in, (1,) + queries_in.shape)
            keys_in = ops.reshape(keys_in, (1,) + keys_in.shape)
            values_in = ops.reshape(values_in, (1,) + values_in.shape)
        out = self.attend(self.project_q(queries_in),
                          self.project_k(keys_in),
                          self.project_v(values_in), mask)
        if squeeze:
            out = ops.reshape(out, out.shape[1:])
        return out


class FeedForward:
    def __init__(self, params, name, rng, d_model, d_ff):
        self.lin1 = Linear(params, name + ".lin1", rng, d_model, d_ff)
        self.lin2 = Linear(params, name + ".lin2", rng, d_ff, d_model)

    def __call__(self, x):
        return self.lin2(ops.relu(self.lin1(x)))


class PreLNEncoderLayer:
    """x + SelfAttn(LN(x)), then + FFN(LN(.)); shape preserved."""

    def __init__(self, params, name, rng, d_model, n_heads, d_ff):
        self.ln1 = LayerNorm(params, name + ".ln1", d_model)
        self.attn = MultiHeadAttention(params, name + ".attn", rng, d_model, n_heads)
        self.ln2 = LayerNorm(params, name + ".ln2", d_model)
        self.ffn = FeedForward(params, name + ".ffn", rng, d_model, d_ff)

    def __call__(self, x, mask=None):
        h = self.ln1(x)
        x = ops.add(x, self.attn(h, h, h, mask))
        x = ops.add(x, self.ffn(self.ln2(x)))
        return x


class EncoderStream:
    """Embedding + positions, a stack of Pre-LN layers, final norm."""

    def __init__(self, params, name, rng, modality, d_in, cfg):
        self.modality = modality
        self.d_in = d_in
        self.embed = Linear(params, name + ".embed", rng, d_in, cfg.d_model)
        self.positions = sinusoidal_positions(cfg.t_obs, cfg.d_model)
        self.layers = [
            PreLNEncoderLayer(params, "%s.layer%d" % (name, i), rng,
                              cfg.d_model, cfg.n_heads, cfg.d_ff)
            for i in range(cfg.n_encoder_layers)
        ]
        self.final_ln = LayerNorm(params, name + ".final_ln", cfg.d_model)

    def __call__(self, x):
        squeeze = x.ndim == 2
        if squeeze:
            x = ops.reshape(x, (1,) + x.shape)
        if x.shape[-1] != self.d_in:
            raise ops.ShapeError(
                "modality %r expects input width %d, got %d"
                % (self.modality, self.d_in, x.shape[-1]))
        h = ops.add(self.embed(x), Tensor(self.positions[: x.shape[1]]))
        for layer in self.layers:
            h = layer(h)
        h = self.final_ln(h)
        if squeeze:
            h = ops.reshape(h, h.shape[1:])
        return h
