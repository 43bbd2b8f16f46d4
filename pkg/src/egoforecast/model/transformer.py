"""The cascaded cross-attention forecaster.

Three Pre-LN encoder streams (ego trajectory, neighbors, scene) feed a
cascaded cross-attention fusion; a Pre-LN decoder then rolls the future
pose track out greedily, feeding its own step outputs back.  Greedy
rollout is the forward pass in training as well as inference; the
teacher-forced path exists for causality checks only.

The decoder caches per-layer self-attention keys/values across steps,
growing them with concat nodes, so gradients flow through the cache.
"""
import numpy as np

from ..autodiff import Tensor, ops
from .config import ModelConfig, NEIGHBOR_PERSON_DIMS
from .fusion import CXAFusion
from .layers import (EncoderStream, FeedForward, LayerNorm, Linear,
                     MultiHeadAttention, causal_mask, sinusoidal_positions)
from .parameters import ParamStore


class PreLNDecoderLayer:
    """Causal self-attention, cross-attention over memory, feed-forward."""

    def __init__(self, params, name, rng, d_model, n_heads, d_ff):
        self.ln_self = LayerNorm(params, name + ".ln_self", d_model)
        self.self_attn = MultiHeadAttention(params, name + ".self_attn", rng,
                                            d_model, n_heads)
        self.ln_cross = LayerNorm(params, name + ".ln_cross", d_model)
        self.cross_attn = MultiHeadAttention(params, name + ".cross_attn", rng,
                                             d_model, n_heads)
        self.ln_ffn = LayerNorm(params, name + ".ln_ffn", d_model)
        self.ffn = FeedForward(params, name + ".ffn", rng, d_model, d_ff)

    def forward_full(self, x, memory, mask):
        h = self.ln_self(x)
        x = ops.add(x, self.self_attn(h, h, h, mask))
        h = self.ln_cross(x)
        x = ops.add(x, self.cross_attn(h, memory, memory))
        x = ops.add(x, self.ffn(self.ln_ffn(x)))
        return x

    def step(self, x_new, cache, mem_k, mem_v):
        """One autoregressive step; x_new is (B, 1, d_model).

        The fresh query attends over every cached position plus itself,
        which is exactly the causal set, so no mask is needed.
        """
        h = self.ln_self(x_new)
        q = self.self_attn.project_q(h)
        k_new = self.self_attn.project_k(h)
        v_new = self.self_attn.project_v(h)
        if cache["k"] is None:
            k, v = k_new, v_new
        else:
            k = ops.concat([cache["k"], k_new], axis=2)
            v = ops.concat([cache["v"], v_new], axis=2)
        cache["k"], cache["v"] = k, v
        x = ops.add(x_new, self.self_attn.attend(q, k, v))
        h = self.ln_cross(x)
        x = ops.add(x, self.cross_attn.attend(self.cross_attn.project_q(h),
                                              mem_k, mem_v))
        x = ops.add(x, self.ffn(self.ln_ffn(x)))
        return x


class Decoder:
    def __init__(self, params, name, rng, cfg):
        self.cfg = cfg
        self.embed = Linear(params, name + ".embed", rng, cfg.ego_dim, cfg.d_model)
        self.positions = sinusoidal_positions(cfg.t_pred, cfg.d_model)
        self.layers = [
            PreLNDecoderLayer(params, "%s.layer%d" % (name, i), rng,
                              cfg.d_model, cfg.n_heads, cfg.d_ff)
            for i in range(cfg.n_decoder_layers)
        ]
        self.final_ln = LayerNorm(params, name + ".final_ln", cfg.d_model)
        self.head = Linear(params, name + ".head", rng, cfg.d_model, cfg.ego_dim)

    def decode_greedy(self, memory, seed_pose, t_pred):
        """Greedy rollout: step i consumes the step i-1 output pose.

        memory: (B, T_obs, d_model); seed_pose: (B, 1, 7).  Returns
        (B, t_pred, 7) raw head outputs (quaternions not renormalized).
        """
        if t_pred < 1:
            raise ValueError("t_pred must be >= 1, got %d" % t_pred)
        if t_pred > self.positions.shape[0]:
            raise ValueError(
                "t_pred=%d exceeds the decoder position table (%d rows)"
                % (t_pred, self.positions.shape[0]))
        mem_k = [layer.cross_attn.project_k(memory) for layer in self.layers]
        mem_v = [layer.cross_attn.project_v(memory) for layer in self.layers]
        caches = [{"k": None, "v": None} for _ in self.layers]
        cur = seed_pose
        outs = []
        for i in range(t_pred):
            x = ops.add(self.embed(cur), Tensor(self.positions[i:i + 1]))
            for layer, cache, mk, mv in zip(self.layers, caches, mem_k, mem_v):
                x = layer.step(x, cache, mk, mv)
            pose = self.head(self.final_ln(x))
            outs.append(pose)
            cur = pose
        return ops.concat(outs, axis=1)

    def forward_teacher(self, memory, shifted_targets):
        """Parallel decoder pass over given inputs, causally masked.

        Used by causality tests; training uses greedy rollout.
        """
        t = shifted_targets.shape[1]
        x = ops.add(self.embed(shifted_targets), Tensor(self.positions[:t]))
        mask = causal_mask(t)
        for layer in self.layers:
            x = layer.forward_full(x, memory, mask)
        return self.head(self.final_ln(x))


class CXATransformer:
    kind = "cxa"

    def __init__(self, config: ModelConfig, seed=0):
        config.validate()
        self.config = config
        self.params = ParamStore()
        rng = np.random.default_rng(seed)

        self.enc_y = EncoderStream(self.params, "enc_y", rng, "Y",
                                   config.ego_dim, config)
        nb, sc = config.neighbor_mode, config.scene_mode
        self.enc_n = None
        if nb is not None:
            self.enc_n = EncoderStream(self.params, "enc_n", rng, nb,
                                       config.neighbor_dim, config)
        self.enc_s = None
        if sc is not None:
            self.enc_s = EncoderStream(self.params, "enc_s", rng, sc,
                                       config.scene_dim, config)
        n_stages = (self.enc_n is not None) + (self.enc_s is not None)
        self.fusion = CXAFusion(self.params, "fusion", rng,
                                config.d_model, config.n_heads, n_stages)
        self.decoder = Decoder(self.params, "decoder", rng, config)

    def encode(self, inputs):
        """Encode active streams and fuse them; returns (B, T_obs, d)."""
        ego = inputs.get("ego")
        if ego is None:
            raise ValueError("missing modality 'Y' (ego trajectory input)")
        e_y = self.enc_y(ego)
        others = []
        if self.enc_n is not None:
            x = inputs.get("neighbors")
            if x is None:
                raise ValueError(
                    "missing modality %r (neighbor input)"
                    % self.config.neighbor_mode)
            others.append(self.enc_n(x))
        if self.enc_s is not None:
            x = inputs.get("scene")
            if x is None:
                raise ValueError(
                    "missing modality %r (scene input)" % self.config.scene_mode)
            others.append(self.enc_s(x))
        return self.fusion(e_y, others)

    def forward_batch(self, inputs, t_pred=None):
        """inputs: dict of (B, T_obs, d) Tensors -> (B, t_pred, 7)."""
        memory = self.encode(inputs)
        ego = inputs["ego"]
        seed_pose = ops.narrow(ego, 1, self.config.t_obs - 1, 1)
        if t_pred is None:
            t_pred = self.config.t_pred
        return self.decoder.decode_greedy(memory, seed_pose, t_pred)

    def predict(self, sample_inputs):
        """Single-sample convenience: numpy dict in, (t_pred, 7) numpy out."""
        tensors = {}
        for key, arr in sample_inputs.items():
            if arr is None:
                continue
            a = np.asarray(arr, dtype=np.float64)
            tensors[key] = Tensor(a[None, :, :])
        out = self.forward_batch(tensors)
        return out.data[0]
