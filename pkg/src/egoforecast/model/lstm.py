"""Recurrent encoder-decoder baselines.

Two baselines share the greedy pose-feedback decoder of the main model:

* Triple-stream: one recurrent encoder per modality; the three final
  hidden states are merged by one fully-connected layer and the three
  final cells by another, giving the decoder's initial state.
* Single-stream ("LIP"): modalities are concatenated per timestep into
  one vector and consumed by a single recurrent encoder whose final
  state seeds the decoder directly.
"""
import numpy as np

from ..autodiff import Tensor, ops
from .layers import Linear
from .parameters import ParamStore, uniform_init


class LSTMCell:
    """Standard LSTM cell, gate order (input, forget, candidate, output)."""

    def __init__(self, params, name, rng, d_in, d_h):
        self.d_h = d_h
        self.wx = params.add(name + ".wx", uniform_init(rng, (d_in, 4 * d_h), d_in))
        self.wh = params.add(name + ".wh", uniform_init(rng, (d_h, 4 * d_h), d_h))
        self.b = params.add(name + ".b", np.zeros(4 * d_h))

    def __call__(self, x, h, c):
        g = ops.add(ops.add(ops.matmul(x, self.wx), ops.matmul(h, self.wh)),
                    self.b)
        d = self.d_h
        i = ops.sigmoid(ops.narrow(g, 1, 0, d))
        f = ops.sigmoid(ops.narrow(g, 1, d, d))
        cand = ops.tanh(ops.narrow(g, 1, 2 * d, d))
        o = ops.sigmoid(ops.narrow(g, 1, 3 * d, d))
        c2 = ops.add(ops.mul(f, c), ops.mul(i, cand))
        h2 = ops.mul(o, ops.tanh(c2))
        return h2, c2


def _zeros_state(batch, d_h):
    z = Tensor(np.zeros((batch, d_h)))
    return z, Tensor(np.zeros((batch, d_h)))


def _run_encoder(cell, seq, t_obs):
    """seq: (B, T_obs, d_in) -> final (h, c)."""
    b = seq.shape[0]
    h, c = _zeros_state(b, cell.d_h)
    for t in range(t_obs):
        x = ops.reshape(ops.narrow(seq, 1, t, 1), (b, seq.shape[2]))
        h, c = cell(x, h, c)
    return h, c


def _decode(cell, head, h, c, seed_pose, t_pred):
    """Greedy rollout from initial state; seed_pose is (B, 7)."""
    b = seed_pose.shape[0]
    cur = seed_pose
    outs = []
    for _ in range(t_pred):
        h, c = cell(cur, h, c)
        pose = head(h)                              # (B, 7)
        outs.append(ops.reshape(pose, (b, 1, pose.shape[1])))
        cur = pose
    return ops.concat(outs, axis=1)


class _LSTMBase:
    def _seed_pose(self, ego):
        b = ego.shape[0]
        last = ops.narrow(ego, 1, self.config.t_obs - 1, 1)
        return ops.reshape(last, (b, ego.shape[2]))

    def _require(self, inputs, key, label):
        x = inputs.get(key)
        if x is None:
            raise ValueError("missing modality %r (%s input)" % (label, key))
        return x

    def predict(self, sample_inputs):
        tensors = {}
        for key, arr in sample_inputs.items():
            if arr is None:
                continue
            tensors[key] = Tensor(np.asarray(arr, dtype=np.float64)[None, :, :])
        return self.forward_batch(tensors).data[0]


class TripleStreamLSTM(_LSTMBase):
    kind = "triple_lstm"

    def __init__(self, config, seed=0):
        config.validate()
        if config.neighbor_mode is None or config.scene_mode is None:
            raise ValueError(
                "the triple-stream baseline needs all three streams active, "
                "got modalities %r" % config.modalities)
        self.config = config
        self.params = ParamStore()
        rng = np.random.default_rng(seed)
        d_h = config.hidden
        self.enc_y = LSTMCell(self.params, "enc_y", rng, config.ego_dim, d_h)
        self.enc_n = LSTMCell(self.params, "enc_n", rng, config.neighbor_dim, d_h)
        self.enc_s = LSTMCell(self.params, "enc_s", rng, config.scene_dim, d_h)
        self.merge_h = Linear(self.params, "merge_h", rng, 3 * d_h, d_h)
        self.merge_c = Linear(self.params, "merge_c", rng, 3 * d_h, d_h)
        self.dec = LSTMCell(self.params, "dec", rng, config.ego_dim, d_h)
        self.head = Linear(self.params, "head", rng, d_h, config.ego_dim)

    def forward_batch(self, inputs, t_pred=None):
        cfg = self.config
        ego = self._require(inputs, "ego", "Y")
        nbr = self._require(inputs, "neighbors", cfg.neighbor_mode)
        scn = self._require(inputs, "scene", cfg.scene_mode)
        hy, cy = _run_encoder(self.enc_y, ego, cfg.t_obs)
        hn, cn = _run_encoder(self.enc_n, nbr, cfg.t_obs)
        hs, cs = _run_encoder(self.enc_s, scn, cfg.t_obs)
        h0 = self.merge_h(ops.concat([hy, hn, hs], axis=1))
        c0 = self.merge_c(ops.concat([cy, cn, cs], axis=1))
        return _decode(self.dec, self.head, h0, c0, self._seed_pose(ego),
                       t_pred or cfg.t_pred)


class LIPLSTM(_LSTMBase):
    kind = "lip_lstm"

    def __init__(self, config, seed=0):
        config.validate()
        self.config = config
        self.params = ParamStore()
        rng = np.random.default_rng(seed)
        d_h = config.hidden
        d_in = config.ego_dim + config.neighbor_dim
        if config.scene_mode is not None:
            d_in += config.scene_dim
        self.d_in = d_in
        self.enc = LSTMCell(self.params, "enc", rng, d_in, d_h)
        self.dec = LSTMCell(self.params, "dec", rng, config.ego_dim, d_h)
        self.head = Linear(self.params, "head", rng, d_h, config.ego_dim)

    def forward_batch(self, inputs, t_pred=None):
        cfg = self.config
        parts = [self._require(inputs, "ego", "Y")]
        if cfg.neighbor_mode is not None:
            parts.append(self._require(inputs, "neighbors", cfg.neighbor_mode))
        if cfg.scene_mode is not None:
            parts.append(self._require(inputs, "scene", cfg.scene_mode))
        seq = parts[0] if len(parts) == 1 else ops.concat(parts, axis=2)
        h, c = _run_encoder(self.enc, seq, cfg.t_obs)
        return _decode(self.dec, self.head, h, c,
                       self._seed_pose(parts[0]), t_pred or cfg.t_pred)
