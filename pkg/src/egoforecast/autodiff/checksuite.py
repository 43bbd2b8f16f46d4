"""The standard gradient verification suite.

Each case exercises one backward rule (or a small composite) on small
random tensors and compares against central finite differences.  Shared
by the command line ``gradcheck`` subcommand and the test suite, so a
broken backward rule fails both the same way.

Tolerances are per case: pure-quadratic losses (where central
differences are exact up to roundoff) get 1e-8, matrix products 1e-6,
everything else 1e-5.  ReLU probes keep inputs at least 1e-2 away from
the kink so the subgradient ambiguity never enters.
"""
from dataclasses import dataclass

import numpy as np

from . import ops
from .gradcheck import gradcheck, random_inputs
from .tensor import Tensor


@dataclass
class CheckCase:
    name: str
    max_err: float
    tol: float

    @property
    def passed(self):
        return self.max_err <= self.tol


def _case(name, fn, shapes, tol, h, seed):
    inputs = random_inputs(shapes, seed)
    if name == "relu":
        # keep probes away from the kink
        d = inputs["x"].data
        d += np.sign(d) * 1e-2
        d[np.abs(d) < 1e-2] = 1e-2
    err, _ = gradcheck(fn, inputs, h=h)
    return CheckCase(name=name, max_err=err, tol=tol)


def standard_suite(h=1e-6, seed=0):
    """Run every per-op check; returns a list of CheckCase."""
    cases = []
    add = cases.append

    add(_case("add", lambda v: ops.sum_all(ops.add(v["x"], v["y"])),
              {"x": (3, 4), "y": (3, 4)}, 1e-5, h, seed + 1))
    add(_case("add_broadcast",
              lambda v: ops.sum_all(ops.mul(ops.add(v["x"], v["b"]), v["x"])),
              {"x": (3, 4), "b": (4,)}, 1e-5, h, seed + 2))
    add(_case("sub", lambda v: ops.sum_all(ops.mul(ops.sub(v["x"], v["y"]),
                                                   ops.sub(v["x"], v["y"]))),
              {"x": (3, 4), "y": (3, 4)}, 1e-5, h, seed + 3))
    add(_case("mul", lambda v: ops.sum_all(ops.mul(v["x"], v["y"])),
              {"x": (2, 5), "y": (2, 5)}, 1e-5, h, seed + 4))
    add(_case("scale", lambda v: ops.sum_all(ops.scale(ops.mul(v["x"], v["x"]),
                                                       1.7)),
              {"x": (4, 3)}, 1e-5, h, seed + 5))
    add(_case("neg", lambda v: ops.sum_all(ops.mul(ops.neg(v["x"]), v["x"])),
              {"x": (6,)}, 1e-5, h, seed + 6))
    add(_case("matmul", lambda v: ops.sum_all(ops.matmul(v["a"], v["b"])),
              {"a": (3, 4), "b": (4, 2)}, 1e-6, h, seed + 7))
    add(_case("matmul_batched",
              lambda v: ops.sum_all(ops.mul(ops.matmul(v["a"], v["b"]),
                                            ops.matmul(v["a"], v["b"]))),
              {"a": (2, 3, 4), "b": (2, 4, 2)}, 1e-5, h, seed + 8))
    add(_case("transpose",
              lambda v: ops.sum_all(ops.mul(ops.transpose(v["x"]), v["y"])),
              {"x": (3, 5), "y": (5, 3)}, 1e-5, h, seed + 9))
    add(_case("reshape",
              lambda v: ops.sum_all(ops.mul(ops.reshape(v["x"], (2, 6)),
                                            v["y"])),
              {"x": (3, 4), "y": (2, 6)}, 1e-5, h, seed + 10))
    add(_case("concat",
              lambda v: ops.sum_all(ops.mul(ops.concat([v["x"], v["y"]], 1),
                                            ops.concat([v["y"], v["x"]], 1))),
              {"x": (2, 3), "y": (2, 3)}, 1e-5, h, seed + 11))
    add(_case("narrow",
              lambda v: ops.sum_all(ops.mul(ops.narrow(v["x"], 1, 1, 3),
                                            ops.narrow(v["x"], 1, 2, 3))),
              {"x": (2, 6)}, 1e-5, h, seed + 12))
    add(_case("relu", lambda v: ops.sum_all(ops.mul(ops.relu(v["x"]), v["x"])),
              {"x": (4, 4)}, 1e-5, h, seed + 13))
    add(_case("sigmoid", lambda v: ops.sum_all(ops.sigmoid(v["x"])),
              {"x": (3, 5)}, 1e-5, h, seed + 14))
    add(_case("tanh", lambda v: ops.sum_all(ops.tanh(v["x"])),
              {"x": (3, 5)}, 1e-5, h, seed + 15))
    add(_case("softmax_rows",
              lambda v: ops.sum_all(ops.mul(ops.softmax_rows(v["x"]), v["y"])),
              {"x": (3, 6), "y": (3, 6)}, 1e-5, h, seed + 16))
    add(_case("layer_norm",
              lambda v: ops.sum_all(ops.mul(
                  ops.layer_norm(v["x"], v["g"], v["b"]), v["y"])),
              {"x": (4, 6), "g": (6,), "b": (6,), "y": (4, 6)},
              1e-5, h, seed + 17))
    add(_case("linear",
              lambda v: ops.sum_all(ops.linear(v["x"], v["w"], v["b"])),
              {"x": (3, 4), "w": (4, 5), "b": (5,)}, 1e-6, h, seed + 18))
    add(_case("mean_all", lambda v: ops.mean_all(ops.mul(v["x"], v["x"])),
              {"x": (3, 7)}, 1e-5, h, seed + 19))
    add(_case("mse_loss", lambda v: ops.mse_loss(v["p"], v["t"]),
              {"p": (4, 5), "t": (4, 5)}, 1e-5, h, seed + 20))
    # quadratic composite: central differences are exact here, so the
    # only error left is roundoff
    add(_case("quadratic",
              lambda v: ops.mse_loss(ops.linear(v["x"], v["w"], v["b"]),
                                     v["t"]),
              {"x": (3, 4), "w": (4, 2), "b": (2,), "t": (3, 2)},
              1e-8, h, seed + 21))
    return cases


def model_check(h=1e-6, seed=0, t_pred=2):
    """End-to-end check: tiny fused model, loss wrt every parameter and input.

    The rollout length is kept short; the graph per step is identical,
    so two steps already cover the feedback path while keeping the
    finite-difference sweep fast.  The target sits close to the initial
    predictions: a small loss keeps finite-difference roundoff (which
    scales with the loss value) below the comparison floor, while the
    random residual still pulls a nonzero gradient through every path.
    """
    from ..model import build_model
    from ..model.config import ModelConfig

    cfg = ModelConfig(kind="cxa", d_model=8, n_heads=1, d_ff=16,
                      n_encoder_layers=1, n_decoder_layers=1,
                      t_obs=3, t_pred=t_pred, modalities="Y+P+S",
                      max_neighbors=1, scene_dim=16)
    model = build_model(cfg, seed=seed)
    rng = np.random.default_rng(seed + 100)
    probes = {
        "ego": Tensor(0.1 * rng.standard_normal((1, 3, cfg.ego_dim)),
                      requires_grad=True),
        "neighbors": Tensor(0.1 * rng.standard_normal((1, 3, cfg.neighbor_dim)),
                            requires_grad=True),
        "scene": Tensor(0.1 * rng.standard_normal((1, 3, cfg.scene_dim)),
                        requires_grad=True),
    }
    base = model.forward_batch(dict(probes), t_pred=t_pred).data
    target = Tensor(base + 3e-4 * rng.standard_normal(base.shape))
    inputs = dict(probes)
    for name, p in model.params.items():
        inputs["param:" + name] = p

    def loss_fn(v):
        feed = {k: v[k] for k in ("ego", "neighbors", "scene")}
        pred = model.forward_batch(feed, t_pred=t_pred)
        return ops.mse_loss(pred, target)

    err, per_input = gradcheck(loss_fn, inputs, h=h)
    return CheckCase(name="model_end_to_end", max_err=err, tol=1e-5), per_input


def baseline_check(kind, h=1e-6, seed=0, t_pred=2):
    """End-to-end check for one of the recurrent baselines."""
    from ..model import build_model
    from ..model.config import ModelConfig

    cfg = ModelConfig(kind=kind, d_model=8, n_heads=1, d_ff=16,
                      n_encoder_layers=1, n_decoder_layers=1,
                      t_obs=3, t_pred=t_pred, modalities="Y+P+S",
                      max_neighbors=1, scene_dim=16)
    model = build_model(cfg, seed=seed)
    rng = np.random.default_rng(seed + 200)
    probes = {
        "ego": Tensor(0.1 * rng.standard_normal((1, 3, cfg.ego_dim)),
                      requires_grad=True),
        "neighbors": Tensor(0.1 * rng.standard_normal((1, 3, cfg.neighbor_dim)),
                            requires_grad=True),
        "scene": Tensor(0.1 * rng.standard_normal((1, 3, cfg.scene_dim)),
                        requires_grad=True),
    }
    base = model.forward_batch(dict(probes), t_pred=t_pred).data
    target = Tensor(base + 3e-4 * rng.standard_normal(base.shape))
    inputs = dict(probes)
    for name, p in model.params.items():
        inputs["param:" + name] = p

    def loss_fn(v):
        feed = {k: v[k] for k in ("ego", "neighbors", "scene")}
        pred = model.forward_batch(feed, t_pred=t_pred)
        return ops.mse_loss(pred, target)

    err, per_input = gradcheck(loss_fn, inputs, h=h)
    return CheckCase(name=kind + "_end_to_end", max_err=err, tol=1e-5), per_input


def suite_report(cases):
    lines = []
    for c in cases:
        lines.append("%-18s max_rel_err %.3e  tol %.0e  %s"
                     % (c.name, c.max_err, c.tol,
                        "pass" if c.passed else "FAIL"))
    return "\n".join(lines) + "\n"
