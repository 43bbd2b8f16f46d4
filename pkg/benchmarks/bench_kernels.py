"""Timing comparison of the pure-Python and compiled kernel backends.

Run as a script: python benchmarks/bench_kernels.py [--repeat N]
Prints per-kernel best-of-N wall times for both backends and the
speedup, plus a whole-model forward/backward comparison.
"""
import argparse
import time

import numpy as np

from egoforecast import kernels
from egoforecast.autodiff import Tape, Tensor, backward, ops


def best_of(fn, repeat, warmup=2):
    for _ in range(warmup):
        fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(rng):
    x = rng.standard_normal((256, 648))
    dy = rng.standard_normal((256, 648))
    gain = rng.standard_normal(648)
    bias = rng.standard_normal(648)
    p = rng.standard_normal(65536)
    g = rng.standard_normal(65536)
    m = np.zeros(65536)
    v = np.zeros(65536)
    sm = kernels.softmax_lastdim(x)
    _, ln_xhat, ln_rstd = kernels.layer_norm_fwd(x, gain, bias, 1e-5)
    pos = rng.uniform(-8, 8, size=(64, 2))
    vel = rng.standard_normal((64, 2))
    goal = rng.uniform(-8, 8, size=(64, 2))
    pref = rng.uniform(0.8, 1.6, size=64)
    radius = rng.uniform(0.25, 0.35, size=64)
    walls = np.array([-10.0, 10.0, -10.0, 10.0])
    pillars = np.array([[1.0, 1.0, 0.5], [-2.0, 3.0, 0.4]])
    return [
        ("softmax_fwd 256x648", lambda: kernels.softmax_lastdim(x)),
        ("softmax_bwd 256x648", lambda: kernels.softmax_lastdim_bwd(sm, dy)),
        ("layer_norm_fwd 256x648",
         lambda: kernels.layer_norm_fwd(x, gain, bias, 1e-5)),
        ("layer_norm_bwd 256x648",
         lambda: kernels.layer_norm_bwd(ln_xhat, ln_rstd, gain, dy)),
        ("relu_fwd 256x648", lambda: kernels.relu_fwd(x)),
        ("sigmoid_fwd 256x648", lambda: kernels.sigmoid_fwd(x)),
        ("tanh_bwd 256x648", lambda: kernels.tanh_bwd(np.tanh(x), dy)),
        ("adam_update 64k",
         lambda: kernels.adam_update(p, g, m, v, 1, 1e-4, 0.9, 0.999, 1e-8)),
        ("social_force 64 agents",
         lambda: kernels.social_force_accel(pos, vel, goal, pref, radius,
                                            0.5, 8.0, 0.4, walls, pillars,
                                            4.0, 0.3)),
    ]


def model_case(seed=0):
    from egoforecast.model import build_model
    from egoforecast.model.config import ModelConfig

    cfg = ModelConfig(kind="cxa", d_model=64, n_heads=4, d_ff=128,
                      n_encoder_layers=2, n_decoder_layers=2,
                      modalities="Y+P+S")
    model = build_model(cfg, seed=seed)
    rng = np.random.default_rng(seed)
    feed = {
        "ego": rng.standard_normal((16, 3, cfg.ego_dim)),
        "neighbors": rng.standard_normal((16, 3, cfg.neighbor_dim)),
        "scene": rng.standard_normal((16, 3, cfg.scene_dim)),
    }
    target = Tensor(rng.standard_normal((16, cfg.t_pred, 7)))

    def run():
        tensors = {k: Tensor(a) for k, a in feed.items()}
        with Tape() as tape:
            loss = ops.mse_loss(model.forward_batch(tensors), target)
            model.params.zero_grad()
            backward(tape, loss)

    return run


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = ["py"]
    if kernels.compiled_available():
        backends.append("c")
    else:
        print("compiled backend unavailable; timing pure Python only")

    rng = np.random.default_rng(0)
    results = {}
    for backend in backends:
        kernels.set_backend(backend)
        for name, fn in kernel_cases(rng):
            results.setdefault(name, {})[backend] = best_of(fn, args.repeat)
        results.setdefault("model fwd+bwd b16 d64", {})[backend] = best_of(
            model_case(), args.repeat)

    width = max(len(n) for n in results)
    header = "%-*s  %10s" % (width, "kernel", "python")
    if "c" in backends:
        header += "  %10s  %8s" % ("compiled", "speedup")
    print(header)
    for name, times in results.items():
        line = "%-*s  %8.3f ms" % (width, name, 1e3 * times["py"])
        if "c" in times:
            line += "  %8.3f ms  %7.2fx" % (1e3 * times["c"],
                                            times["py"] / times["c"])
        print(line)


if __name__ == "__main__":
    main()
