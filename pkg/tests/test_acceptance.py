"""Release gate: nine checks, one printed verdict line each.

Every test appends an "ACCEPTANCE n: PASS/FAIL - detail" line to
RESULT_LINES (echoed in the terminal summary) and then asserts, so a
broken criterion still reports its measurements before failing.
"""
import dataclasses
import hashlib
import statistics
import time

import numpy as np

from egoforecast.autodiff import Tensor
from egoforecast.autodiff.checksuite import (baseline_check, model_check,
                                             standard_suite)
from egoforecast.datagen import (DatasetManifest, WorldConfig,
                                 generate_dataset, read_dataset,
                                 write_dataset)
from egoforecast.datagen.dataset_io import _flatten_record
from egoforecast.datagen.quat import (denormalize_relative,
                                      normalize_relative)
from egoforecast.datagen.samples import slice_samples
from egoforecast.datagen.socialforce import simulate_episode
from egoforecast.model import (ModelConfig, build_model, load_checkpoint,
                               save_checkpoint)
from egoforecast.model.fusion import CXAFusion, cascaded_cross_attention
from egoforecast.model.parameters import ParamStore
from egoforecast.traineval import (TrainConfig, evaluate,
                                   metrics_from_predictions,
                                   overall_from_parts, split_samples,
                                   train_from_config)

from oracles import cascade_np, stage_weights_of

RESULT_LINES = []


def _record(n, ok, detail):
    line = "ACCEPTANCE %d: %s - %s" % (n, "PASS" if ok else "FAIL", detail)
    RESULT_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_gradient_suite():
    t0 = time.time()
    cases = standard_suite(h=1e-6)
    model_case, _per = model_check(h=1e-6)
    cases.append(model_case)
    elapsed = time.time() - t0
    worst = max(c.max_err for c in cases)
    ok = (all(c.passed for c in cases)
          and model_case.max_err <= 1e-5
          and elapsed < 60.0)
    _record(1, ok,
            "%d op cases + end-to-end sweep, worst rel err %.3e "
            "(model %.3e, tol 1e-5), %.1fs" % (len(cases) - 1, worst,
                                               model_case.max_err, elapsed))


def test_criterion_2_cascade_matches_reference():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for trial in range(100):
        t_obs = int(rng.integers(1, 5))
        n_heads = int(rng.choice([1, 2, 4]))
        d_model = n_heads * int(rng.integers(1, 17 // n_heads))
        n_stages = int(rng.integers(1, 3))
        params = ParamStore()
        fusion = CXAFusion(params, "fusion", np.random.default_rng(5000 + trial),
                           d_model, n_heads, n_stages)
        e_y = rng.standard_normal((t_obs, d_model))
        others = [rng.standard_normal((t_obs, d_model))
                  for _ in range(n_stages)]
        got = cascaded_cross_attention(
            fusion, Tensor(e_y), [Tensor(o) for o in others]).data
        want = cascade_np(e_y, others, stage_weights_of(fusion))
        worst = max(worst, float(np.max(np.abs(got - want))))

    empty_fusion = CXAFusion(ParamStore(), "f", np.random.default_rng(1), 8, 2, 0)
    e_y = np.random.default_rng(2).standard_normal((4, 8))
    empty_exact = np.array_equal(
        cascaded_cross_attention(empty_fusion, Tensor(e_y), []).data, e_y)

    zeroed = CXAFusion(ParamStore(), "f", np.random.default_rng(3), 8, 2, 2)
    for stage in zeroed.stages:
        stage.attn.wv.data[:] = 0.0
    others = [Tensor(np.random.default_rng(4).standard_normal((4, 8)))
              for _ in range(2)]
    zero_exact = np.array_equal(
        cascaded_cross_attention(zeroed, Tensor(e_y), others).data, e_y)

    ok = worst <= 1e-10 and empty_exact and zero_exact
    _record(2, ok,
            "100 instances worst abs err %.3e (tol 1e-10), empty cascade "
            "exact=%s, zero value projection exact=%s"
            % (worst, empty_exact, zero_exact))


def test_criterion_3_metric_identity_and_reference_pairs():
    rng = np.random.default_rng(0)
    report = metrics_from_predictions(rng.normal(size=(50, 7, 7)),
                                      rng.normal(size=(50, 7, 7)))
    ident_err = abs(report.mse_overall
                    - (3 * report.mse_position + 4 * report.mse_orientation) / 7)
    pairs = [
        (7.09e-2, 1.77e-3, 3.14e-2),
        (3.54e-2, 4.27e-4, 1.54e-2),
        (6.40e-2, 7.37e-4, 2.78e-2),
        (6.67e-2, 4.54e-4, 2.89e-2),
    ]
    pair_errs = [abs(overall_from_parts(p, o) - overall) for p, o, overall in pairs]
    ok = ident_err <= 1e-12 and all(e <= 5e-4 for e in pair_errs)
    detail = ", ".join("(%.2e, %.2e)->%.2e err %.1e" % (p, o, v, e)
                       for (p, o, v), e in zip(pairs, pair_errs))
    _record(3, ok, "identity err %.1e; %s" % (ident_err, detail))


def test_criterion_4_small_set_overfit():
    t0 = time.time()
    samples, _ = generate_dataset(WorldConfig(), n_samples=32, master_seed=77)
    cfg = ModelConfig(kind="cxa", modalities="Y+P+S", d_model=64, n_heads=4,
                      d_ff=128, n_encoder_layers=2, n_decoder_layers=2)
    result = train_from_config(
        cfg, samples, TrainConfig(epochs=2000, batch_size=32, lr=1e-3, seed=1))
    elapsed = time.time() - t0
    best = min(result.step_losses)
    steps = len(result.step_losses)
    ok = best < 1e-3 and steps <= 2000 and elapsed < 300.0
    _record(4, ok, "32-sample MSE %.3e after %d steps (final %.3e), %.1fs"
            % (best, steps, result.epoch_losses[-1], elapsed))


def test_criterion_5_decoder_causality():
    cfg = ModelConfig(kind="cxa", d_model=16, n_heads=2, d_ff=32,
                      n_encoder_layers=1, n_decoder_layers=1,
                      modalities="Y+P+S", max_neighbors=2, scene_dim=24)
    model = build_model(cfg, seed=6)
    rng = np.random.default_rng(7)
    feed = {
        "ego": Tensor(rng.standard_normal((2, cfg.t_obs, cfg.ego_dim))),
        "neighbors": Tensor(rng.standard_normal((2, cfg.t_obs,
                                                 cfg.neighbor_dim))),
        "scene": Tensor(rng.standard_normal((2, cfg.t_obs, cfg.scene_dim))),
    }
    memory = model.encode(feed)
    dec_in = rng.standard_normal((2, 5, 7))
    base = model.decoder.forward_teacher(memory, Tensor(dec_in)).data
    causal_err = 0.0
    future_moves = True
    for j in (2, 3, 4):
        bumped = dec_in.copy()
        bumped[:, j] += rng.standard_normal(7) * 10.0
        out = model.decoder.forward_teacher(memory, Tensor(bumped)).data
        causal_err = max(causal_err,
                         float(np.max(np.abs(out[:, :j] - base[:, :j]))))
        future_moves = future_moves and not np.allclose(out[:, j], base[:, j])

    short = model.forward_batch(feed, t_pred=3).data
    long = model.forward_batch(feed, t_pred=7).data
    prefix_exact = np.array_equal(long[:, :3], short)

    ok = causal_err <= 1e-12 and future_moves and prefix_exact
    _record(5, ok,
            "teacher-forced prefix leakage %.1e (tol 1e-12), perturbed step "
            "responds=%s, greedy prefix bit-exact=%s"
            % (causal_err, future_moves, prefix_exact))


def test_criterion_6_modality_gain_protocol():
    t0 = time.time()
    samples, _ = generate_dataset(WorldConfig(), n_samples=2500,
                                  master_seed=20260822)
    train_set, test_set = split_samples(samples, (0.8, 0.2), seed=1)
    desk = dict(d_model=128, n_heads=4, d_ff=512,
                n_encoder_layers=3, n_decoder_layers=3)
    scores = {}
    for label in ("Y+P+S", "Y"):
        cfg = ModelConfig(kind="cxa", modalities=label, **desk)
        runs = []
        for seed in (0, 1, 2):
            result = train_from_config(
                cfg, train_set,
                TrainConfig(epochs=10, batch_size=64, lr=3e-4, seed=seed))
            runs.append(evaluate(result.model, test_set).mse_overall)
        scores[label] = statistics.median(runs)
    elapsed = time.time() - t0
    ok = scores["Y+P+S"] <= scores["Y"] and elapsed < 1800.0
    _record(6, ok,
            "median over 3 seeds: full inputs %.4e vs ego only %.4e "
            "(2000 train / 500 test, %.0fs)"
            % (scores["Y+P+S"], scores["Y"], elapsed))


def test_criterion_7_large_run_invariants_and_determinism():
    t0 = time.time()
    cfg = WorldConfig()
    manifest = DatasetManifest(sample_count=10000)

    def stream_digest():
        digest = hashlib.sha256()
        count = 0
        episode = 0
        while count < 10000:
            tracks = simulate_episode(cfg, 555, episode)
            for sample in slice_samples(tracks, cfg):
                if count == 10000:
                    break
                sample.validate()
                digest.update(_flatten_record(sample, manifest).encode())
                digest.update(b"\n")
                count += 1
            episode += 1
        return digest.hexdigest(), count

    first, n1 = stream_digest()
    second, n2 = stream_digest()
    elapsed = time.time() - t0
    ok = n1 == n2 == 10000 and first == second
    _record(7, ok,
            "%d samples validated, stream sha256 %s on both passes, %.0fs"
            % (n1, first[:12] if first == second else "MISMATCH", elapsed))


def test_criterion_8_baseline_parity(small_samples):
    samples, _ = small_samples
    train_set, test_set = samples[:40], samples[40:]
    tiny = dict(modalities="Y+P+S", d_model=16, n_heads=2, d_ff=32,
                n_encoder_layers=1, n_decoder_layers=1)
    reports = {}
    for kind in ("cxa", "triple_lstm", "lip_lstm"):
        cfg = ModelConfig(kind=kind, **tiny)
        result = train_from_config(
            cfg, train_set, TrainConfig(epochs=2, batch_size=8, lr=1e-3,
                                        seed=0))
        report = evaluate(result.model, test_set)
        report.validate()
        reports[kind] = report

    keys = [tuple(sorted(r.to_dict())) for r in reports.values()]
    horizons = [tuple(r.horizon) for r in reports.values()]
    schema_match = len(set(keys)) == 1 and len(set(horizons)) == 1

    grad_errs = {}
    for kind in ("triple_lstm", "lip_lstm"):
        case, _per = baseline_check(kind, h=1e-6)
        grad_errs[kind] = case.max_err
    grads_ok = all(e <= 1e-5 for e in grad_errs.values())

    ok = schema_match and grads_ok
    _record(8, ok,
            "shared dataset, report schema identical=%s; baseline grad errs "
            "triple %.2e / single-stream %.2e (tol 1e-5)"
            % (schema_match, grad_errs["triple_lstm"], grad_errs["lip_lstm"]))


def test_criterion_9_round_trips(tmp_path, small_samples):
    samples, manifest = small_samples

    cfg = ModelConfig(kind="cxa", modalities="Y+P+S", d_model=16, n_heads=2,
                      d_ff=32, n_encoder_layers=1, n_decoder_layers=1,
                      max_neighbors=2, scene_dim=24)
    model = build_model(cfg, seed=12)
    rng = np.random.default_rng(13)
    feed = {
        "ego": Tensor(rng.standard_normal((3, cfg.t_obs, cfg.ego_dim))),
        "neighbors": Tensor(rng.standard_normal((3, cfg.t_obs,
                                                 cfg.neighbor_dim))),
        "scene": Tensor(rng.standard_normal((3, cfg.t_obs, cfg.scene_dim))),
    }
    before = model.forward_batch(feed).data
    path = str(tmp_path / "round.ckpt")
    save_checkpoint(model, path)
    reloaded, _meta = load_checkpoint(path)
    after = reloaded.forward_batch(feed).data
    ckpt_exact = np.array_equal(before, after)

    data_path = str(tmp_path / "round.egodata")
    write_dataset(samples, manifest, data_path)
    loaded, _m = read_dataset(data_path)
    data_exact = all(
        np.array_equal(getattr(a, f), getattr(b, f))
        for a, b in zip(samples, loaded)
        for f in manifest.FIELD_ORDER)

    frame_err = 0.0
    for sample in samples[:20]:
        stored = np.concatenate([sample.ego_past, sample.ego_future])
        world = denormalize_relative(stored, sample.ref_pose)
        rel = normalize_relative(world)
        pos_err = np.max(np.abs(rel[:, :3] - stored[:, :3]))
        quat_err = np.max(np.minimum(
            np.max(np.abs(rel[:, 3:] - stored[:, 3:]), axis=1),
            np.max(np.abs(rel[:, 3:] + stored[:, 3:]), axis=1)))
        frame_err = max(frame_err, float(pos_err), float(quat_err))

    ok = ckpt_exact and data_exact and frame_err <= 1e-9
    _record(9, ok,
            "checkpoint forward bit-identical=%s, dataset values "
            "identical=%s, frame round trip err %.1e (tol 1e-9)"
            % (ckpt_exact, data_exact, frame_err))
