"""Command line interface.

Subcommands: generate, train, eval, ablate, gradcheck, predict.  Every
command takes --out for its artifacts, --config for a JSON config file,
--set for dotted-key overrides, and --seed; the resolved configuration
is echoed into the output directory.  Exit status is 0 exactly when the
command's artifact was written and passed validation.
"""
import argparse
import dataclasses
import json
import os
import sys
import time

import numpy as np

from ..datagen import generate_dataset, read_dataset, write_dataset
from ..datagen.quat import denormalize_relative, renormalize_pose_sequence
from ..model import build_model, load_checkpoint
from ..model.config import ConfigError, parse_modalities
from ..traineval import (ABLATION_ROWS, ablation_json, ablation_table,
                         check_compatibility, evaluate, run_ablation,
                         train_from_config)
from ..traineval.split import derive_manifest, split_samples
from .configure import CliConfigError, echo_config, materialize, resolve_config

VALID_TOKENS = "Y, C, B, P, S, D"


class CommandError(RuntimeError):
    """Fatal command failure with a user-facing message."""


def _add_common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, default=None,
                   help="override training seed and data master seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (dotted path, repeatable)")
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="egoforecast",
        description="egocentric trajectory forecasting toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate synthetic datasets")
    _add_common(p)

    p = sub.add_parser("train", help="train a model on a dataset")
    _add_common(p)
    p.add_argument("--data", required=True,
                   help="training dataset file, or a directory holding "
                        "train/val/test files from `generate`")
    p.add_argument("--val", help="validation dataset file")

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True, help="evaluation dataset file")
    p.add_argument("--per-step-horizon", action="store_true",
                   help="horizon rows cover the single step at each horizon "
                        "instead of all steps up to it")

    p = sub.add_parser("ablate", help="train and score each modality subset")
    _add_common(p)
    p.add_argument("--data", required=True,
                   help="directory from `generate` (train+test), or a "
                        "single dataset file to be split 80/20")
    p.add_argument("--rows", help="comma-separated subset of the grid, "
                                  "e.g. 'Y,Y+P+S'")

    p = sub.add_parser("gradcheck", help="finite-difference gradient checks")
    _add_common(p)
    p.add_argument("--skip-model", action="store_true",
                   help="only run the per-op suite")
    p.add_argument("--fault", help=argparse.SUPPRESS)  # op=scale test hook

    p = sub.add_parser("predict", help="export trajectories for one sample")
    _add_common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--index", type=int, default=0, help="sample index")
    return ap


def _say(args, msg):
    if not args.quiet:
        print(msg, flush=True)


def _resolve(args):
    cfg = resolve_config(config_file=args.config, set_items=args.set,
                         seed=args.seed)
    return cfg


def _dataset_file(base, name):
    path = os.path.join(base, name + ".egodata")
    return path if os.path.exists(path) else None


def _load_train_sets(args):
    """Resolve --data/--val into (train, val or None, manifest)."""
    if os.path.isdir(args.data):
        train_path = _dataset_file(args.data, "train")
        if train_path is None:
            raise CommandError(
                "no train.egodata in directory %s" % args.data)
        val_path = args.val or _dataset_file(args.data, "val")
    else:
        train_path, val_path = args.data, args.val
    train_samples, manifest = read_dataset(train_path)
    val_samples = None
    if val_path:
        val_samples, _ = read_dataset(val_path)
    return train_samples, val_samples, manifest


# ---------------------------------------------------------------- commands

def cmd_generate(args):
    cfg = _resolve(args)
    model_cfg, train_cfg, data, world = materialize(cfg)
    os.makedirs(args.out, exist_ok=True)
    echo_config(cfg, args.out)
    master = int(data.get("master_seed", 0))
    counts = [("train", int(data.get("n_train", 0)))]
    if int(data.get("n_val", 0)) > 0:
        counts.append(("val", int(data["n_val"])))
    counts.append(("test", int(data.get("n_test", 0))))
    first_episode = 0
    for split, count in counts:
        if count < 1:
            continue
        t0 = time.time()
        samples, manifest = generate_dataset(
            world, n_samples=count, master_seed=master, split=split,
            first_episode=first_episode)
        first_episode += _episodes_used(samples)
        path = os.path.join(args.out, split + ".egodata")
        write_dataset(samples, manifest, path)
        back, back_manifest = read_dataset(path)
        if len(back) != count or back_manifest.sample_count != count:
            raise CommandError("dataset %s failed read-back validation" % path)
        _say(args, "%s: %d samples -> %s (%.1fs)"
             % (split, count, path, time.time() - t0))
    return 0


def _episodes_used(samples):
    # sample ids look like e0012w03; every consumed episode keeps >= 1 window
    return len({s.sample_id.split("w")[0] for s in samples})


def cmd_train(args):
    cfg = _resolve(args)
    model_cfg, train_cfg, data, world = materialize(cfg)
    train_samples, val_samples, manifest = _load_train_sets(args)
    check_compatibility(manifest, model_cfg)
    os.makedirs(args.out, exist_ok=True)
    echo_config(cfg, args.out)
    ckpt_path = os.path.join(args.out, "model.ckpt")
    t0 = time.time()
    result = train_from_config(
        model_cfg, train_samples, train_cfg, val_samples=val_samples,
        checkpoint_path=ckpt_path,
        meta={"dataset_digest": manifest.config_digest},
        log=None if args.quiet else (lambda m: print(m, flush=True)))
    history = {
        "epoch_losses": result.epoch_losses,
        "step_losses": result.step_losses,
        "val_losses": result.val_losses,
        "best_epoch": result.best_epoch,
        "seconds": time.time() - t0,
    }
    with open(os.path.join(args.out, "loss_history.json"), "w") as fh:
        json.dump(history, fh, indent=2)
    reloaded, _ = load_checkpoint(ckpt_path)
    if reloaded.params.count_values() != result.model.params.count_values():
        raise CommandError("checkpoint %s failed read-back validation" % ckpt_path)
    _say(args, "checkpoint -> %s  (final train loss %.6e)"
         % (ckpt_path, result.epoch_losses[-1]))
    return 0


def cmd_eval(args):
    cfg = _resolve(args)
    model, _meta = load_checkpoint(args.checkpoint)
    samples, manifest = read_dataset(args.data)
    check_compatibility(manifest, model.config)
    os.makedirs(args.out, exist_ok=True)
    echo_config(cfg, args.out)
    report = evaluate(model, samples, fps=manifest.fps,
                      per_step_horizon=args.per_step_horizon)
    report.validate()
    with open(os.path.join(args.out, "metrics.json"), "w") as fh:
        fh.write(report.to_json() + "\n")
    with open(os.path.join(args.out, "metrics.txt"), "w") as fh:
        fh.write(report.to_text())
    _say(args, report.to_text().rstrip())
    return 0


def cmd_ablate(args):
    cfg = _resolve(args)
    model_cfg, train_cfg, data, world = materialize(cfg)
    rows = ABLATION_ROWS
    if args.rows:
        rows = []
        for token in args.rows.split(","):
            token = token.strip()
            try:
                parse_modalities(token)
            except ConfigError as exc:
                raise CommandError(str(exc))
            rows.append(token)
    if os.path.isdir(args.data):
        train_path = _dataset_file(args.data, "train")
        test_path = _dataset_file(args.data, "test")
        if train_path is None or test_path is None:
            raise CommandError(
                "directory %s needs train.egodata and test.egodata" % args.data)
        train_samples, manifest = read_dataset(train_path)
        test_samples, _ = read_dataset(test_path)
    else:
        samples, manifest = read_dataset(args.data)
        train_samples, test_samples = split_samples(
            samples, [0.8, 0.2], seed=train_cfg.seed)
    os.makedirs(args.out, exist_ok=True)
    echo_config(cfg, args.out)
    results = run_ablation(
        model_cfg, train_samples, test_samples, train_cfg, rows=rows,
        log=None if args.quiet else (lambda m: print(m, flush=True)))
    with open(os.path.join(args.out, "ablation.tsv"), "w") as fh:
        fh.write(ablation_table(results))
    with open(os.path.join(args.out, "ablation.json"), "w") as fh:
        fh.write(ablation_json(results) + "\n")
    ok = [r for r in results if not r.error]
    _say(args, "%d/%d rows succeeded -> %s"
         % (len(ok), len(results), os.path.join(args.out, "ablation.tsv")))
    if not ok:
        raise CommandError("every ablation row failed")
    return 0


def cmd_gradcheck(args):
    from ..autodiff import ops
    from ..autodiff.checksuite import (baseline_check, model_check,
                                       standard_suite, suite_report)
    cfg = _resolve(args)
    os.makedirs(args.out, exist_ok=True)
    echo_config(cfg, args.out)
    if args.fault:
        op, _, scale = args.fault.partition("=")
        ops.set_backward_fault(op.strip(), float(scale or 2.0))
    t0 = time.time()
    cases = standard_suite()
    if not args.skip_model:
        case, _per = model_check()
        cases.append(case)
        for kind in ("triple_lstm", "lip_lstm"):
            case, _per = baseline_check(kind)
            cases.append(case)
    if args.fault:
        ops.clear_backward_faults()
    report = suite_report(cases)
    report += "worst %.3e  runtime %.1fs\n" % (
        max(c.max_err for c in cases), time.time() - t0)
    with open(os.path.join(args.out, "gradcheck.txt"), "w") as fh:
        fh.write(report)
    _say(args, report.rstrip())
    if not all(c.passed for c in cases):
        raise CommandError("gradient check failed")
    return 0


def _write_trajectory(path, rel, t0_step=0, fps=2.0):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t\tx\ty\tz\tqw\tqx\tqy\tqz\n")
        for i, row in enumerate(rel):
            t = (t0_step + i) / fps
            fh.write("\t".join(["%.6f" % t] + ["%.17g" % v for v in row]))
            fh.write("\n")


def cmd_predict(args):
    cfg = _resolve(args)
    model, _meta = load_checkpoint(args.checkpoint)
    samples, manifest = read_dataset(args.data)
    check_compatibility(manifest, model.config)
    if not 0 <= args.index < len(samples):
        raise CommandError(
            "sample index %d out of range [0, %d)" % (args.index, len(samples)))
    sample = samples[args.index]
    os.makedirs(args.out, exist_ok=True)
    echo_config(cfg, args.out)

    from ..traineval.batching import assemble_arrays
    inputs, _targets = assemble_arrays([sample], model.config)
    pred = model.predict({k: v[0] for k, v in inputs.items()})

    observed = sample.ego_past                      # (t_obs, 7) relative
    truth = np.concatenate([observed, sample.ego_future], axis=0)
    predicted = np.concatenate([observed, pred], axis=0)

    def world(rel, renorm=False):
        seq = renormalize_pose_sequence(rel) if renorm else rel
        return denormalize_relative(seq, sample.ref_pose)

    out = args.out
    _write_trajectory(os.path.join(out, "observed_relative.tsv"), observed,
                      fps=manifest.fps)
    _write_trajectory(os.path.join(out, "observed_world.tsv"), world(observed),
                      fps=manifest.fps)
    _write_trajectory(os.path.join(out, "groundtruth_relative.tsv"), truth,
                      fps=manifest.fps)
    _write_trajectory(os.path.join(out, "groundtruth_world.tsv"), world(truth),
                      fps=manifest.fps)
    _write_trajectory(os.path.join(out, "predicted_relative.tsv"), predicted,
                      fps=manifest.fps)
    _write_trajectory(os.path.join(out, "predicted_world.tsv"),
                      world(predicted, renorm=True), fps=manifest.fps)
    _say(args, "trajectories for sample %d -> %s" % (args.index, out))
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "gradcheck": cmd_gradcheck,
    "predict": cmd_predict,
}


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        msg = str(exc)
        if "modality" in msg and "valid" not in msg:
            msg += " (valid tokens: %s)" % VALID_TOKENS
        print("error: %s" % msg, file=sys.stderr)
        return 2
    except (CliConfigError, CommandError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print("error: %s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
