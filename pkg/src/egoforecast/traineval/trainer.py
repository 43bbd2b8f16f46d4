"""Training loop: greedy rollout forward, MSE loss, Adam updates.

The decoder feeds its own outputs back during training, so the loss is
taken over exactly the rollout the model produces at inference time.
Shuffling is derived per epoch from (seed, epoch), making loss histories
reproducible bit for bit across runs.
"""
from dataclasses import dataclass, field, asdict
import math

import numpy as np

from ..autodiff import Tensor, Tape, backward, AdamState, NonFiniteGradient, ops
from ..model import build_model, save_checkpoint
from .batching import assemble_arrays, take_rows
from .evaluation import evaluate_arrays


class TrainingDiverged(RuntimeError):
    """Loss or gradients went non-finite; carries the offending batch index."""

    def __init__(self, message, epoch, batch_index):
        super().__init__(message)
        self.epoch = epoch
        self.batch_index = batch_index


@dataclass
class TrainConfig:
    epochs: int = 300
    batch_size: int = 1024
    lr: float = 5e-5
    seed: int = 0
    clip_norm: float = 0.0        # 0 disables gradient clipping
    save_best: bool = False       # also keep the best-validation checkpoint

    def validate(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1, got %d" % self.epochs)
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1, got %d" % self.batch_size)
        if self.lr < 0:
            raise ValueError("lr must be >= 0, got %g" % self.lr)
        if self.clip_norm < 0:
            raise ValueError("clip_norm must be >= 0, got %g" % self.clip_norm)

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainResult:
    model: object
    epoch_losses: list
    step_losses: list
    val_losses: list
    best_epoch: int = -1
    best_val: float = math.inf


def _clip_gradients(params, max_norm):
    total = 0.0
    grads = [p.grad for _, p in params.items() if p.grad is not None]
    for g in grads:
        total += float(np.sum(g * g))
    total = math.sqrt(total)
    if total > max_norm and total > 0:
        scale = max_norm / total
        for g in grads:
            g *= scale
    return total


def epoch_permutation(seed, epoch, n):
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(epoch)]))
    return rng.permutation(n)


def train(model, train_samples, cfg: TrainConfig, val_samples=None,
          checkpoint_path=None, meta=None, log=None):
    """Fit the model in place and return a TrainResult.

    Writes a checkpoint to ``checkpoint_path`` after the last epoch, and
    (with ``cfg.save_best`` and validation data) tracks the epoch with
    the lowest validation MSE in ``checkpoint_path + '.best'``.
    """
    cfg.validate()
    inputs, targets = assemble_arrays(train_samples, model.config)
    n = targets.shape[0]
    if cfg.batch_size > n:
        raise ValueError(
            "batch_size=%d exceeds the training set size %d"
            % (cfg.batch_size, n))
    val_arrays = None
    if val_samples:
        val_arrays = assemble_arrays(val_samples, model.config)

    adam = AdamState(model.params.items(), lr=cfg.lr)
    step_losses = []
    epoch_losses = []
    val_losses = []
    best_epoch = -1
    best_val = math.inf
    global_step = 0

    for epoch in range(cfg.epochs):
        perm = epoch_permutation(cfg.seed, epoch, n)
        batch_values = []
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            arrays, tgt = take_rows(inputs, targets, idx)
            tensors = {k: Tensor(v) for k, v in arrays.items()}
            with Tape() as tape:
                pred = model.forward_batch(tensors)
                loss = ops.mse_loss(pred, Tensor(tgt))
                value = loss.item()
                if not math.isfinite(value):
                    raise TrainingDiverged(
                        "loss became %r at epoch %d, batch %d (global step %d)"
                        % (value, epoch, len(batch_values), global_step),
                        epoch, len(batch_values))
                model.params.zero_grad()
                backward(tape, loss)
            if cfg.clip_norm > 0:
                _clip_gradients(model.params, cfg.clip_norm)
            try:
                adam.step(model.params.items())
            except NonFiniteGradient as exc:
                raise TrainingDiverged(
                    "%s (epoch %d, batch %d, global step %d)"
                    % (exc, epoch, len(batch_values), global_step),
                    epoch, len(batch_values)) from exc
            batch_values.append(value)
            step_losses.append(value)
            global_step += 1
        epoch_loss = float(np.mean(batch_values))
        epoch_losses.append(epoch_loss)

        if val_arrays is not None:
            val_loss = evaluate_arrays(model, val_arrays[0], val_arrays[1])
            val_losses.append(val_loss)
            if val_loss < best_val:
                best_val = val_loss
                best_epoch = epoch
                if cfg.save_best and checkpoint_path is not None:
                    save_checkpoint(model, str(checkpoint_path) + ".best",
                                    meta=_meta(meta, cfg, epoch, val_loss))
            if log is not None:
                log("epoch %d/%d  train %.6e  val %.6e"
                    % (epoch + 1, cfg.epochs, epoch_loss, val_loss))
        elif log is not None:
            log("epoch %d/%d  train %.6e" % (epoch + 1, cfg.epochs, epoch_loss))

    if checkpoint_path is not None:
        save_checkpoint(model, checkpoint_path,
                        meta=_meta(meta, cfg, cfg.epochs - 1,
                                   epoch_losses[-1] if epoch_losses else None))
    return TrainResult(model=model, epoch_losses=epoch_losses,
                       step_losses=step_losses, val_losses=val_losses,
                       best_epoch=best_epoch, best_val=best_val)


def _meta(base, cfg, epoch, loss):
    meta = dict(base or {})
    meta.update({"epoch": epoch, "epochs": cfg.epochs, "lr": cfg.lr,
                 "batch_size": cfg.batch_size, "seed": cfg.seed})
    if loss is not None:
        meta["loss"] = loss
    return meta


def train_from_config(model_config, train_samples, cfg: TrainConfig,
                      val_samples=None, checkpoint_path=None, meta=None,
                      log=None):
    model = build_model(model_config, seed=cfg.seed)
    return train(model, train_samples, cfg, val_samples=val_samples,
                 checkpoint_path=checkpoint_path, meta=meta, log=log)
