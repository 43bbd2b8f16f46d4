"""Batched, gradient-free evaluation and prediction."""
import numpy as np

from ..autodiff import Tensor
from .batching import assemble_arrays, take_rows
from .metrics import metrics_from_predictions


def predict_arrays(model, inputs, batch_size=256):
    """Forward the whole input set without a tape; (N, t_pred, 7)."""
    n = next(iter(inputs.values())).shape[0]
    chunks = []
    for start in range(0, n, batch_size):
        idx = np.arange(start, min(start + batch_size, n))
        arrays = {k: np.ascontiguousarray(v[idx]) for k, v in inputs.items()}
        tensors = {k: Tensor(v) for k, v in arrays.items()}
        chunks.append(model.forward_batch(tensors).data)
    return np.concatenate(chunks, axis=0)


def evaluate_arrays(model, inputs, targets, batch_size=256):
    """Mean squared error over all pose components; plain float."""
    preds = predict_arrays(model, inputs, batch_size=batch_size)
    return float(np.mean((preds - targets) ** 2))


def predict_samples(model, samples, batch_size=256):
    inputs, targets = assemble_arrays(samples, model.config)
    return predict_arrays(model, inputs, batch_size=batch_size), targets


def evaluate(model, samples, fps=2.0, batch_size=256, per_step_horizon=False):
    """Full metric report for a sample set."""
    preds, targets = predict_samples(model, samples, batch_size=batch_size)
    return metrics_from_predictions(
        preds, targets, fps=fps,
        model_label=model.config.kind,
        modality_label=model.config.modalities,
        per_step_horizon=per_step_horizon)
