"""Turn trajectory samples into the dense arrays a model consumes.

Samples always carry full neighbor keypoints plus both scene encodings;
the model config decides which views get materialized.  Assembly happens
once per dataset, after which training indexes rows out of the arrays.
"""
import numpy as np

from ..model.config import ModelConfig
from ..datagen.samples import neighbor_representation


class DataMismatchError(ValueError):
    """Dataset does not provide what the model config asks for."""


def check_compatibility(manifest, config: ModelConfig):
    if manifest.t_obs != config.t_obs or manifest.t_pred != config.t_pred:
        raise DataMismatchError(
            "dataset windows are t_obs=%d/t_pred=%d but the model expects "
            "t_obs=%d/t_pred=%d" % (manifest.t_obs, manifest.t_pred,
                                    config.t_obs, config.t_pred))
    if config.neighbor_mode is not None and manifest.neighbor_mode != "pose":
        raise DataMismatchError(
            "neighbor modality %r needs keypoint data but the dataset "
            "stores %r" % (config.neighbor_mode, manifest.neighbor_mode))
    slots = manifest.dims()["neighbors"][0]
    if config.neighbor_mode is not None and config.max_neighbors > slots:
        raise DataMismatchError(
            "model expects %d neighbor slots, dataset has %d"
            % (config.max_neighbors, slots))
    if config.scene_mode is not None and config.scene_mode not in manifest.scene_modes:
        raise DataMismatchError(
            "scene modality %r not present in the dataset (has: %s)"
            % (config.scene_mode, ", ".join(manifest.scene_modes)))


def assemble_arrays(samples, config: ModelConfig):
    """Returns (inputs dict of (N, t_obs, w) arrays, targets (N, t_pred, 7))."""
    if not samples:
        raise ValueError("no samples to assemble")
    n = len(samples)
    inputs = {"ego": np.stack([s.ego_past for s in samples])}
    mode = config.neighbor_mode
    if mode is not None:
        rows = np.empty((n, config.t_obs, config.neighbor_dim))
        for i, s in enumerate(samples):
            neighbors = s.neighbors[:config.max_neighbors]
            rows[i] = neighbor_representation(neighbors, mode)
        inputs["neighbors"] = rows
    if config.scene_mode == "semantic":
        inputs["scene"] = np.stack([s.scene_semantic for s in samples])
    elif config.scene_mode == "depth":
        inputs["scene"] = np.stack([s.scene_depth for s in samples])
    targets = np.stack([s.ego_future for s in samples])
    return inputs, targets


def take_rows(inputs, targets, idx):
    batch = {k: np.ascontiguousarray(v[idx]) for k, v in inputs.items()}
    return batch, np.ascontiguousarray(targets[idx])
