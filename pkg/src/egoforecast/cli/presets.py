"""Named configuration presets.

``desk`` fits a workstation-scale run (small model, small dataset,
minutes not hours) and is the default.  ``paper`` is the full-scale
schedule: d_model 512, batch 1024, 300 epochs over a ~10k-sample set.
"""
import copy

_DESK = {
    "preset": "desk",
    "model": {
        "kind": "cxa",
        "d_model": 128,
        "n_heads": 4,
        "d_ff": 512,
        "n_encoder_layers": 3,
        "n_decoder_layers": 3,
        "t_obs": 3,
        "t_pred": 7,
        "modalities": "Y+P+S",
        "max_neighbors": 5,
        "ego_dim": 7,
        "scene_dim": 648,
        "lstm_hidden": 0,
    },
    "train": {
        "epochs": 40,
        "batch_size": 64,
        "lr": 3e-4,
        "seed": 0,
        "clip_norm": 0.0,
        "save_best": False,
    },
    "data": {
        "n_train": 2000,
        "n_val": 0,
        "n_test": 500,
        "master_seed": 0,
        "world": {},
    },
}

_PAPER = copy.deepcopy(_DESK)
_PAPER["preset"] = "paper"
_PAPER["model"].update({"d_model": 512, "d_ff": 2048})
_PAPER["train"].update({"epochs": 300, "batch_size": 1024, "lr": 5e-5})
_PAPER["data"].update({"n_train": 9992, "n_test": 2500})

PRESETS = {"desk": _DESK, "paper": _PAPER}


def preset_config(name="desk"):
    if name not in PRESETS:
        raise KeyError(
            "unknown preset %r (valid: %s)" % (name, ", ".join(sorted(PRESETS))))
    return copy.deepcopy(PRESETS[name])
