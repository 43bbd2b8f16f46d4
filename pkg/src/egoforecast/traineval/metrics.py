"""Metric suite: overall / position / orientation MSE and horizon table.

Position error averages the squared error of the 3 position components,
orientation the 4 quaternion components, and the overall error is their
component-count-weighted combination (3*pos + 4*orient)/7, which equals
the plain mean over all 7 pose components.  The horizon table gives the
error over the first k prediction steps for horizons {1.0s .. 3.0s} at
the dataset frame rate (cumulative by default; a per-step variant is
available behind a flag).
"""
from dataclasses import dataclass, field
import json

import numpy as np

HORIZONS_S = (1.0, 1.5, 2.0, 2.5, 3.0)


@dataclass
class MetricsReport:
    mse_overall: float
    mse_position: float
    mse_orientation: float
    horizon: dict                 # {"1.0s": mse, ...} insertion-ordered
    sample_count: int
    model_label: str = ""
    modality_label: str = ""
    horizon_mode: str = "cumulative"

    def validate(self):
        ident = (3.0 * self.mse_position + 4.0 * self.mse_orientation) / 7.0
        if abs(self.mse_overall - ident) > 1e-12:
            raise ValueError(
                "overall MSE %.17g breaks the (3*pos + 4*orient)/7 identity "
                "(%.17g)" % (self.mse_overall, ident))
        values = [self.mse_overall, self.mse_position, self.mse_orientation]
        values += list(self.horizon.values())
        if any(v < 0 for v in values):
            raise ValueError("negative metric entry")

    def to_dict(self):
        return {
            "model": self.model_label,
            "modalities": self.modality_label,
            "sample_count": self.sample_count,
            "mse_overall": self.mse_overall,
            "mse_position": self.mse_position,
            "mse_orientation": self.mse_orientation,
            "horizon_mode": self.horizon_mode,
            "horizon": dict(self.horizon),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self):
        lines = [
            "model\t%s" % self.model_label,
            "modalities\t%s" % self.modality_label,
            "samples\t%d" % self.sample_count,
            "mse_overall\t%.6e" % self.mse_overall,
            "mse_position\t%.6e" % self.mse_position,
            "mse_orientation\t%.6e" % self.mse_orientation,
        ]
        for name, value in self.horizon.items():
            lines.append("pred@%s\t%.6e" % (name, value))
        return "\n".join(lines) + "\n"


def overall_from_parts(position, orientation):
    """The component-count-weighted identity used everywhere."""
    return (3.0 * position + 4.0 * orientation) / 7.0


def metrics_from_predictions(preds, targets, fps=2.0, model_label="",
                             modality_label="", per_step_horizon=False):
    """Build a MetricsReport from (N, t_pred, 7) arrays."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape or preds.ndim != 3 or preds.shape[2] != 7:
        raise ValueError(
            "need matching (N, t_pred, 7) arrays, got %r and %r"
            % (preds.shape, targets.shape))
    err = (preds - targets) ** 2
    pos = float(np.mean(err[:, :, :3]))
    orient = float(np.mean(err[:, :, 3:]))
    t_pred = preds.shape[1]
    horizon = {}
    for h in HORIZONS_S:
        steps = int(round(h * fps))
        if steps < 1 or steps > t_pred:
            continue
        if per_step_horizon:
            horizon["%.1fs" % h] = float(np.mean(err[:, steps - 1, :]))
        else:
            horizon["%.1fs" % h] = float(np.mean(err[:, :steps, :]))
    report = MetricsReport(
        mse_overall=overall_from_parts(pos, orient),
        mse_position=pos,
        mse_orientation=orient,
        horizon=horizon,
        sample_count=preds.shape[0],
        model_label=model_label,
        modality_label=modality_label,
        horizon_mode="per-step" if per_step_horizon else "cumulative",
    )
    report.validate()
    return report


def horizon_metrics(preds, targets, fps=2.0, horizons=HORIZONS_S,
                    per_step=False):
    """Explicit horizon table; errors if a horizon exceeds t_pred."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    err = (preds - targets) ** 2
    t_pred = preds.shape[1]
    out = {}
    for h in horizons:
        steps = int(round(h * fps))
        if steps > t_pred:
            raise ValueError(
                "horizon %.1fs needs %d steps but predictions cover %d"
                % (h, steps, t_pred))
        if per_step:
            out["%.1fs" % h] = float(np.mean(err[:, steps - 1, :]))
        else:
            out["%.1fs" % h] = float(np.mean(err[:, :steps, :]))
    return out
