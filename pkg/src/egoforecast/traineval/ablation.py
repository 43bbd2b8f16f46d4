"""Modality ablation: retrain the same architecture per input combination.

The grid covers the ego stream alone, each single companion modality,
and each neighbor+scene pairing.  Every row trains from scratch with an
identical seed and schedule; a failing row is recorded and skipped so
the remaining rows still run.
"""
import dataclasses
import json
import traceback

from .trainer import TrainConfig, train_from_config
from .evaluation import evaluate

ABLATION_ROWS = (
    "Y",
    "Y+C", "Y+B", "Y+P", "Y+S", "Y+D",
    "Y+C+S", "Y+B+S", "Y+P+S",
    "Y+C+D", "Y+B+D", "Y+P+D",
)


@dataclasses.dataclass
class AblationRow:
    label: str
    report: object = None         # MetricsReport on success
    error: str = ""

    def to_dict(self):
        if self.error:
            return {"modalities": self.label, "error": self.error}
        return self.report.to_dict()


def run_ablation(model_config, train_samples, test_samples, cfg: TrainConfig,
                 rows=ABLATION_ROWS, log=None, per_step_horizon=False):
    """One pass over the grid with a single seed; returns [AblationRow]."""
    results = []
    for label in rows:
        try:
            row_config = dataclasses.replace(model_config, modalities=label)
            result = train_from_config(row_config, train_samples, cfg)
            report = evaluate(result.model, test_samples,
                              per_step_horizon=per_step_horizon)
            results.append(AblationRow(label=label, report=report))
            if log is not None:
                log("%-6s overall %.6e" % (label, report.mse_overall))
        except Exception as exc:
            results.append(AblationRow(
                label=label,
                error="%s: %s" % (type(exc).__name__, exc)))
            if log is not None:
                log("%-6s FAILED %s" % (label, exc))
                log(traceback.format_exc())
    return results


def ablation_table(results):
    """Tab-separated summary, one line per grid row."""
    lines = ["modalities\tmse_overall\tmse_position\tmse_orientation"]
    for row in results:
        if row.error:
            lines.append("%s\terror\t%s" % (row.label, row.error))
        else:
            r = row.report
            lines.append("%s\t%.6e\t%.6e\t%.6e"
                         % (row.label, r.mse_overall, r.mse_position,
                            r.mse_orientation))
    return "\n".join(lines) + "\n"


def ablation_json(results):
    return json.dumps([row.to_dict() for row in results], indent=2,
                      sort_keys=True)
