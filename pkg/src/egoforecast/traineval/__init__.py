from .batching import DataMismatchError, assemble_arrays, check_compatibility
from .metrics import (HORIZONS_S, MetricsReport, horizon_metrics,
                      metrics_from_predictions, overall_from_parts)
from .trainer import (TrainConfig, TrainResult, TrainingDiverged,
                      epoch_permutation, train, train_from_config)
from .evaluation import (evaluate, evaluate_arrays, predict_arrays,
                         predict_samples)
from .split import derive_manifest, split_samples
from .ablation import (ABLATION_ROWS, AblationRow, ablation_json,
                       ablation_table, run_ablation)

__all__ = [
    "ABLATION_ROWS", "AblationRow", "DataMismatchError", "HORIZONS_S",
    "MetricsReport", "TrainConfig", "TrainResult", "TrainingDiverged",
    "ablation_json", "ablation_table", "assemble_arrays",
    "check_compatibility", "derive_manifest", "epoch_permutation",
    "evaluate", "evaluate_arrays", "horizon_metrics",
    "metrics_from_predictions", "overall_from_parts", "predict_arrays",
    "predict_samples", "run_ablation", "split_samples", "train",
    "train_from_config",
]
