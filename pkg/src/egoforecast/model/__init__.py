from .config import (ConfigError, ModelConfig, NEIGHBOR_PERSON_DIMS,
                     canonical_label, parse_modalities)
from .layers import causal_mask, sinusoidal_positions
from .fusion import cascaded_cross_attention
from .transformer import CXATransformer
from .lstm import LIPLSTM, TripleStreamLSTM


def build_model(config, seed=0):
    """Instantiate the model kind named by the config, seeded."""
    if config.kind == "cxa":
        return CXATransformer(config, seed)
    if config.kind == "triple_lstm":
        return TripleStreamLSTM(config, seed)
    if config.kind == "lip_lstm":
        return LIPLSTM(config, seed)
    raise ConfigError("unknown model kind %r" % config.kind)


from .checkpoint import (CheckpointError, CheckpointShapeError,
                         CheckpointTruncatedError, CheckpointVersionError,
                         load_checkpoint, save_checkpoint)

__all__ = [
    "ModelConfig", "ConfigError", "NEIGHBOR_PERSON_DIMS",
    "parse_modalities", "canonical_label",
    "sinusoidal_positions", "causal_mask", "cascaded_cross_attention",
    "CXATransformer", "TripleStreamLSTM", "LIPLSTM", "build_model",
    "save_checkpoint", "load_checkpoint", "CheckpointError",
    "CheckpointVersionError", "CheckpointTruncatedError",
    "CheckpointShapeError",
]
