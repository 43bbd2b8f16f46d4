"""Model configuration and modality selection.

A modality label such as ``"Y+P+S"`` names the active input streams:
``Y`` ego trajectory (always required), at most one neighbor
representation out of ``C`` (body centers), ``B`` (bounding boxes),
``P`` (full 2D poses), and at most one scene encoding out of ``S``
(semantic grid), ``D`` (depth grid).
"""
from dataclasses import dataclass, field, asdict

# per-person widths of each neighbor representation
NEIGHBOR_PERSON_DIMS = {"center": 2, "bbox": 4, "pose": 52}

_NEIGHBOR_TOKENS = {"C": "center", "B": "bbox", "P": "pose"}
_SCENE_TOKENS = {"S": "semantic", "D": "depth"}

MODEL_KINDS = ("cxa", "triple_lstm", "lip_lstm")


class ConfigError(ValueError):
    pass


def parse_modalities(label):
    """Parse a label like 'Y+P+S' -> (neighbor_mode, scene_mode).

    Either mode may come back None.  Raises ConfigError on unknown
    tokens, duplicates, or a missing Y.
    """
    tokens = [t.strip().upper() for t in str(label).split("+") if t.strip()]
    if not tokens:
        raise ConfigError("empty modality label")
    neighbor = None
    scene = None
    seen_y = False
    for tok in tokens:
        if tok == "Y":
            if seen_y:
                raise ConfigError("duplicate Y in modality label %r" % label)
            seen_y = True
        elif tok in _NEIGHBOR_TOKENS:
            if neighbor is not None:
                raise ConfigError(
                    "modality label %r selects more than one neighbor "
                    "representation" % label)
            neighbor = _NEIGHBOR_TOKENS[tok]
        elif tok in _SCENE_TOKENS:
            if scene is not None:
                raise ConfigError(
                    "modality label %r selects more than one scene encoding"
                    % label)
            scene = _SCENE_TOKENS[tok]
        else:
            raise ConfigError(
                "unknown modality token %r in %r (valid: Y, C, B, P, S, D)"
                % (tok, label))
    if not seen_y:
        raise ConfigError(
            "modality label %r lacks the ego stream Y, which is mandatory"
            % label)
    return neighbor, scene


def canonical_label(neighbor_mode, scene_mode):
    parts = ["Y"]
    if neighbor_mode is not None:
        inv = {v: k for k, v in _NEIGHBOR_TOKENS.items()}
        parts.append(inv[neighbor_mode])
    if scene_mode is not None:
        inv = {v: k for k, v in _SCENE_TOKENS.items()}
        parts.append(inv[scene_mode])
    return "+".join(parts)


@dataclass
class ModelConfig:
    kind: str = "cxa"                 # cxa | triple_lstm | lip_lstm
    d_model: int = 512
    n_heads: int = 4
    d_ff: int = 2048
    n_encoder_layers: int = 3
    n_decoder_layers: int = 3
    t_obs: int = 3
    t_pred: int = 7
    modalities: str = "Y+P+S"
    max_neighbors: int = 5
    ego_dim: int = 7
    scene_dim: int = 648
    lstm_hidden: int = 0              # 0 means: use d_model

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(
                "unknown model kind %r (valid: %s)"
                % (self.kind, ", ".join(MODEL_KINDS)))
        if self.d_model < 1 or self.d_model % self.n_heads != 0:
            raise ConfigError(
                "d_model=%d must be a positive multiple of n_heads=%d"
                % (self.d_model, self.n_heads))
        if self.t_obs < 1 or self.t_pred < 1:
            raise ConfigError(
                "t_obs=%d and t_pred=%d must both be >= 1"
                % (self.t_obs, self.t_pred))
        if self.d_ff < 1 or self.n_encoder_layers < 1 or self.n_decoder_layers < 1:
            raise ConfigError("layer sizes and counts must be >= 1")
        # normalizes the label and checks its grammar
        nb, sc = parse_modalities(self.modalities)
        self.modalities = canonical_label(nb, sc)

    @property
    def neighbor_mode(self):
        return parse_modalities(self.modalities)[0]

    @property
    def scene_mode(self):
        return parse_modalities(self.modalities)[1]

    @property
    def neighbor_dim(self):
        """Total neighbor input width per timestep (all slots), 0 if inactive."""
        mode = self.neighbor_mode
        if mode is None:
            return 0
        return self.max_neighbors * NEIGHBOR_PERSON_DIMS[mode]

    @property
    def hidden(self):
        return self.lstm_hidden if self.lstm_hidden > 0 else self.d_model

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(
                "unknown model config keys: %s" % ", ".join(sorted(extra)))
        return cls(**d)
