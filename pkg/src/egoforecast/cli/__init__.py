from .configure import CliConfigError, echo_config, materialize, resolve_config
from .main import build_parser, main
from .presets import PRESETS, preset_config

__all__ = ["CliConfigError", "PRESETS", "build_parser", "echo_config",
           "main", "materialize", "preset_config", "resolve_config"]
