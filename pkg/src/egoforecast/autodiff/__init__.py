from .tensor import Tensor, Tape, active_tape, backward
from .adam import AdamState, NonFiniteGradient
from .gradcheck import gradcheck, random_inputs
from . import ops

__all__ = [
    "Tensor", "Tape", "active_tape", "backward",
    "AdamState", "NonFiniteGradient",
    "gradcheck", "random_inputs", "ops",
]
