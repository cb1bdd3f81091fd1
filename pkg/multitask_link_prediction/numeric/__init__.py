""" Dense float64 tensors with reverse-mode automatic differentiation. """
from .tape import Tensor, Tape, backward
from .optim import Adam, AdamState, adam_step, clip_gradients
from .gradcheck import finite_diff_check
from . import ops

__all__ = [
    "Tensor",
    "Tape",
    "backward",
    "Adam",
    "AdamState",
    "adam_step",
    "clip_gradients",
    "finite_diff_check",
    "ops",
]
