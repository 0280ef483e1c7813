"""Lesion studies of a single-pattern bipolar autoassociative net."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .net import (
    Conventions,
    DamageSpec,
    TrainedNet,
    ValidationError,
    apply_damage,
    as_bipolar,
    forward,
    is_success,
    local_field,
    train,
)
from .recall import RecallCurve, exact_recall_prob, mc_recall_estimate, recall_curve
