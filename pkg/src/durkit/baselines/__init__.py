"""Comparison duration predictors: Ratio-Scale, a FastSpeech2-style regressor, flow matching."""

from .flowmatch import FlowMatchConfig, FlowMatchDuration, euler_integrate, straight_path
from .ratio import RatioScaleCalibration, ratio_scale_predict, ratio_scale_total
from .regressor import DurationRegressor, RegressorConfig, match_parameter_count

__all__ = [
    "FlowMatchConfig", "FlowMatchDuration", "euler_integrate", "straight_path",
    "RatioScaleCalibration", "ratio_scale_predict", "ratio_scale_total",
    "DurationRegressor", "RegressorConfig", "match_parameter_count",
]
