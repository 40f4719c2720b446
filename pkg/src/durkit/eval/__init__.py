"""Training orchestration, evaluation, experiment runners and reports."""

from .evaluate import EvalReport, RunningVariance, aggregate, evaluate, gap_is_significant, group_reports, \
    score_predictions
from .experiments import (ABLATION_ROWS, MismatchResult, RunSpec, ablation_specs, bench, pick_mismatched_prompts,
                          prompt_mismatch, run_ablation, run_matrix, summarize)
from .report import CSV_COLUMNS, TABLE_COLUMNS, emit_report, format_csv, format_table, load_csv, parse_csv, render_svg
from .training import NumericalError, TrainConfig, TrainResult, train_model

__all__ = [
    "EvalReport", "RunningVariance", "aggregate", "evaluate", "gap_is_significant", "group_reports",
    "score_predictions", "ABLATION_ROWS", "MismatchResult", "RunSpec", "ablation_specs", "bench",
    "pick_mismatched_prompts", "prompt_mismatch", "run_ablation", "run_matrix", "summarize", "emit_report",
    "CSV_COLUMNS", "TABLE_COLUMNS", "format_csv", "format_table", "load_csv", "parse_csv", "render_svg", "NumericalError", "TrainConfig",
    "TrainResult", "train_model",
]
