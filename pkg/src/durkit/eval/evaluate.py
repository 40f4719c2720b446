"""Per-seed evaluation and cross-seed aggregation of duration predictors."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..align import mse_metric
from ..checkpoint import Checkpoint
from ..frontend.record import UtteranceRecord
from ..predictor import Predictor


class RunningVariance:
    """Welford accumulator for the population mean and variance."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.m2 += delta * (x - self.mean)

    @property
    def variance(self) -> float:
        return self.m2 / self.n if self.n else 0.0


@dataclass
class EvalReport:
    """MSE statistics of one method over one or more seeded runs.

    ``evar`` is the variance of per-utterance MSE pooled over all seeds.
    Every seed is scored on the same split, so the pooled value follows
    from the per-seed means and variances alone.
    """

    method: str
    family: str
    params: int
    split: str
    seeds: list[int]
    per_seed_mse: list[float]
    per_seed_evar: list[float]
    config_hash: str = ""
    wall_clock: float = 0.0
    # per-seed arrays of per-utterance MSE; kept in memory only
    errors: list[np.ndarray] | None = field(default=None, compare=False, repr=False)

    @property
    def mse_avg(self) -> float:
        return float(np.mean(self.per_seed_mse))

    @property
    def mse_min(self) -> float:
        return float(np.min(self.per_seed_mse))

    @property
    def mse_max(self) -> float:
        return float(np.max(self.per_seed_mse))

    @property
    def mse_std(self) -> float:
        return float(np.std(self.per_seed_mse, ddof=1)) if len(self.per_seed_mse) > 1 else 0.0

    @property
    def mse_sem(self) -> float:
        """Standard error of the seed-averaged MSE."""
        return self.mse_std / np.sqrt(len(self.per_seed_mse))

    @property
    def evar(self) -> float:
        means = np.asarray(self.per_seed_mse)
        return float(np.mean(self.per_seed_evar) + np.mean((means - means.mean()) ** 2))

    def to_dict(self) -> dict:
        return {"method": self.method, "family": self.family, "params": self.params, "split": self.split,
                "seeds": list(self.seeds), "per_seed_mse": list(self.per_seed_mse),
                "per_seed_evar": list(self.per_seed_evar), "mse_avg": self.mse_avg, "mse_min": self.mse_min,
                "mse_max": self.mse_max, "evar": self.evar, "config_hash": self.config_hash,
                "wall_clock": self.wall_clock}


def score_predictions(gold: Sequence[Sequence[int]], pred: Sequence[Sequence[int]]) -> tuple[float, float, np.ndarray]:
    """Utterance-averaged MSE, variance of per-utterance MSE, and the per-utterance values."""
    if not gold:
        raise ValueError("nothing to evaluate: split is empty")
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} references but {len(pred)} predictions")
    acc = RunningVariance()
    errors = np.empty(len(gold))
    for i, (g, p) in enumerate(zip(gold, pred)):
        errors[i] = mse_metric(g, p)
        acc.update(errors[i])
    return acc.mean, acc.variance, errors


def evaluate(checkpoint: Checkpoint | Predictor, records: Sequence[UtteranceRecord], seed: int | None = None,
             split: str = "test", method: str | None = None) -> EvalReport:
    """Score one checkpoint on ``records``; never modifies the checkpoint."""
    start = time.perf_counter()
    predictor = checkpoint if isinstance(checkpoint, Predictor) else Predictor(checkpoint)
    run_seed = int(predictor.meta.get("seed", 0)) if seed is None else seed
    pred = predictor.predict_records(records, seed=run_seed)
    mse, evar, errors = score_predictions([r.durations for r in records], pred)
    return EvalReport(method or predictor.method, predictor.family.name, predictor.params, split, [run_seed],
                      [mse], [evar], predictor.meta.get("config_hash", ""), time.perf_counter() - start, [errors])


def aggregate(reports: Iterable[EvalReport], method: str | None = None) -> EvalReport:
    """Merge single- or multi-seed reports of one method into one report."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to aggregate")
    first = reports[0]
    methods = {r.method for r in reports}
    if method is None and len(methods) > 1:
        raise ValueError(f"cannot aggregate different methods {sorted(methods)}")
    errors = None
    if all(r.errors is not None for r in reports):
        errors = [e for r in reports for e in r.errors]
    return EvalReport(method or first.method, first.family, first.params, first.split,
                      [s for r in reports for s in r.seeds], [m for r in reports for m in r.per_seed_mse],
                      [v for r in reports for v in r.per_seed_evar], first.config_hash,
                      sum(r.wall_clock for r in reports), errors)


def group_reports(reports: Iterable[EvalReport]) -> list[EvalReport]:
    """Aggregate reports per method, keeping first-seen method order."""
    groups: dict[str, list[EvalReport]] = {}
    for r in reports:
        groups.setdefault(r.method, []).append(r)
    return [aggregate(g) for g in groups.values()]


def gap_is_significant(better: EvalReport, worse: EvalReport, factor: float = 2.0) -> tuple[bool, float, float]:
    """Is ``worse.mse_avg - better.mse_avg`` larger than ``factor`` pooled standard errors?

    The pooled standard error of the difference of two seed means is
    ``sqrt(s_a^2 / n_a + s_b^2 / n_b)``.  Returns (verdict, gap, pooled_se).
    """
    gap = worse.mse_avg - better.mse_avg
    se = float(np.sqrt(better.mse_sem ** 2 + worse.mse_sem ** 2))
    return gap > factor * se, gap, se
