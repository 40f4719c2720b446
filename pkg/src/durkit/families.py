"""Uniform build/train/predict hooks for every predictor family.

Sizes ``S`` and ``L`` are desk-scale presets.  The regressor's presets
have their variance-predictor width chosen so the whole network matches
the DurFormer of the same size in parameter count.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import torch

from .baselines.flowmatch import FlowMatchConfig, FlowMatchDuration
from .baselines.ratio import RatioScaleCalibration, ratio_scale_predict
from .baselines.regressor import DurationRegressor, RegressorConfig, match_parameter_count
from .batching import Batch, EncodedCorpus
from .model import DurFormer, ModelConfig, nll_loss, sample_durations
from .nn import count_parameters

SIZES = ("S", "L")

_ENCODER_SIZES = {
    "S": dict(d_model=32, num_encoder_layers=2, num_heads=2, d_ff=64),
    "L": dict(d_model=64, num_encoder_layers=3, num_heads=4, d_ff=128),
}
_FLOW_EXTRA = {"S": dict(num_velocity_layers=1, time_dim=16), "L": dict(num_velocity_layers=2, time_dim=32)}


def _check_size(size: str) -> None:
    if size not in SIZES:
        raise ValueError(f"unknown size {size!r}; expected one of {SIZES}")


class Family:
    name = ""
    uses_semantic = False
    config_cls = None
    model_cls = None

    def default_config(self, size: str, vocab_size: int, num_scenes: int, d_sem: int) -> dict:
        raise NotImplementedError

    def build(self, config: dict):
        return self.model_cls(self.config_cls.from_dict(config))

    def prepare(self, model, corpus: EncodedCorpus) -> dict:
        """Data-dependent initialization; returns metadata to store."""
        return {}

    def loss(self, model, batch: Batch, generator: torch.Generator) -> torch.Tensor:
        raise NotImplementedError

    def predict(self, model, batch: Batch, meta: dict, seed: int = 0) -> list[np.ndarray]:
        raise NotImplementedError


def _flat_durations(corpus: EncodedCorpus) -> np.ndarray:
    return np.concatenate(corpus.durations) if len(corpus) else np.ones(1)


def _split_rows(frames: torch.Tensor, mask: torch.Tensor) -> list[np.ndarray]:
    return [frames[b][mask[b]].cpu().numpy().astype(np.int64) for b in range(frames.shape[0])]


class DurFormerFamily(Family):
    name = "durformer"
    uses_semantic = True
    config_cls = ModelConfig
    model_cls = DurFormer

    def default_config(self, size, vocab_size, num_scenes, d_sem):
        _check_size(size)
        return ModelConfig(vocab_size=vocab_size, num_scenes=num_scenes, d_sem=d_sem, dropout=0.0,
                           **_ENCODER_SIZES[size]).to_dict()

    def prepare(self, model, corpus):
        d = _flat_durations(corpus)
        model.init_output_bias(d.mean(), d.std())
        return {}

    def loss(self, model, batch, generator):
        pred = model(batch.ids, batch.mask, batch.speed, batch.scene, batch.g)
        return nll_loss(pred, batch.durations, batch.mask)

    def predict(self, model, batch, meta, seed=0, mode="mean"):
        with torch.no_grad():
            pred = model(batch.ids, batch.mask, batch.speed, batch.scene, batch.g)
        out = []
        for b in range(batch.ids.shape[0]):
            mu, sigma = pred.utterance(b)
            out.append(sample_durations(mu, sigma, mode=mode, seed=seed + b).as_array())
        return out


class RegressorFamily(Family):
    name = "regressor"
    config_cls = RegressorConfig
    model_cls = DurationRegressor

    def default_config(self, size, vocab_size, num_scenes, d_sem):
        _check_size(size)
        target = count_parameters(DurFormer(ModelConfig.from_dict(
            DurFormerFamily().default_config(size, vocab_size, num_scenes, d_sem))))
        base = RegressorConfig(vocab_size=vocab_size, dropout=0.0, **_ENCODER_SIZES[size])
        return match_parameter_count(target, base).to_dict()

    def prepare(self, model, corpus):
        model.init_output_bias(float(np.log1p(_flat_durations(corpus)).mean()))
        return {}

    def loss(self, model, batch, generator):
        return model.loss(batch.ids, batch.mask, batch.durations)

    def predict(self, model, batch, meta, seed=0):
        return _split_rows(model.predict_frames(batch.ids, batch.mask), batch.mask)


class FlowMatchFamily(Family):
    name = "flowmatch"
    config_cls = FlowMatchConfig
    model_cls = FlowMatchDuration

    def default_config(self, size, vocab_size, num_scenes, d_sem):
        _check_size(size)
        return FlowMatchConfig(vocab_size=vocab_size, **_ENCODER_SIZES[size], **_FLOW_EXTRA[size]).to_dict()

    def prepare(self, model, corpus):
        d = _flat_durations(corpus)
        model.set_normalization(d.mean(), d.std())
        return {"normalization": {"mean": float(d.mean()), "std": float(d.std())}}

    def loss(self, model, batch, generator):
        return model.loss(batch.ids, batch.mask, batch.durations, generator)

    def predict(self, model, batch, meta, seed=0):
        gen = torch.Generator().manual_seed(int(seed))
        return _split_rows(model.sample(batch.ids, batch.mask, gen), batch.mask)


class RatioFamily(Family):
    """No weights: calibrated on the pooled frames/tokens ratio of the training split."""

    name = "ratio"

    def default_config(self, size, vocab_size, num_scenes, d_sem):
        return {}

    def build(self, config):
        return None

    def prepare(self, model, corpus):
        cal = RatioScaleCalibration.from_records(corpus.records)
        return {"calibration": {"ref_tokens": cal.ref_tokens, "ref_frames": cal.ref_frames}}

    def predict(self, model, batch, meta, seed=0):
        cal = RatioScaleCalibration(**meta["calibration"])
        return [ratio_scale_predict(cal, n).as_array() for n in batch.lengths]


FAMILIES = {f.name: f for f in (DurFormerFamily(), RegressorFamily(), FlowMatchFamily(), RatioFamily())}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise ValueError(f"unknown family {name!r}; expected one of {sorted(FAMILIES)}") from None


def resolve_config(family: str, size: str, vocab_size: int, num_scenes: int, d_sem: int,
                   overrides: dict | None = None) -> dict:
    fam = get_family(family)
    cfg = fam.default_config(size, vocab_size, num_scenes, d_sem)
    if overrides:
        unknown = set(overrides) - set(cfg) if fam.config_cls else set(overrides)
        if unknown:
            raise ValueError(f"unknown {family} config keys: {sorted(unknown)}")
        cfg = {**cfg, **overrides}
        if fam.config_cls:
            cfg = fam.config_cls.from_dict(cfg).to_dict()
    return cfg
