"""durkit: phoneme-duration modeling for non-autoregressive speech synthesis.

The core model, :class:`~durkit.model.DurFormer`, predicts a Gaussian over
every phoneme's duration conditioned on speaking speed, speech scene and a
sentence-level semantic vector.  Around it sit the alignment algebra, a
lexicon/TextGrid front end, comparison baselines, synthetic corpora and a
multi-seed evaluation harness.
"""

from .align import (AlignmentError, AlignmentPath, DurationSequence, PhonemeSequence, alignment_distance,
                    durations_from_alignment, expand, mse_metric)
from .model import DurFormer, GaussianDurationPrediction, ModelConfig, nll_loss, sample_durations

__version__ = "0.1.0"

__all__ = [
    "AlignmentError", "AlignmentPath", "DurationSequence", "PhonemeSequence", "alignment_distance",
    "durations_from_alignment", "expand", "mse_metric", "DurFormer", "GaussianDurationPrediction", "ModelConfig",
    "nll_loss", "sample_durations",
]
