"""Train a small DurFormer on a synthetic corpus and query it.

Shows how the speed and scene attributes move the predicted durations
and how ``rescale:T`` meets a fixed total.  Takes about half a minute.

Run: python demos/train_and_predict.py
"""

import tempfile
from pathlib import Path

from durkit.checkpoint import Checkpoint
from durkit.data import SyntheticSpec, generate_synthetic
from durkit.eval import TrainConfig, evaluate, train_model
from durkit.predictor import Predictor

manifest = generate_synthetic(SyntheticSpec(num_utterances=600, seed=1))
print("corpus:", manifest.counts())

result = train_model("durformer", manifest, TrainConfig(steps=300), seed=0, size="S")
print(f"trained {result.checkpoint.metadata['params']} params, final loss {result.losses[-1][1]:.3f}")

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "durformer.safetensors"
    result.checkpoint.save(path)
    predictor = Predictor(Checkpoint.load(path))

print(f"test MSE {evaluate(predictor, manifest.split('test')).mse_avg:.3f} frames^2")

record = manifest.split("test")[0]
words = record.text
for speed in (0, 2, 4):
    d = predictor.predict_text(words, speed, scene=0)
    print(f"speed {speed}: total {int(d.sum()):4d}  {d.tolist()}")
for scene in manifest.scenes:
    print(f"{scene:>9}: total {int(predictor.predict_text(words, 2, scene).sum())}")
print("sampled  :", predictor.predict_text(words, 2, 0, mode="sample", seed=3).tolist())
print("rescale  :", predictor.predict_text(words, 2, 0, mode="rescale:60", seed=3).tolist())
