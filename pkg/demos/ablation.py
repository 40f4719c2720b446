"""Which conditioning signal matters: attributes, semantics, or both.

Run: python demos/ablation.py
"""

from durkit.data import SyntheticSpec, generate_synthetic
from durkit.eval import TrainConfig, format_table, run_ablation

manifest = generate_synthetic(SyntheticSpec(num_utterances=800, seed=3))
reports = run_ablation(manifest, TrainConfig(steps=300, seeds=(0, 1)))
print(format_table(reports, extra=("E-Var",)))
