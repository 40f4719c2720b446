"""DurFormer against the three baselines on one synthetic corpus.

Trains every family for two seeds and prints the multi-seed table plus
the size-vs-error plot as SVG.  Takes under a minute on one CPU.

Run: python demos/compare_baselines.py [out_dir]
"""

import sys
from pathlib import Path

from durkit.data import SyntheticSpec, generate_synthetic
from durkit.eval import TrainConfig, bench, emit_report, format_table, gap_is_significant

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(parents=True, exist_ok=True)
manifest = generate_synthetic(SyntheticSpec(num_utterances=800, seed=2))
train = TrainConfig(steps=300, seeds=(0, 1))

reports = bench(manifest, train, families=("durformer", "regressor", "flowmatch", "ratio"), sizes=("S",))
print(format_table(reports, extra=("E-Var", "Params")))
emit_report(reports, "svg", out / "baselines.svg")
emit_report(reports, "csv", out / "baselines.csv")

by_name = {r.method: r for r in reports}
ok, gap, bound = gap_is_significant(by_name["durformer-S"], by_name["regressor-S"])
print(f"durformer vs regressor: gap {gap:.3f}, 2-sigma bound {bound:.3f}, significant {ok}")
print("wrote", out / "baselines.svg")
