"""Durations and monotonic alignment paths are two views of the same thing.

Run: python demos/alignment_algebra.py
"""

import numpy as np

from durkit import DurationSequence, alignment_distance, durations_from_alignment, expand, mse_metric
from durkit.align import allocate_frames

d = DurationSequence([2, 3, 1, 4])
path = expand(d)
print("durations        ", d.durations, "total", d.total)
print("frame -> phoneme ", path.frame_to_phoneme)
print("round trip       ", durations_from_alignment(path).durations)

pred = np.array([2.4, 2.6, 1.2, 3.5])
print(f"MSE vs prediction {mse_metric(d, pred):.4f} frames^2, distance {alignment_distance(d, pred):.4f}")

# a target length is met exactly by a largest-remainder split
print("rescaled to 15   ", allocate_frames(pred, 15).tolist())
