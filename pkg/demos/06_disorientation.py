"""Position-encoded messages and the disorientation agent.

A message is carried by which cardinal band holds an orange box. The agent
reads the position, removes the box with the chroma-keyed removal pipeline,
and repaints it in a different band - so the original recipient decodes the
wrong message every time.
"""

from pathlib import Path

import numpy as np

from morphomod.datagen import classify_position, disorient, synth_disorient
from morphomod.raster import save_png

out = Path(__file__).parent / "out" / "06"
out.mkdir(parents=True, exist_ok=True)

total = 40
original_hits = 0
stale_reads = 0
for index in range(total):
    sample = synth_disorient(np.random.default_rng((400, index)))
    original_hits += classify_position(sample.image) == sample.label
    moved, old_label, new_label = disorient(
        sample.image, np.random.default_rng((401, index))
    )
    stale_reads += classify_position(moved) == sample.label
    if index < 4:
        save_png(sample.image, out / f"{index}_{old_label}.png")
        save_png(moved, out / f"{index}_{old_label}_to_{new_label}.png")
        print(f"sample {index}: box moved {old_label} -> {new_label}")

print(f"\nclassifier on originals:    {100.0 * original_hits / total:.1f}% correct")
print(f"original labels after move: {100.0 * stale_reads / total:.1f}% correct "
      f"(the intended reading is always wrong)")
print(f"artifacts in {out}")
