"""Watermark synthesis basics: compositing, exact masks, PNG round trips.

Builds one translucent and one fully opaque watermarked sample on a
procedural host and saves every artifact under demos/out/01/.
"""

from pathlib import Path

import numpy as np

from morphomod.datagen import synth_alpha1, synth_clwd_like, synthetic_host, synthetic_logo
from morphomod.raster import load_png, save_png

out = Path(__file__).parent / "out" / "01"
out.mkdir(parents=True, exist_ok=True)

rng = np.random.default_rng(7)
host = synthetic_host(rng, 256)
logo = synthetic_logo(rng)
save_png(host, out / "host.png")
save_png(logo, out / "logo.png")

translucent, mask_t, spec = synth_clwd_like(host, logo, rng)
print(f"translucent mark: opacity {spec.opacity:.2f}, rotation {spec.rotation:.0f} deg, "
      f"{mask_t.mean() * 100:.1f}% of the host")
save_png(translucent, out / "translucent.png")
save_png(mask_t, out / "translucent.mask.png")

opaque, mask_o, _ = synth_alpha1(host, logo, "s", rng)
print(f"opaque mark: coverage {mask_o.mean() * 100:.2f}% (small-variant target is 6%)")
save_png(opaque, out / "opaque.png")
save_png(mask_o, out / "opaque.mask.png")

# masks are exact: outside them the watermarked image equals the host bit for bit
assert np.array_equal(opaque[~mask_o], host[~mask_o])

# 8-bit PNG round trips stay within one quantization step
reloaded = load_png(out / "translucent.png")
print(f"PNG round-trip worst-case error: {np.abs(reloaded - translucent).max():.6f} "
      f"(bound 1/255 = {1 / 255:.6f})")
print(f"artifacts in {out}")
