"""Write test fixtures for the UI suite into the directory given as argv[1].

Emits two sessions' worth of input:
  bitten.png / bitten.json    one margin bite, plus its closure control
                              points and the true border damage
  speckled.png / speckled.json  holes and background speckles, with the
                                speckle sizes so a test can raise min_size
                                past them
"""

import json
import math
import sys
from pathlib import Path

from leafbite import synth
from leafbite.imaging import save_png

out = Path(sys.argv[1])
out.mkdir(parents=True, exist_ok=True)

bitten = synth.random_leaf_spec(seed=11, bites=1, max_holes=0, max_speckles=0, width=256, height=256)
image, truth = synth.generate_leaf(bitten)
save_png(image, out / "bitten.png")
curve = synth.bite_control_points(bitten, 0)
(out / "bitten.json").write_text(
    json.dumps(
        {
            "width": bitten.width,
            "height": bitten.height,
            "control_points": [[p.x, p.y] for p in curve.control_points],
            "border_damage_px": truth.border_damage_px,
        }
    )
)

speckled = synth.random_leaf_spec(seed=7, max_holes=3, max_speckles=3, width=256, height=256)
image, truth = synth.generate_leaf(speckled)
if not speckled.speckles:
    raise SystemExit("seed 7 no longer produces speckles, pick another")
save_png(image, out / "speckled.png")
(out / "speckled.json").write_text(
    json.dumps(
        {
            "width": speckled.width,
            "height": speckled.height,
            "max_speckle_px": max(int(math.pi * d.r * d.r) + 8 for d in speckled.speckles),
            "leaf_foreground_px": truth.leaf_foreground_px,
        }
    )
)

print("fixtures written to", out)
