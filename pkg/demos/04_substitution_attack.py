#!/usr/bin/env python3
"""Substitution attacks against ten stego objects.

An adversary swaps the transmitted stego image for another object of the
same format.  The embedded digest binds the container and both conditions,
so replacement or even a single-pixel touch flips the verdict.
"""

import numpy as np

from diffstego import pipeline
from diffstego.chaos import RealKey
from diffstego.images import PixelGrid
from diffstego.synth import blocky_secret

key = RealKey.from_decimals("3.666666666666666", "0.1234567890123456")
cfg = pipeline.PipelineConfig()
rng = np.random.default_rng(4)

print(f"{'object':8} {'untampered':>12} {'replaced':>10} {'1px tamper':>12}")
for i in range(10):
    req = pipeline.HideRequest(
        secret=blocky_secret(seed=40 + i), k_pri=f"pri{i}", k_pub=f"pub{i}",
        real_key=key, config=cfg,
    )
    stego = pipeline.hide(req)

    ok = pipeline.substitution_attack(stego, stego, key, cfg)
    replacement = blocky_secret(seed=90 + i)
    swapped = pipeline.substitution_attack(stego, replacement, key, cfg)

    arr = stego.array.copy()
    arr[rng.integers(0, 64), rng.integers(0, 64)] ^= 1
    touched = pipeline.substitution_attack(stego, PixelGrid(arr), key, cfg)

    print(
        f"({chr(97 + i)})      "
        f"{'pass' if not ok.detected else 'FAIL':>12} "
        f"{'caught' if swapped.detected else 'MISSED':>10} "
        f"{'caught' if touched.detected else 'MISSED':>12}"
    )
