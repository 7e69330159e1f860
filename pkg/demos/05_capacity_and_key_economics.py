#!/usr/bin/env python3
"""Capacity accounting and the key-exchange ledger.

Keyed-jump embedding spends five eligible positions per payload bit, so
the required capacity is always 5x the embedded bits.  On the key side,
one 102-bit negotiation covers a whole session, versus per-image condition
transmission for pseudo-key schemes (3568 bits over the published
10-image comparison).
"""

from diffstego import pipeline, rdh
from diffstego.chaos import RealKey
from diffstego.synth import blocky_secret, gradient_secret

print(f"{'image':10} {'eligible':>9} {'payload':>9} {'required':>9}")
for name, img in [
    ("blocky-1", blocky_secret(seed=1)),
    ("blocky-2", blocky_secret(seed=2, size=96)),
    ("terraced", gradient_secret(seed=3, size=96)),
]:
    cap = rdh.image_capacity(img, rdh.CDJB)
    n = cap["net"]
    print(f"{name:10} {cap['eligible']:>9} {n:>9} {rdh.required_positions(n, rdh.CDJB):>9}")

key = RealKey.from_decimals("3.977777777777777", "0.3141592653589793")
ledger = pipeline.SessionLedger()
ledger.negotiate()
for i in range(10):
    req = pipeline.HideRequest(
        secret=blocky_secret(seed=70 + i), k_pri=f"pri{i}", k_pub=f"pub{i}",
        real_key=key, config=pipeline.PipelineConfig(sub_steps=10),
    )
    pipeline.hide(req)
    ledger.record_hide()

report = ledger.report()
print("\nsession ledger after 10 hides:")
print(f"  key-exchange bits (real key):   {report['key_exchange_bits']}")
print(f"  pseudo-key baseline, 10 images: {report['pseudo_key_baseline_bits']}")
