#!/usr/bin/env python3
"""Full real-key session: secret -> noise -> container -> stego -> secret.

The secret never leaves the sender as-is: a deterministic solver drives it
to noise under the private condition and regenerates a different container
image under the public condition.  Both conditions plus an integrity
digest ride inside the container at key-selected positions.
"""

from diffstego import pipeline
from diffstego.chaos import RealKey
from diffstego.synth import blocky_secret

key = RealKey.from_decimals("3.712345678901234", "0.5678901234567890")
secret = blocky_secret(seed=11, size=64)

req = pipeline.HideRequest(
    secret=secret,
    k_pri="a butterfly",
    k_pub="a flower",
    real_key=key,
)
stego, report = pipeline.hide_with_report(req)
print("sender:")
print(f"  payload bits embedded: {report['payload_bits']}")
print(f"  container capacity:    {report['capacity']['net']} bits net")
print(f"  positions required:    {5 * report['payload_bits']} (5 per bit)")

result = pipeline.reveal(stego, key, req.config)
print("\nreceiver:")
print(f"  verdict:     {result.verdict}")
print(f"  k_pri:       {result.k_pri!r}")
print(f"  k_pub:       {result.k_pub!r}")
print(f"  secret PSNR: {pipeline.psnr(secret, result.secret):.1f} dB")

wrong = RealKey(key.mu_fixed, key.a0_fixed + 1)
bad = pipeline.reveal(stego, wrong, req.config)
print(f"\nwrong key verdict: {bad.verdict} (recovery refused)")
