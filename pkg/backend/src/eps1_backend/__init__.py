"""Noise-estimator backend speaking the EPS1 stdin/stdout tensor protocol.

One process serves one session: each length-prefixed request frame carries
a step index, a condition string and a float32 tensor; the response is a
float32 noise prediction of identical dimensions.  The process never sees
keys or payloads, only latents, steps and condition strings.
"""

__version__ = "0.1.0"
