#!/usr/bin/env python3
"""The keyed jump schedule.

A real key (mu, a0) drives a piecewise logistic map; each payload bit is
placed at one of five positions inside its own disjoint window, so the
embedding pattern is unpredictable without the key, at a fixed cost of
five eligible positions per bit.
"""

from diffstego.chaos import ChaoticSequence, RealKey, encode_key, jump_positions

key = RealKey.from_decimals("3.799200023214331", "0.8888564633215454")
print(f"real key: mu={key.mu_text} a0={key.a0_text}")
print(f"codeword: {encode_key(key).hex()}  (102 bits, one negotiation per partner)")

seq = ChaoticSequence(key)
print("\nfirst chaotic values:")
for i, v in enumerate(seq.take(8), start=1):
    print(f"  a_{i} = {v:.16f}")

positions = jump_positions(key, 12)
print("\nbit -> selected position (window of 5):")
for i, p in enumerate(positions):
    window = f"({5 * i + 1}..{5 * i + 5})"
    print(f"  bit {i:2d} -> position {p:3d}  window {window}")

flipped = RealKey(key.mu_fixed, key.a0_fixed + 1)
a, b = jump_positions(key, 100), jump_positions(flipped, 100)
first = next(i for i, (x, y) in enumerate(zip(a, b)) if x != y)
print("\na last-digit change in a0 sends the schedule elsewhere:")
print(f"  first divergence at bit {first}")
print(f"  original: ... {a[first - 2 : first + 6]}")
print(f"  flipped:  ... {b[first - 2 : first + 6]}")
