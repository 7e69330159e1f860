"""SM3 cryptographic hash (GB/T 32905-2016).

256-bit digest over 512-bit blocks; used to authenticate recovered
container images.  ``sm3_pure`` is the self-contained reference
implementation; ``sm3`` routes through the OpenSSL backend of the
``cryptography`` package when present (the tamper harness hashes tens of
thousands of small images) and falls back to the pure version otherwise.
The two are cross-checked in the test suite and the backend is verified
against a published vector at import time.
"""

from __future__ import annotations

import struct

_MASK = 0xFFFFFFFF

_IV = (
    0x7380166F, 0x4914B2B9, 0x172442D7, 0xDA8A0600,
    0xA96F30BC, 0x163138AA, 0xE38DEE4D, 0xB0FB0E4E,
)


def _rotl(x: int, n: int) -> int:
    n %= 32
    return ((x << n) & _MASK) | (x >> (32 - n)) if n else x


# T_j <<< (j mod 32), precomputed once
_T_ROT = tuple(_rotl(0x79CC4519 if j < 16 else 0x7A879D8A, j) for j in range(64))


def sm3_pure(message: bytes) -> bytes:
    """Reference SM3 digest (32 bytes) of the message."""
    bit_len = len(message) * 8
    padded = (
        message + b"\x80" + b"\x00" * ((55 - len(message)) % 64) + struct.pack(">Q", bit_len)
    )
    a, b, c, d, e, f, g, h = _IV
    t_rot = _T_ROT
    unpack = struct.unpack
    for off in range(0, len(padded), 64):
        w = list(unpack(">16I", padded[off : off + 64]))
        for j in range(16, 68):
            x = w[j - 16] ^ w[j - 9] ^ (((w[j - 3] << 15) & _MASK) | (w[j - 3] >> 17))
            # P1 permutation
            x = x ^ (((x << 15) & _MASK) | (x >> 17)) ^ (((x << 23) & _MASK) | (x >> 9))
            w.append(x ^ (((w[j - 13] << 7) & _MASK) | (w[j - 13] >> 25)) ^ w[j - 6])
        va, vb, vc, vd, ve, vf, vg, vh = a, b, c, d, e, f, g, h
        for j in range(64):
            a12 = ((va << 12) & _MASK) | (va >> 20)
            ss1 = (a12 + ve + t_rot[j]) & _MASK
            ss1 = ((ss1 << 7) & _MASK) | (ss1 >> 25)
            ss2 = ss1 ^ a12
            wj = w[j]
            if j < 16:
                ff = va ^ vb ^ vc
                gg = ve ^ vf ^ vg
            else:
                ff = (va & vb) | (va & vc) | (vb & vc)
                gg = (ve & vf) | (~ve & vg)
            tt1 = (ff + vd + ss2 + (wj ^ w[j + 4])) & _MASK
            tt2 = (gg + vh + ss1 + wj) & _MASK
            vd = vc
            vc = ((vb << 9) & _MASK) | (vb >> 23)
            vb = va
            va = tt1
            vh = vg
            vg = ((vf << 19) & _MASK) | (vf >> 13)
            vf = ve
            # P0 permutation
            ve = tt2 ^ (((tt2 << 9) & _MASK) | (tt2 >> 23)) ^ (((tt2 << 17) & _MASK) | (tt2 >> 15))
        a ^= va
        b ^= vb
        c ^= vc
        d ^= vd
        e ^= ve
        f ^= vf
        g ^= vg
        h ^= vh
    return struct.pack(">8I", a, b, c, d, e, f, g, h)


def _openssl_sm3():
    try:
        from cryptography.hazmat.primitives import hashes
    except ImportError:
        return None

    def fast(message: bytes) -> bytes:
        h = hashes.Hash(hashes.SM3())
        h.update(message)
        return h.finalize()

    try:
        if fast(b"abc").hex() != "66c7f0f462eeedd9d1f2d46bdc10e4e24167c4875cf2f7a2297da02b8f4ba8e0":
            return None
    except Exception:
        return None
    return fast


_fast = _openssl_sm3()
sm3 = _fast if _fast is not None else sm3_pure


def sm3_hex(message: bytes) -> str:
    return sm3(message).hex()
