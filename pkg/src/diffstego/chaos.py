"""Piecewise logistic map, keyed jump-position schedule and the 102-bit key codec.

The map iterates in fixed-point decimal with 16 fractional digits
(round-half-even), implemented on exact integers so that sender and
receiver produce bit-identical sequences on any platform:

    a < 0.5 :  4*mu*a*(0.5 - a)
    a >= 0.5:  1 - 4*mu*a*(a - 0.5)*(1 - a)

The second branch carries a sign correction: as printed, with (0.5 - a),
the expression escapes the unit interval (e.g. mu=3.9, a=0.936 gives
~1.407), which breaks both the iteration domain and the ceil(5*a) <= 5
window bound.  The uncorrected form stays available via ``verbatim=True``
and raises whenever it leaves (0, 1).

A real key is the pair (mu, a0): mu = 3.d1...d15 with d1 in {6..9},
a0 = 0.e1...e16 nonzero.  Valid keys enumerate to 4*10^14 * (10^16 - 1)
indices, which fit in ceil(log2(4*10^30)) = 102 bits.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ChaosDomainError, InvalidKeyError, KeyRangeError

SCALE = 10**16                      # one unit = 1e-16
_MU_SCALE = 10**15                  # mu carries 15 decimal places
_HALF = SCALE // 2
_MU_SPAN = 4 * 10**14               # mu codes: d1 in {6..9}, d2..d15 free
_A0_SPAN = SCALE - 1                # a0 codes: 1..10^16-1
KEY_SPACE = _MU_SPAN * _A0_SPAN
CODEWORD_BITS = 102


def _round_half_even(numerator: int, denominator: int) -> int:
    q, r = divmod(numerator, denominator)
    twice = 2 * r
    if twice > denominator or (twice == denominator and q % 2 == 1):
        q += 1
    return q


def _clamp_open_unit(v: int) -> int:
    # quantisation can land exactly on 0 or 1 only within one ulp of the
    # map's fixed points; nudge back into the open interval
    if v <= 0:
        return 1
    if v >= SCALE:
        return SCALE - 1
    return v


def _check_domain(a_fixed: int, mu_fixed: int) -> None:
    if not 0 < a_fixed < SCALE:
        raise ChaosDomainError(f"a_n must lie in (0, 1), got {a_fixed / SCALE}")
    if not 36 * 10**14 <= mu_fixed < 4 * _MU_SCALE:
        raise ChaosDomainError(f"mu must lie in [3.6, 4), got {mu_fixed / _MU_SCALE}")


def _next_fixed(a: int, mu: int, verbatim: bool = False) -> int:
    _check_domain(a, mu)
    if a < _HALF:
        # 4*mu*a*(0.5-a): scales mu(1e15) * a(1e16) * (1e16) -> / 1e31
        v = _round_half_even(4 * mu * a * (_HALF - a), 10**31)
    elif verbatim:
        # as printed: 1 - 4*mu*a*(0.5-a)*(1-a); (0.5-a) <= 0 here
        prod = _round_half_even(4 * mu * a * (_HALF - a) * (SCALE - a), 10**47)
        v = SCALE - prod
        if not 0 < v < SCALE:
            raise ChaosDomainError(
                f"verbatim second branch escaped (0, 1): {v / SCALE}"
            )
        return v
    else:
        v = SCALE - _round_half_even(4 * mu * a * (a - _HALF) * (SCALE - a), 10**47)
    return _clamp_open_unit(v)


def _parse_fixed(text: str, scale: int) -> int:
    from decimal import Decimal, InvalidOperation

    try:
        d = Decimal(text)
    except InvalidOperation as exc:
        raise InvalidKeyError(f"not a decimal number: {text!r}") from exc
    scaled = d * scale
    if scaled != int(scaled):
        raise InvalidKeyError(f"{text!r} has more fractional digits than supported")
    return int(scaled)


def _format_fixed(value: int, scale: int, digits: int) -> str:
    whole, frac = divmod(value, scale)
    return f"{whole}.{frac:0{digits}d}"


@dataclass(frozen=True)
class RealKey:
    """Chaotic-map key (mu, a0) held as exact fixed-point integers."""

    mu_fixed: int   # mu * 1e15
    a0_fixed: int   # a0 * 1e16

    def __post_init__(self):
        if not 36 * 10**14 <= self.mu_fixed < 4 * _MU_SCALE:
            raise InvalidKeyError(
                f"mu={self.mu} out of range: first decimal digit must be 6..9"
            )
        if not 0 < self.a0_fixed < SCALE:
            raise InvalidKeyError(f"a0={self.a0} must lie strictly inside (0, 1)")

    @property
    def mu(self) -> float:
        return self.mu_fixed / _MU_SCALE

    @property
    def a0(self) -> float:
        return self.a0_fixed / SCALE

    @property
    def mu_text(self) -> str:
        return _format_fixed(self.mu_fixed, _MU_SCALE, 15)

    @property
    def a0_text(self) -> str:
        return _format_fixed(self.a0_fixed, SCALE, 16)

    @classmethod
    def from_decimals(cls, mu: str | float, a0: str | float) -> "RealKey":
        """Build from decimal strings; floats are accepted for convenience
        but strings preserve all 15/16 digits exactly."""
        if isinstance(mu, float):
            mu = f"{mu:.15f}"
        if isinstance(a0, float):
            a0 = f"{a0:.16f}"
        return cls(_parse_fixed(mu, _MU_SCALE), _parse_fixed(a0, SCALE))

    @classmethod
    def random(cls, rng=None) -> "RealKey":
        """Uniform random key; pass a random.Random for reproducibility."""
        import secrets

        idx = secrets.randbelow(KEY_SPACE) if rng is None else rng.randrange(KEY_SPACE)
        return decode_key(idx.to_bytes(13, "big"))

    def to_file_text(self) -> str:
        return f"mu={self.mu_text};a0={self.a0_text}"

    @classmethod
    def from_file_text(cls, text: str) -> "RealKey":
        text = text.strip()
        if "=" not in text:
            # 26 hex characters = 104 bits, top two bits zero
            if len(text) != 26:
                raise InvalidKeyError("expected mu=..;a0=.. or a 26-hex-char codeword")
            try:
                raw = bytes.fromhex(text)
            except ValueError as exc:
                raise InvalidKeyError(f"bad codeword hex: {text!r}") from exc
            return decode_key(raw)
        fields = dict(
            part.split("=", 1) for part in text.split(";") if "=" in part
        )
        if "mu" not in fields or "a0" not in fields:
            raise InvalidKeyError("key file must contain mu=... and a0=...")
        return cls.from_decimals(fields["mu"], fields["a0"])


def next_value(a_n: float | str, mu: float | str, verbatim: bool = False) -> float:
    """One step of the piecewise logistic map (convenience wrapper).

    Inputs snap to the 16/15-digit fixed-point grid first (pass strings to
    pin all digits exactly), so this agrees with the integer iteration used
    by ChaoticSequence.
    """
    a = _parse_fixed(a_n, SCALE) if isinstance(a_n, str) else round(a_n * SCALE)
    m = _parse_fixed(mu, _MU_SCALE) if isinstance(mu, str) else round(mu * _MU_SCALE)
    return _next_fixed(a, m, verbatim=verbatim) / SCALE


class ChaoticSequence:
    """Iterator over a_1, a_2, ... for a given key (a_1 = f(a_0), no burn-in)."""

    def __init__(self, key: RealKey, verbatim: bool = False):
        self.key = key
        self.verbatim = verbatim
        self._state = key.a0_fixed

    def __iter__(self):
        return self

    def __next__(self) -> float:
        self._state = _next_fixed(self._state, self.key.mu_fixed, self.verbatim)
        return self._state / SCALE

    def next_fixed(self) -> int:
        self._state = _next_fixed(self._state, self.key.mu_fixed, self.verbatim)
        return self._state

    def take(self, count: int) -> list[float]:
        return [next(self) for _ in range(count)]


def jump_positions(key: RealKey, count: int) -> list[int]:
    """1-based embedding positions p_i = 5*(i-1) + ceil(5*a_i).

    The stride is 5: each payload bit consumes one disjoint window of five
    eligible positions, and ceil(5*a) lands in {1..5}, so exactly one
    position is selected per window.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    seq = ChaoticSequence(key)
    positions = []
    for i in range(count):
        a = seq.next_fixed()
        ceil5 = -((-5 * a) // SCALE)  # ceil(5*a) on the fixed-point grid
        positions.append(5 * i + int(ceil5))
    return positions


def iter_jump_positions(key: RealKey):
    """Unbounded generator form of jump_positions, for streaming readers."""
    seq = ChaoticSequence(key)
    i = 0
    while True:
        a = seq.next_fixed()
        yield 5 * i + int(-((-5 * a) // SCALE))
        i += 1


def encode_key(key: RealKey) -> bytes:
    """102-bit codeword as 13 bytes, big-endian, top two bits zero.

    Keys enumerate in (mu, a0) lexicographic order; the smallest valid key
    (mu=3.6...0, a0=1e-16) maps to the all-zero codeword.
    """
    mu_index = key.mu_fixed - 36 * 10**14
    a0_index = key.a0_fixed - 1
    idx = mu_index * _A0_SPAN + a0_index
    return idx.to_bytes(13, "big")


def decode_key(word: bytes | int) -> RealKey:
    """Inverse of encode_key; raises KeyRangeError outside the key space."""
    if isinstance(word, bytes):
        if len(word) != 13:
            raise KeyRangeError(f"codeword must be 13 bytes (102 bits), got {len(word)}")
        idx = int.from_bytes(word, "big")
    else:
        idx = int(word)
    if not 0 <= idx < KEY_SPACE:
        raise KeyRangeError(f"codeword value {idx} outside the key space [0, {KEY_SPACE})")
    mu_index, a0_index = divmod(idx, _A0_SPAN)
    return RealKey(mu_fixed=36 * 10**14 + mu_index, a0_fixed=a0_index + 1)


def codeword_bits(word: bytes) -> list[int]:
    """The 102 payload bits of a codeword (drops the two zero pad bits)."""
    bits = []
    for byte in word:
        bits.extend((byte >> s) & 1 for s in range(7, -1, -1))
    assert bits[0] == 0 and bits[1] == 0
    return bits[2:]
