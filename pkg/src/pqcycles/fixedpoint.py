"""Certified binary fixed-point arithmetic on exact integers.

Everything here is built on Python's arbitrary-precision ints with directed
rounding, so every value carries a rigorous enclosure: either a one-sided
[num, num+err]/2^bits fraction (FixedFraction) or a two-sided [lo, hi]/2^bits
interval (CertifiedValue). No machine floating point enters any result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

# Hard ceiling on requested fractional bits; beyond this the digit-extraction
# working integers get unreasonably large.
MAX_PRECISION_BITS = 1 << 16


class PrecisionError(ArithmeticError):
    """A certified comparison or extraction could not be decided at the
    maximum allowed precision."""


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def isqrt_ceil(n: int) -> int:
    s = math.isqrt(n)
    return s if s * s == n else s + 1


def pow2_exponent(num: int, den: int = 1) -> int | None:
    """Exponent e with num/den == 2**e, or None if the ratio is not a power
    of two. Accepts unreduced positive fractions; e may be negative."""
    if num <= 0 or den <= 0:
        raise ValueError("positive fraction required")
    g = math.gcd(num, den)
    num //= g
    den //= g
    if den == 1:
        return num.bit_length() - 1 if num & (num - 1) == 0 else None
    if num == 1:
        return -(den.bit_length() - 1) if den & (den - 1) == 0 else None
    return None


@dataclass(frozen=True)
class FixedFraction:
    """A value in [0,1) as numerator/2**bits with a one-sided error bound.

    The true value lies in [numerator, numerator + error_ulps] / 2**bits,
    taken modulo 1 if the upper end pokes past the top. error_ulps is always
    propagated, never dropped.
    """

    numerator: int
    bits: int = 128
    error_ulps: int = 1

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be positive")
        if not 0 <= self.numerator < (1 << self.bits):
            raise ValueError("numerator out of [0, 2^bits) range")
        if self.error_ulps < 0:
            raise ValueError("error bound must be nonnegative")

    def interval(self) -> tuple[int, int]:
        return self.numerator, self.numerator + self.error_ulps

    def as_float(self) -> float:
        return self.numerator / (1 << self.bits)


@dataclass(frozen=True)
class CertifiedValue:
    """A nonnegative real enclosed in [lo, hi]/2**bits.

    When the value is known exactly as a rational, `exact` carries it and the
    integer bounds are a tight dyadic enclosure of it.
    """

    lo: int
    hi: int
    bits: int
    exact: Fraction | None = None

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")
        if self.lo < 0:
            raise ValueError("negative lower bound")

    @classmethod
    def from_fraction(cls, value: Fraction, bits: int) -> "CertifiedValue":
        scaled = value * (1 << bits)
        lo = scaled.numerator // scaled.denominator
        hi = ceil_div(scaled.numerator, scaled.denominator)
        return cls(lo, hi, bits, exact=value)

    def width_ulps(self) -> int:
        return self.hi - self.lo

    def midpoint_float(self) -> float:
        mid = (self.lo + self.hi) / 2
        return mid / (1 << self.bits)

    def bounds_fractions(self) -> tuple[Fraction, Fraction]:
        if self.exact is not None:
            return self.exact, self.exact
        s = 1 << self.bits
        return Fraction(self.lo, s), Fraction(self.hi, s)

    def contains(self, value: Fraction | int) -> bool:
        f = Fraction(value)
        lo_f, hi_f = self.bounds_fractions()
        return lo_f <= f <= hi_f

    def certainly_gt(self, value: Fraction | int) -> bool:
        lo_f, _ = self.bounds_fractions()
        return lo_f > Fraction(value)

    def certainly_lt(self, value: Fraction | int) -> bool:
        _, hi_f = self.bounds_fractions()
        return hi_f < Fraction(value)

    def decimal_str(self, digits: int = 30) -> str:
        """Decimal rendering of the midpoint, truncated; purely integer math
        so arbitrarily large values never pass through a float."""
        mid2 = self.lo + self.hi  # midpoint at scale 2^(bits+1)
        scale = 10 ** digits
        q, r = divmod(mid2 * scale, 1 << (self.bits + 1))
        whole, frac = divmod(q, scale)
        return f"{whole}.{frac:0{digits}d}"


# --------------------------------------------------------------------------
# log2 digit extraction
# --------------------------------------------------------------------------

def _extract_mantissa_log2(num: int, den: int, bits: int) -> int:
    """Certified L = floor(log2(num/den) * 2**bits) for num/den in [1, 2).

    Repeated interval squaring of the mantissa: each output bit is emitted
    only when the enclosing interval decides the >=2 comparison, so every
    emitted digit is exact and the true log lies in [L, L+1)/2**bits. If the
    interval ever straddles 2 the guard width doubles and extraction restarts.
    """
    if not den <= num < 2 * den:
        raise ValueError("mantissa must lie in [1, 2)")
    if num == den:
        return 0
    guard = bits + 64
    while True:
        w = bits + guard
        if w > 4 * MAX_PRECISION_BITS:
            raise PrecisionError(
                f"log2 digit extraction for {num}/{den} undecidable below "
                f"{4 * MAX_PRECISION_BITS} working bits"
            )
        one = 1 << w
        two = one << 1
        xlo = (num << w) // den
        xhi = xlo + 1
        out = 0
        ok = True
        for _ in range(bits):
            xlo = (xlo * xlo) >> w
            xhi = (xhi * xhi + one - 1) >> w
            if xlo >= two:
                out = (out << 1) | 1
                xlo >>= 1
                xhi = (xhi + 1) >> 1
            elif xhi <= two:
                out <<= 1
            else:
                ok = False
                break
        if ok:
            return out
        guard *= 2


def log2_interval(num: int, den: int = 1, bits: int = 128) -> CertifiedValue:
    """Certified enclosure of log2(num/den) for any rational > 1.

    Exact when the ratio is a power of two; otherwise the integer part is
    split off and the mantissa log is digit-extracted to `bits` fractional
    bits with a one-ulp enclosure.
    """
    if num <= den:
        raise ValueError("log2_interval requires num/den > 1")
    e = pow2_exponent(num, den)
    if e is not None:
        return CertifiedValue.from_fraction(Fraction(e), bits)
    # integer part: largest e with 2^e <= num/den
    e = num.bit_length() - den.bit_length()
    if (den << e) > num:
        e -= 1
    frac = _extract_mantissa_log2(num, den << e, bits)
    base = e << bits
    return CertifiedValue(base + frac, base + frac + 1, bits)


def log2_frac(p: int, bits: int = 128) -> FixedFraction:
    """Fractional part of log2(p) for odd p >= 3, certified to <= 1 ulp.

    Computed by exact digit extraction (interval squaring of the normalized
    mantissa), never by a machine-precision logarithm.
    """
    if p < 3 or p % 2 == 0:
        raise ValueError("p must be an odd integer >= 3")
    if bits < 64:
        raise ValueError("bits must be >= 64")
    if bits > MAX_PRECISION_BITS:
        raise PrecisionError(
            f"requested {bits} fractional bits exceeds the configured "
            f"maximum of {MAX_PRECISION_BITS}"
        )
    e = p.bit_length() - 1
    frac = _extract_mantissa_log2(p, 1 << e, bits)
    return FixedFraction(frac, bits, 1)


# --------------------------------------------------------------------------
# exp2 via iterated integer square roots
# --------------------------------------------------------------------------

_ROOT_CACHE: dict[int, list[tuple[int, int]]] = {}


def _pow2_roots(w: int, count: int) -> list[tuple[int, int]]:
    """Enclosures of 2**(2**-i) at scale 2**w for i = 1..count.

    roots[i-1] brackets the i-fold iterated square root of 2; floor/ceil
    integer square roots keep the enclosure valid at every level.
    """
    cached = _ROOT_CACHE.get(w, [])
    if len(cached) >= count:
        return cached
    if cached:
        lo, hi = cached[-1]
    else:
        lo = hi = 2 << w
    roots = list(cached)
    for _ in range(len(roots), count):
        lo = math.isqrt(lo << w)
        hi = isqrt_ceil(hi << w)
        roots.append((lo, hi))
    _ROOT_CACHE[w] = roots
    return roots


def exp2_fraction(x_lo: int, x_hi: int, bits: int) -> tuple[int, int]:
    """Certified enclosure of [2**(x_lo/2**bits), 2**(x_hi/2**bits)] at scale
    2**bits, for 0 <= x_lo <= x_hi <= 2**bits.

    Each endpoint is a product of iterated-square-root factors selected by
    the set bits of x, with floor rounding on the lower product and ceil on
    the upper.
    """
    one = 1 << bits
    if not 0 <= x_lo <= x_hi <= one:
        raise ValueError("exponents must satisfy 0 <= x_lo <= x_hi <= 2^bits")
    w = bits + 32
    roots = _pow2_roots(w, bits)
    big_one = 1 << w

    def eval_lo(x: int) -> int:
        acc = big_one
        if x & one:
            acc <<= 1
        for i in range(1, bits + 1):
            if x & (1 << (bits - i)):
                acc = (acc * roots[i - 1][0]) >> w
        return acc

    def eval_hi(x: int) -> int:
        acc = big_one
        if x & one:
            acc <<= 1
        for i in range(1, bits + 1):
            if x & (1 << (bits - i)):
                acc = ceil_div(acc * roots[i - 1][1], big_one)
        return acc

    lo = eval_lo(x_lo) >> (w - bits)
    hi = ceil_div(eval_hi(x_hi), 1 << (w - bits))
    return lo, hi
