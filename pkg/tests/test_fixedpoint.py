import mpmath as mp
import pytest
from fractions import Fraction

from pqcycles.fixedpoint import (
    CertifiedValue,
    FixedFraction,
    PrecisionError,
    MAX_PRECISION_BITS,
    exp2_fraction,
    log2_frac,
    log2_interval,
    pow2_exponent,
)


def test_log2_frac_known_hex_digits():
    f = log2_frac(3, 64)
    assert f.numerator == 0x95C01A39FBD6879F
    assert f.error_ulps <= 1
    assert log2_frac(5, 64).numerator == 0x5269E12F346E2BF9


@pytest.mark.parametrize("p", [3, 5, 7, 9, 11, 13, 15, 21, 99, 101, 12345, 2**31 - 1])
@pytest.mark.parametrize("bits", [64, 128, 192, 256])
def test_log2_frac_vs_mpmath(p, bits):
    got = log2_frac(p, bits)
    want = int(mp.floor(mp.frac(mp.log(p, 2)) * mp.mpf(2) ** bits))
    assert got.numerator == want
    lo, hi = got.interval()
    true_scaled = mp.frac(mp.log(p, 2)) * mp.mpf(2) ** bits
    assert lo <= true_scaled <= hi


def test_log2_frac_rejects_bad_inputs():
    with pytest.raises(ValueError):
        log2_frac(4)
    with pytest.raises(ValueError):
        log2_frac(1)
    with pytest.raises(ValueError):
        log2_frac(3, 32)
    with pytest.raises(PrecisionError):
        log2_frac(3, MAX_PRECISION_BITS + 1)


def test_fixed_fraction_invariants():
    with pytest.raises(ValueError):
        FixedFraction(-1, 64)
    with pytest.raises(ValueError):
        FixedFraction(1 << 64, 64)
    with pytest.raises(ValueError):
        FixedFraction(0, 64, -1)
    f = FixedFraction(5, 8, 2)
    assert f.interval() == (5, 7)
    assert f.as_float() == 5 / 256


def test_certified_value_basics():
    v = CertifiedValue.from_fraction(Fraction(1, 3), 128)
    assert v.exact == Fraction(1, 3)
    assert v.contains(Fraction(1, 3))
    assert v.width_ulps() <= 1
    assert v.decimal_str(6).startswith("0.3333")
    assert v.certainly_gt(Fraction(1, 4))
    assert v.certainly_lt(Fraction(1, 2))
    with pytest.raises(ValueError):
        CertifiedValue(5, 4, 8)


def test_pow2_exponent():
    assert pow2_exponent(8) == 3
    assert pow2_exponent(1) == 0
    assert pow2_exponent(8, 2) == 2
    assert pow2_exponent(1, 4) == -2
    assert pow2_exponent(6) is None
    assert pow2_exponent(20, 5) == 2
    assert pow2_exponent(9, 3) is None
    with pytest.raises(ValueError):
        pow2_exponent(0)


def test_log2_interval_exact_powers():
    v = log2_interval(8, 1, 128)
    assert v.exact == Fraction(3)
    v = log2_interval(4, 1, 64)
    assert v.exact == Fraction(2)
    with pytest.raises(ValueError):
        log2_interval(3, 3)
    with pytest.raises(ValueError):
        log2_interval(2, 3)


@pytest.mark.parametrize(
    "num,den",
    [(3, 1), (5, 1), (7, 4), (1000003, 999999), (19 * 2**58, 19 * 2**58 - 1)],
)
def test_log2_interval_vs_mpmath(num, den):
    bits = 160
    v = log2_interval(num, den, bits)
    true_scaled = mp.log(mp.mpf(num) / den, 2) * mp.mpf(2) ** bits
    assert v.lo <= true_scaled <= v.hi
    assert v.width_ulps() <= 1


def test_exp2_fraction_brackets_mpmath():
    bits = 128
    one = 1 << bits
    import random

    rng = random.Random(7)
    for x in [0, 1, one // 3, one // 2, one - 1, one] + [
        rng.randrange(one) for _ in range(20)
    ]:
        lo, hi = exp2_fraction(x, x, bits)
        true_scaled = mp.mpf(2) ** (mp.mpf(x) / one) * one
        assert lo <= true_scaled <= hi
        assert hi - lo <= 4
    assert exp2_fraction(0, 0, bits) == (one, one)
    lo, hi = exp2_fraction(one, one, bits)
    assert lo <= 2 * one <= hi and hi - lo <= 2
    with pytest.raises(ValueError):
        exp2_fraction(-1, 0, bits)
    with pytest.raises(ValueError):
        exp2_fraction(0, one + 1, bits)
