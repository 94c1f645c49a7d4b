"""Certified evaluation of the minimum-element bounds and the alpha search.

alpha_m(p,q) = q / (p*(2^(1/m) - 1))
beta_m(p,q)  = q / (p*(2^((1 - {m*log2 p})/m) - 1))

Every returned value is a CertifiedValue enclosure produced by directed
integer rounding; comparisons are only ever decided when the enclosures
separate, and escalate in precision otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dynamics import PqSystem
from .fixedpoint import (
    CertifiedValue,
    FixedFraction,
    PrecisionError,
    ceil_div,
    exp2_fraction,
    log2_frac,
    log2_interval,
    pow2_exponent,
)

__all__ = [
    "BoundEvaluation",
    "MinMResult",
    "NearTie",
    "alpha_bound",
    "beta_bound",
    "evaluate_bounds",
    "frac_m_log2p",
    "log2_frac",
    "min_m_alpha",
    "min_m_beta_exhaustive",
    "rhs_threshold",
    "sandwich_interval_check",
]

# The alpha search is specified to run at no less than this many fractional
# bits, with an interval guard proving the floor stable.
ALPHA_SEARCH_MIN_BITS = 192


@dataclass(frozen=True)
class NearTie:
    """Audit entry for an m whose comparison fell inside the guard band and
    was re-decided at escalated precision (or by the exact integer identity
    when the threshold ratio is a power of two)."""

    m: int
    accepted: bool
    decided_bits: int | None     # None when decided exactly
    exact: bool
    margin_ulps: int | None      # distance between enclosures at decision

    def to_json_dict(self) -> dict:
        return {
            "m": self.m,
            "accepted": self.accepted,
            "decided_bits": self.decided_bits,
            "exact": self.exact,
            "margin_ulps": self.margin_ulps,
        }


@dataclass(frozen=True)
class MinMResult:
    """Outcome of a minimal-m search."""

    minimal_m: int
    search: str                  # "alpha" or "beta"
    a_min: int
    system: PqSystem
    precision_bits: int
    near_ties: tuple[NearTie, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "minimal_m": self.minimal_m,
            "search": self.search,
            "a_min": self.a_min,
            "p": self.system.p,
            "q": self.system.q,
            "precision_bits": self.precision_bits,
            "near_ties": [t.to_json_dict() for t in self.near_ties],
        }


def _threshold_log_interval(a_min: int, system: PqSystem, bits: int) -> CertifiedValue:
    """Enclosure of log2(1 + q/(p*a_min)) = log2((p*a_min+q)/(p*a_min))."""
    num = system.p * a_min + system.q
    den = system.p * a_min
    return log2_interval(num, den, bits)


def rhs_threshold(a_min: int, system: PqSystem, bits: int = ALPHA_SEARCH_MIN_BITS) -> CertifiedValue:
    """Certified log(2)/log(1 + q/(p*a_min)), the least loop size a given
    minimum element admits.

    Exact (as a rational) when 1 + q/(p*a_min) is a power of two; otherwise
    the working precision is padded so the result is reliable to `bits`
    fractional bits even though the value itself can be astronomically large.
    """
    if a_min < 1:
        raise ValueError("a_min must be >= 1")
    num = system.p * a_min + system.q
    den = system.p * a_min
    c = pow2_exponent(num, den)
    if c is not None:
        return CertifiedValue.from_fraction(Fraction(1, c), bits)
    # relative precision of the log must cover the reciprocal's magnitude
    w = bits + 2 * (den // system.q).bit_length() + 16
    for _ in range(6):
        lg = log2_interval(num, den, w)
        if lg.lo > 0:
            lo = (1 << (w + bits)) // lg.hi
            hi = ceil_div(1 << (w + bits), lg.lo)
            return CertifiedValue(lo, hi, bits)
        w *= 2
    raise PrecisionError(
        f"threshold log2(1+{system.q}/{den}) indistinguishable from zero"
    )


def min_m_alpha(a_min: int, system: PqSystem, bits: int = ALPHA_SEARCH_MIN_BITS) -> MinMResult:
    """Least integer m strictly greater than rhs_threshold(a_min).

    The floor of the threshold is accepted only when the certified interval
    lies inside a single integer gap; otherwise precision escalates, and an
    interval still straddling an integer at maximum precision is an error.
    """
    bits = max(bits, ALPHA_SEARCH_MIN_BITS)
    r = rhs_threshold(a_min, system, bits)
    if r.exact is not None:
        floor = r.exact.numerator // r.exact.denominator
        return MinMResult(floor + 1, "alpha", a_min, system, bits)
    for b in (bits, 2 * bits, 4 * bits):
        r = rhs_threshold(a_min, system, b)
        f_lo = r.lo >> b
        f_hi = r.hi >> b
        if f_lo == f_hi:
            return MinMResult(f_lo + 1, "alpha", a_min, system, b)
    raise PrecisionError(
        f"alpha threshold for a_min={a_min} straddles an integer at "
        f"{4 * bits} fractional bits"
    )


def alpha_bound(m: int, system: PqSystem, bits: int = 128) -> CertifiedValue:
    """q / (p*(2^(1/m) - 1)) with certified error; increasing in m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if m == 1:
        return CertifiedValue.from_fraction(Fraction(system.q, system.p), bits)
    w = bits + m.bit_length() + 16
    x_lo = (1 << w) // m
    x_hi = ceil_div(1 << w, m)
    e_lo, e_hi = exp2_fraction(x_lo, x_hi, w)
    d_lo = system.p * (e_lo - (1 << w))
    d_hi = system.p * (e_hi - (1 << w))
    if d_lo <= 0:
        raise PrecisionError(f"2^(1/{m}) - 1 underflows {w} working bits")
    lo = (system.q << (w + bits)) // d_hi
    hi = ceil_div(system.q << (w + bits), d_lo)
    return CertifiedValue(lo, hi, bits)


def _frac_m_log2p_interval(
    m: int, p: int, w: int, max_doublings: int = 5
) -> tuple[int, int, int, int]:
    """Enclosure of {m * log2 p} at a working scale.

    Returns (r_lo, r_hi, n, w) with the fractional part in
    [r_lo, r_hi]/2**w and n = floor(m*log2 p). Escalates w while the
    enclosure of m*log2(p) straddles an integer.
    """
    for _ in range(max_doublings):
        lp = log2_interval(p, 1, w)
        a_lo = m * lp.lo
        a_hi = m * lp.hi
        n_lo = a_lo >> w
        n_hi = a_hi >> w
        if n_lo == n_hi:
            return a_lo - (n_lo << w), a_hi - (n_lo << w), n_lo, w
        w *= 2
    raise PrecisionError(
        f"{m}*log2({p}) is within 2^-{w // 2} of an integer; cannot certify "
        f"its fractional part"
    )


def frac_m_log2p(m: int, system: PqSystem, bits: int = 128) -> FixedFraction:
    """Fractional part of m*log2(p) certified to <= 1 ulp at `bits`."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if system.p == 1:
        return FixedFraction(0, bits, 0)
    w = bits + m.bit_length() + 16
    r_lo, r_hi, _, w = _frac_m_log2p_interval(m, system.p, w)
    shift = w - bits
    num = r_lo >> shift
    err = ceil_div(r_hi, 1 << shift) - num
    return FixedFraction(num, bits, err)


def beta_bound(m: int, system: PqSystem, bits: int = 128) -> CertifiedValue:
    """q / (p*(2^((1 - {m log2 p})/m) - 1)) with certified error.

    The value blows up as {m log2 p} approaches 1; the enclosure is returned
    unclamped. Raises PrecisionError only if the fractional part cannot be
    separated from 1 at maximum escalation.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if system.p == 1:
        return alpha_bound(m, system, bits)
    w = bits + m.bit_length() + 16
    for _ in range(5):
        r_lo, r_hi, _, w = _frac_m_log2p_interval(m, system.p, w)
        one = 1 << w
        x_lo = (one - r_hi) // m
        x_hi = ceil_div(one - r_lo, m)
        if x_lo >= 1:
            e_lo, e_hi = exp2_fraction(x_lo, x_hi, w)
            if e_lo > one:
                d_lo = system.p * (e_lo - one)
                d_hi = system.p * (e_hi - one)
                lo = (system.q << (w + bits)) // d_hi
                hi = ceil_div(system.q << (w + bits), d_lo)
                return CertifiedValue(lo, hi, bits)
        w *= 2
    raise PrecisionError(
        f"{{{m}*log2({system.p})}} cannot be separated from 1; beta bound "
        f"unrepresentable at escalated precision"
    )


@dataclass(frozen=True)
class BoundEvaluation:
    """Both bounds and the fractional part for one m, at one precision."""

    m: int
    system: PqSystem
    alpha: CertifiedValue
    beta: CertifiedValue
    frac_mlog2p: FixedFraction
    precision_bits: int


def evaluate_bounds(m: int, system: PqSystem, bits: int = 128) -> BoundEvaluation:
    return BoundEvaluation(
        m=m,
        system=system,
        alpha=alpha_bound(m, system, bits),
        beta=beta_bound(m, system, bits),
        frac_mlog2p=frac_m_log2p(m, system, bits),
        precision_bits=bits,
    )


def min_m_beta_exhaustive(
    a_min: int, system: PqSystem, m_limit: int = 10**7
) -> int | None:
    """Independent full-precision oracle for the beta search.

    lhs(m) > rhs(a_min) is equivalent to the exact integer comparison
    (p*a_min+q)^m > 2^(floor(m*log2 p)+1) * a_min^m with the floor computed
    as bitlength(p^m) - 1, so every m is decided with no rounding at all.
    Shares no numerics with the fixed-point scan. Returns the least m >= 2,
    or None if m_limit is reached first.
    """
    if a_min < 1:
        raise ValueError("a_min must be >= 1")
    base = system.p * a_min + system.q
    lhs = base          # base^m
    am = a_min          # a_min^m
    pm = system.p       # p^m
    m = 1
    while m < m_limit:
        m += 1
        lhs *= base
        am *= a_min
        pm *= system.p
        j = pm.bit_length() - 1
        if lhs > am << (j + 1):
            return m
    return None


# --------------------------------------------------------------------------
# certified-interval form of the two-sided valuation-sum bound
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichIntervalCheck:
    ok: bool
    left_strict: bool
    right_strict: bool
    right_equality_exact: bool
    bits: int


def sandwich_interval_check(record, bits: int = 128) -> SandwichIntervalCheck:
    """Certify m*log2(p) < S_m < m*log2(p) + m*log2(1+q/(p*a_min)) at the
    given precision, the right side closed for degenerate cycles (where it
    is exactly m times an integer power of two exponent)."""
    sys_ = record.system
    m, s_m = record.m, record.s_m
    s_scaled = s_m << bits
    if sys_.p == 1:
        left_ok = s_m > 0
    else:
        lp = log2_interval(sys_.p, 1, bits)
        left_ok = s_scaled > m * lp.hi
    num = sys_.p * record.a_min + sys_.q
    den = record.a_min
    c = pow2_exponent(num, den)
    degenerate = len(set(record.elements)) == 1
    if c is not None:
        # right endpoint is exactly m*c
        right_strict = s_m < m * c
        equality = s_m == m * c
        ok = left_ok and (right_strict or (equality and degenerate))
        return SandwichIntervalCheck(ok, left_ok, right_strict, equality, bits)
    lv = log2_interval(num, den, bits)
    right_strict = s_scaled < m * lv.lo
    ok = left_ok and right_strict
    return SandwichIntervalCheck(ok, left_ok, right_strict, False, bits)
