"""The minimal-m beta search: a chunked, certified fixed-point scan.

The search finds the least m >= 2 with

    m / (1 - {m * log2 p})  >  log 2 / log(1 + q/(p*a_min))

equivalently {m * log2 p} > 1 - m/rhs. Candidates are pre-filtered with a
vectorized 64-bit wrapping accumulator (one-sided floor error <= m ulps, so
the filter band provably contains every qualifying m and every m the
higher-precision comparison could find ambiguous, for any chunking). Each
candidate is then decided at precision_bits (default 128) by the certified
interval test

    r_m > 2^B - ceil(m * 2^B / rhs),   r_m = (m * F) mod 2^B

escalating through the configured ladder when the enclosures overlap, and
falling back to the exact integer identity

    (p*a_min+q)^m  vs  2^(floor(m*log2 p)+1) * a_min^m

in the one family where true equality is possible (the threshold ratio a
power of two). Results are bit-identical for any worker count and chunk
size: every per-m decision is a pure function of m, and chunk starts are
seeded by wrapping multiplication so no error accumulates across chunks.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .bounds import (
    ALPHA_SEARCH_MIN_BITS,
    MinMResult,
    NearTie,
    min_m_alpha,
    rhs_threshold,
    _frac_m_log2p_interval,
)
from .dynamics import PqSystem
from .fixedpoint import FixedFraction, PrecisionError, ceil_div, log2_frac, pow2_exponent

_MASK64 = (1 << 64) - 1
# bit budget cap for the exact-integer fallback comparison
_EXACT_FALLBACK_MAX_BITS = 1 << 25


@dataclass(frozen=True)
class ScanConfig:
    precision_bits: int = 128
    chunk_size: int = 1 << 22
    workers: int | None = None          # None: one per CPU
    escalation: tuple[int, ...] = (256, 512)
    m_start: int = 2
    m_limit: int | None = None          # safety valve; None matches the
                                        # unbounded search procedure
    progress: Callable[[int], None] | None = None

    def __post_init__(self):
        if self.precision_bits < 64:
            raise ValueError("precision_bits must be >= 64")
        if not 1 <= self.chunk_size <= 1 << 26:
            raise ValueError("chunk_size must be in [1, 2^26]")
        if self.m_start < 2:
            raise ValueError("m_start must be >= 2")
        if any(b <= self.precision_bits for b in self.escalation):
            raise ValueError("escalation steps must exceed precision_bits")


_IDX_CACHE: dict[int, np.ndarray] = {}


def _chunk_hits(task: tuple[int, int, int, int]) -> list[int]:
    """Candidate m in [m_lo, m_lo+n) whose 64-bit accumulator lands at or
    above thresh. Runs in worker processes; wrapping uint64 arithmetic is
    exactly mod-2^64."""
    m_lo, n, g, thresh = task
    idx = _IDX_CACHE.get(n)
    if idx is None:
        idx = np.arange(n, dtype=np.uint64)
        _IDX_CACHE[n] = idx
    with np.errstate(over="ignore"):
        s = np.uint64((m_lo * g) & _MASK64) + idx * np.uint64(g)
        hits = np.flatnonzero(s >= np.uint64(thresh))
    return [m_lo + int(i) for i in hits]


class _Decider:
    """Certified per-m decision of the scan condition. Pure in m, so the
    outcome is independent of how the scan was chunked or parallelized."""

    def __init__(
        self,
        a_min: int,
        system: PqSystem,
        r_lo: Fraction,
        r_hi: Fraction,
        base_bits: int,
        escalation: tuple[int, ...],
    ):
        self.a_min = a_min
        self.system = system
        self.r_lo = r_lo
        self.r_hi = r_hi
        self.ladder = (base_bits,) + escalation
        self._fracs: dict[int, FixedFraction] = {}
        self.near_ties: list[NearTie] = []

    def _frac(self, bits: int) -> FixedFraction:
        f = self._fracs.get(bits)
        if f is None:
            f = log2_frac(self.system.p, bits)
            self._fracs[bits] = f
        return f

    def _interval_verdict(self, m: int, bits: int) -> tuple[bool | None, int | None]:
        """(verdict, margin): True/False when certified, None inside the
        guard band. Margin is the gap between the enclosures in ulps."""
        f = self._frac(bits)
        scale = 1 << bits
        a = m * f.numerator
        r = a & (scale - 1)
        top = r + m * f.error_ulps
        if top < scale:
            segs = [(r, top)]
        else:
            segs = [(r, scale - 1), (0, top - scale)]
        sub_lo = (m * scale * self.r_hi.denominator) // self.r_hi.numerator
        sub_hi = ceil_div(m * scale * self.r_lo.denominator, self.r_lo.numerator)
        t_lo = scale - sub_hi
        t_hi = scale - sub_lo
        if all(lo > t_hi for lo, _ in segs):
            return True, min(lo - t_hi for lo, _ in segs)
        if all(hi <= t_lo for _, hi in segs):
            return False, min(t_lo - hi for _, hi in segs)
        return None, None

    def _floor_m_log2p(self, m: int) -> int:
        p = self.system.p
        try:
            _, _, n, _ = _frac_m_log2p_interval(m, p, 256 + m.bit_length())
            return n
        except PrecisionError:
            if m * p.bit_length() > _EXACT_FALLBACK_MAX_BITS:
                raise
            return (p ** m).bit_length() - 1

    def _exact_verdict(self, m: int) -> bool:
        """Exact integer decision of lhs(m) > rhs, available when the
        threshold ratio is a power of two or m is small enough for the full
        integer comparison."""
        p, q, a = self.system.p, self.system.q, self.a_min
        num = p * a + q
        c = pow2_exponent(num, a)
        if c is not None:
            return c * m > 1 + self._floor_m_log2p(m)
        if m * num.bit_length() > _EXACT_FALLBACK_MAX_BITS:
            raise PrecisionError(
                f"scan comparison at m={m} undecidable at maximum precision "
                f"and too large for the exact fallback"
            )
        j = self._floor_m_log2p(m)
        return num ** m > (a ** m) << (j + 1)

    def decide(self, m: int) -> bool:
        for step, bits in enumerate(self.ladder):
            verdict, margin = self._interval_verdict(m, bits)
            if verdict is not None:
                if step > 0:
                    self.near_ties.append(
                        NearTie(m, verdict, bits, False, margin)
                    )
                return verdict
        verdict = self._exact_verdict(m)
        self.near_ties.append(NearTie(m, verdict, None, True, None))
        return verdict


def _chunk_plan(
    m_start: int,
    chunk_size: int,
    r_lo: Fraction,
    err64: int,
    m_limit: int | None,
) -> Iterable[tuple[int, int, int | None]]:
    """Yield (m_lo, n, thresh); thresh None means the band swallowed the
    whole 64-bit range and every m in the chunk is a candidate."""
    m_lo = m_start
    while m_limit is None or m_lo < m_limit:
        n = chunk_size
        if m_limit is not None:
            n = min(n, m_limit - m_lo)
        m_hi = m_lo + n
        band = (
            ceil_div(m_hi << 64, 1) if r_lo <= 0
            else ceil_div((m_hi << 64) * r_lo.denominator, r_lo.numerator)
        )
        band += m_hi * err64 + 1
        thresh = (1 << 64) - band
        yield (m_lo, n, thresh if thresh > 0 else None)
        m_lo = m_hi


def min_m_beta_scan(
    a_min: int, system: PqSystem, config: ScanConfig | None = None
) -> MinMResult:
    """Least m >= 2 whose beta bound admits the given minimum element.

    Deterministic for any worker count and chunk size; guard-band events are
    recorded in near_ties of the result.
    """
    cfg = config or ScanConfig()
    if a_min < 1:
        raise ValueError("a_min must be >= 1")
    bits = cfg.precision_bits
    rhs = rhs_threshold(a_min, system, ALPHA_SEARCH_MIN_BITS)
    r_lo, r_hi = rhs.bounds_fractions()

    if system.p == 1:
        # {m log2 1} = 0 exactly, so lhs(m) = m and the search degenerates to
        # the least integer above the threshold, clamped to m >= m_start.
        m = max(cfg.m_start, min_m_alpha(a_min, system).minimal_m)
        return MinMResult(m, "beta", a_min, system, bits)

    f64 = log2_frac(system.p, 64)
    decider = _Decider(a_min, system, r_lo, r_hi, bits, cfg.escalation)
    plan = _chunk_plan(cfg.m_start, cfg.chunk_size, r_lo, f64.error_ulps, cfg.m_limit)

    def finish(m: int) -> MinMResult:
        return MinMResult(
            m, "beta", a_min, system, bits, tuple(decider.near_ties)
        )

    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    if workers <= 1:
        for m_lo, n, thresh in plan:
            if thresh is None:
                candidates: Iterable[int] = range(m_lo, m_lo + n)
            else:
                candidates = _chunk_hits((m_lo, n, f64.numerator, thresh))
            for m in candidates:
                if decider.decide(m):
                    return finish(m)
            if cfg.progress is not None:
                cfg.progress(m_lo + n)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            window: deque = deque()
            exhausted = False
            while True:
                while not exhausted and len(window) < 2 * workers:
                    step = next(plan, None)
                    if step is None:
                        exhausted = True
                        break
                    m_lo, n, thresh = step
                    if thresh is None:
                        window.append((m_lo, n, range(m_lo, m_lo + n)))
                    else:
                        window.append(
                            (m_lo, n,
                             pool.submit(_chunk_hits,
                                         (m_lo, n, f64.numerator, thresh)))
                        )
                if not window:
                    break
                m_lo, n, item = window.popleft()
                candidates = item if isinstance(item, range) else item.result()
                for m in candidates:
                    if decider.decide(m):
                        for _, _, pending in window:
                            if not isinstance(pending, range):
                                pending.cancel()
                        return finish(m)
                if cfg.progress is not None:
                    cfg.progress(m_lo + n)
    raise LookupError(
        f"no qualifying m below the configured limit {cfg.m_limit}"
    )
