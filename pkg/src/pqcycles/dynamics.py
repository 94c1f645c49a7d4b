"""Exact integer dynamics of the px+q maps.

f is the full map (halve if even, px+q if odd); T is the accelerated
odd-to-odd map T(a) = (p*a+q) / 2^k with k the exact 2-adic valuation of
p*a+q. All arithmetic is arbitrary-precision integer; nothing here touches
floating point, so every identity check is exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence


class NotACycleError(ValueError):
    """The supplied values do not form a closed T-cycle."""


@dataclass(frozen=True)
class PqSystem:
    """The pair (p, q) defining the generalized map. (3, 1) is the classic
    3x+1 system. Both must be positive and odd so that p*a+q is even for odd
    a and T is well defined."""

    p: int
    q: int

    def __post_init__(self):
        for name, v in (("p", self.p), ("q", self.q)):
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer")
            if v % 2 == 0:
                raise ValueError(f"{name} must be odd, got {v}")


CLASSIC = PqSystem(3, 1)


class StepRecord(NamedTuple):
    """One application of T: output * 2^k == p*input + q exactly, output odd,
    k >= 1."""

    input: int
    k: int
    output: int


@dataclass(frozen=True)
class Trajectory:
    """A chain of T-steps from `start` with the running valuation sums.

    steps[i].output == steps[i+1].input, and s_partial[r] is k_1 + ... +
    k_{r+1}, strictly increasing. start_repeat_at is the 1-based index of the
    first step whose output equals `start`, or None; the chain always runs
    the full requested length rather than truncating there.
    """

    system: PqSystem
    start: int
    steps: tuple[StepRecord, ...]
    s_partial: tuple[int, ...]
    start_repeat_at: int | None = field(default=None)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(s.output for s in self.steps)

    @property
    def k_sequence(self) -> tuple[int, ...]:
        return tuple(s.k for s in self.steps)


def v2(n: int) -> int:
    """Exact 2-adic valuation by trailing-zero count."""
    if n <= 0:
        raise ValueError("v2 requires a positive integer")
    return (n & -n).bit_length() - 1


def _check_odd_positive(a: int, what: str = "value") -> None:
    if not isinstance(a, int) or a < 1:
        raise ValueError(f"{what} must be a positive integer, got {a!r}")
    if a % 2 == 0:
        raise ValueError(f"{what} must be odd, got {a}")


def f_step(x: int, system: PqSystem = CLASSIC) -> int:
    """One application of the full map: x/2 if even, p*x+q if odd."""
    if not isinstance(x, int) or x < 1:
        raise ValueError(f"x must be a positive integer, got {x!r}")
    if x % 2 == 0:
        return x // 2
    return system.p * x + system.q


def t_step(a: int, system: PqSystem = CLASSIC) -> StepRecord:
    """One application of T on an odd a: divide p*a+q by its full power of
    two."""
    _check_odd_positive(a, "a")
    n = system.p * a + system.q
    k = v2(n)
    return StepRecord(a, k, n >> k)


def t_trajectory(a: int, system: PqSystem = CLASSIC, max_steps: int = 1) -> Trajectory:
    """Chain t_step exactly max_steps times.

    A recurrence of the start value is recorded in start_repeat_at but does
    not stop the chain (the fixed point 1 keeps mapping to 1, matching the
    continued traces of the map itself).
    """
    _check_odd_positive(a, "a")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    steps: list[StepRecord] = []
    sums: list[int] = []
    repeat_at = None
    cur = a
    total = 0
    for i in range(max_steps):
        rec = t_step(cur, system)
        steps.append(rec)
        total += rec.k
        sums.append(total)
        if repeat_at is None and rec.output == a:
            repeat_at = i + 1
        cur = rec.output
    return Trajectory(system, a, tuple(steps), tuple(sums), repeat_at)


def coefficient_cm(trajectory: Trajectory, m: int) -> int:
    """The additive coefficient in the closed form of m chained steps:

        c_m = p^(m-1) + p^(m-2)*2^S_1 + ... + p*2^S_(m-2) + 2^S_(m-1)

    computed in exact integer arithmetic. m = 1 gives the empty-sum base
    case 1.
    """
    if not 1 <= m <= len(trajectory):
        raise ValueError(f"m must be in 1..{len(trajectory)}, got {m}")
    p = trajectory.system.p
    total = p ** (m - 1)
    for i in range(1, m):
        total += p ** (m - 1 - i) * (1 << trajectory.s_partial[i - 1])
    return total


class IdentityCheck(NamedTuple):
    """Outcome of an exact integer identity: ok iff residual == 0, where
    residual = lhs - rhs."""

    ok: bool
    residual: int
    lhs: int
    rhs: int


def verify_linear_form(trajectory: Trajectory, m: int) -> IdentityCheck:
    """Check a_{m+1} * 2^S_m == p^m * a_1 + q * c_m as exact integers.

    q scales the coefficient term in the generalized system; q = 1 recovers
    the classic closed form.
    """
    if not 1 <= m <= len(trajectory):
        raise ValueError(f"m must be in 1..{len(trajectory)}, got {m}")
    sys_ = trajectory.system
    lhs = trajectory.steps[m - 1].output << trajectory.s_partial[m - 1]
    rhs = sys_.p ** m * trajectory.start + sys_.q * coefficient_cm(trajectory, m)
    return IdentityCheck(lhs == rhs, lhs - rhs, lhs, rhs)


def verify_product_identity(
    cycle_values: Sequence[int], system: PqSystem = CLASSIC
) -> IdentityCheck:
    """Check 2^S_m * prod(a_i) == prod(p*a_i + q) over a closed T-cycle.

    The identity is order-independent, so the input may list the cycle
    elements in any order; closure is verified by walking the orbit from the
    first element and requiring it to visit exactly the given multiset before
    returning. Raises NotACycleError otherwise.
    """
    values = list(cycle_values)
    if not values:
        raise NotACycleError("empty sequence")
    for a in values:
        _check_odd_positive(a, "cycle element")
    m = len(values)
    orbit = []
    ks = []
    cur = values[0]
    for _ in range(m):
        orbit.append(cur)
        rec = t_step(cur, system)
        ks.append(rec.k)
        cur = rec.output
    if cur != values[0]:
        raise NotACycleError(
            f"orbit from {values[0]} does not return after {m} steps "
            f"(reached {cur})"
        )
    if sorted(orbit) != sorted(values):
        raise NotACycleError(
            f"orbit from {values[0]} visits {sorted(orbit)}, not the given "
            f"{sorted(values)}"
        )
    s_m = sum(ks)
    lhs = 1 << s_m
    for a in orbit:
        lhs *= a
    rhs = 1
    for a in orbit:
        rhs *= system.p * a + system.q
    return IdentityCheck(lhs == rhs, lhs - rhs, lhs, rhs)
