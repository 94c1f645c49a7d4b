"""Discovery, canonicalization, classification and persistence of T-cycles.

A cycle is stored rotated so its smallest element comes first, which makes
the element tuple a rotation-invariant identity key. Classification and the
minimum-element bound checks are exact integer comparisons throughout; the
only inequalities ever decided are between big integers.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .dynamics import PqSystem, t_step, verify_product_identity


class LoopClass(enum.Enum):
    ALPHA = "alpha"
    BETA = "beta"
    BOUNDARY_EQUALITY = "boundary_equality"


def classify_values(m: int, a_min: int, system: PqSystem) -> LoopClass:
    """Decide m*log2(1 + q/(p*a_min)) vs 1 exactly.

    Equivalent integer form: (p*a_min+q)^m vs 2*(p*a_min)^m. Strictly
    greater is an alpha loop, strictly less a beta loop, equality the
    boundary case outside the two-class scheme.
    """
    if m < 1 or a_min < 1:
        raise ValueError("m and a_min must be positive")
    base = system.p * a_min
    lhs = (base + system.q) ** m
    rhs = 2 * base ** m
    if lhs > rhs:
        return LoopClass.ALPHA
    if lhs < rhs:
        return LoopClass.BETA
    return LoopClass.BOUNDARY_EQUALITY


@dataclass(frozen=True)
class CycleRecord:
    """A canonical non-repeating T-cycle: elements in successor order rotated
    so elements[0] == a_min, with the matching valuations."""

    system: PqSystem
    elements: tuple[int, ...]
    k_sequence: tuple[int, ...]
    m: int
    s_m: int
    a_min: int
    loop_class: LoopClass

    @classmethod
    def from_elements(
        cls, cycle_values: Sequence[int], system: PqSystem
    ) -> "CycleRecord":
        """Canonicalize any listing of a genuine cycle (validated by the
        product identity's orbit walk) into a record."""
        verify_product_identity(cycle_values, system)
        m = len(cycle_values)
        a_min = min(cycle_values)
        elements = []
        ks = []
        cur = a_min
        for _ in range(m):
            rec = t_step(cur, system)
            elements.append(cur)
            ks.append(rec.k)
            cur = rec.output
        return cls(
            system=system,
            elements=tuple(elements),
            k_sequence=tuple(ks),
            m=m,
            s_m=sum(ks),
            a_min=a_min,
            loop_class=classify_values(m, a_min, system),
        )

    def canonical_key(self) -> tuple[int, int, tuple[int, ...]]:
        return (self.system.p, self.system.q, self.elements)

    def to_json_dict(self) -> dict:
        return {
            "p": self.system.p,
            "q": self.system.q,
            "elements": list(self.elements),
            "k_sequence": list(self.k_sequence),
            "s_m": self.s_m,
            "m": self.m,
            "a_min": self.a_min,
            "loop_class": self.loop_class.value,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "CycleRecord":
        return cls(
            system=PqSystem(d["p"], d["q"]),
            elements=tuple(d["elements"]),
            k_sequence=tuple(d["k_sequence"]),
            m=d["m"],
            s_m=d["s_m"],
            a_min=d["a_min"],
            loop_class=LoopClass(d["loop_class"]),
        )


def classify_cycle(record: CycleRecord) -> LoopClass:
    """Re-derive the loop class of a record from (m, a_min, system)."""
    return classify_values(record.m, record.a_min, record.system)


class BoundCheck(NamedTuple):
    """Transcript of the exact minimum-element bound comparison."""

    passed: bool
    with_equality: bool
    bound_kind: str          # "alpha" or "beta"
    lhs: int                 # (p*a_min + q)^m
    rhs: int                 # 2*(p*a_min)^m or 2^(J+1)*a_min^m
    relation: str            # "<", "=", ">"
    exponent: int            # the power of two on the rhs (beta), or 1

    def describe(self) -> str:
        if self.bound_kind == "beta":
            rhs_expr = f"2^{self.exponent} * a_min^m"
        else:
            rhs_expr = "2 * (p*a_min)^m"
        return (
            f"{self.bound_kind} bound: (p*a_min+q)^m = {self.lhs} "
            f"{self.relation} {rhs_expr} = {self.rhs}"
        )


def exact_bound_check(record: CycleRecord) -> BoundCheck:
    """Verify a_min < alpha_m(p,q) (alpha loops) or a_min < beta_m(p,q)
    (beta loops) via the exact integer equivalents.

    Alpha:  (p*a_min+q)^m > 2*(p*a_min)^m.
    Beta:   (p*a_min+q)^m > 2^(floor(m*log2(p))+1) * a_min^m, with the floor
            computed exactly as bitlength(p^m) - 1.

    Equality passes only for degenerate cycles (all elements equal), where
    the strict inequalities genuinely collapse.
    """
    sys_ = record.system
    a, m = record.a_min, record.m
    lhs = (sys_.p * a + sys_.q) ** m
    if record.loop_class is LoopClass.BETA:
        j = (sys_.p ** m).bit_length() - 1
        rhs = a ** m << (j + 1)
        kind, exponent = "beta", j + 1
    else:
        rhs = 2 * (sys_.p * a) ** m
        kind, exponent = "alpha", 1
    degenerate = len(set(record.elements)) == 1
    relation = ">" if lhs > rhs else ("=" if lhs == rhs else "<")
    passed = lhs > rhs or (lhs == rhs and degenerate)
    return BoundCheck(passed, lhs == rhs, kind, lhs, rhs, relation, exponent)


class SandwichCheck(NamedTuple):
    """Exact rational form of the two-sided valuation-sum bound:
    p^m < 2^S_m <= (p + q/a_min)^m, right side strict unless degenerate."""

    ok: bool
    left_strict: bool
    right_relation: str      # "<" or "="
    degenerate: bool


def sandwich_check(record: CycleRecord) -> SandwichCheck:
    sys_ = record.system
    m, s_m, a = record.m, record.s_m, record.a_min
    left = sys_.p ** m < (1 << s_m)
    # right side cleared of denominators: 2^S_m * a^m vs (p*a + q)^m
    lhs = (1 << s_m) * a ** m
    rhs = (sys_.p * a + sys_.q) ** m
    degenerate = len(set(record.elements)) == 1
    relation = "<" if lhs < rhs else ("=" if lhs == rhs else ">")
    ok = left and (relation == "<" or (relation == "=" and degenerate))
    return SandwichCheck(ok, left, relation, degenerate)


# --------------------------------------------------------------------------
# cycle search and sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchLimits:
    """Budget for a single trajectory: step count and bit size of
    intermediates. Exhaustion is a report, not a failure."""

    max_steps: int = 20000
    max_bits: int = 4096

    def __post_init__(self):
        if self.max_steps < 1 or self.max_bits < 1:
            raise ValueError("budgets must be positive")


@dataclass(frozen=True)
class DivergenceReport:
    start: int
    steps: int
    last_value_bits: int
    reason: str              # "step-budget", "bit-budget", "joined-suspect-path"


def find_cycle_from(
    start: int, system: PqSystem = PqSystem(3, 1), limits: SearchLimits = SearchLimits()
) -> CycleRecord | DivergenceReport:
    """Iterate T from `start` with visited-value cycle detection.

    Returns the canonical record of whatever cycle the trajectory falls into
    (the trivial fixed point included), or a divergence report when a budget
    is exhausted first.
    """
    if start % 2 == 0 or start < 1:
        raise ValueError("start must be a positive odd integer")
    seen: dict[int, int] = {}
    path: list[int] = []
    cur = start
    while True:
        if cur in seen:
            cycle = path[seen[cur]:]
            return CycleRecord.from_elements(cycle, system)
        if len(path) >= limits.max_steps:
            return DivergenceReport(start, len(path), cur.bit_length(), "step-budget")
        if cur.bit_length() > limits.max_bits:
            return DivergenceReport(start, len(path), cur.bit_length(), "bit-budget")
        seen[cur] = len(path)
        path.append(cur)
        cur = t_step(cur, system).output


@dataclass(frozen=True)
class SweepResult:
    system: PqSystem
    start_limit: int
    limits: SearchLimits
    cycles: tuple[CycleRecord, ...]
    suspects: tuple[DivergenceReport, ...]


def enumerate_cycles(
    system: PqSystem,
    start_limit: int,
    limits: SearchLimits = SearchLimits(),
) -> SweepResult:
    """Run the cycle search over every odd start <= start_limit.

    Cycles are deduplicated by canonical rotation and ordered by
    (a_min, m); starts whose budget runs out are listed separately as
    divergence suspects. A per-sweep cache of resolved values keeps the
    total work proportional to the union of the trajectories.
    """
    if start_limit < 1:
        raise ValueError("start_limit must be >= 1")
    resolved: dict[int, object] = {}
    cycles: dict[tuple, CycleRecord] = {}
    suspects: list[DivergenceReport] = []

    for start in range(1, start_limit + 1, 2):
        if start in resolved:
            outcome = resolved[start]
            if isinstance(outcome, DivergenceReport):
                suspects.append(
                    DivergenceReport(
                        start, 0, outcome.last_value_bits, "joined-suspect-path"
                    )
                )
            continue
        path: list[int] = []
        index: dict[int, int] = {}
        cur = start
        outcome = None
        while True:
            if cur in resolved:
                outcome = resolved[cur]
                break
            if cur in index:
                cycle = path[index[cur]:]
                rec = CycleRecord.from_elements(cycle, system)
                cycles.setdefault(rec.canonical_key(), rec)
                outcome = rec.canonical_key()
                break
            if len(path) >= limits.max_steps:
                outcome = DivergenceReport(
                    start, len(path), cur.bit_length(), "step-budget"
                )
                break
            if cur.bit_length() > limits.max_bits:
                outcome = DivergenceReport(
                    start, len(path), cur.bit_length(), "bit-budget"
                )
                break
            index[cur] = len(path)
            path.append(cur)
            cur = t_step(cur, system).output
        for v in path:
            resolved[v] = outcome
        if isinstance(outcome, DivergenceReport):
            if outcome.start == start:
                suspects.append(outcome)
            else:
                suspects.append(
                    DivergenceReport(
                        start, len(path), outcome.last_value_bits,
                        "joined-suspect-path",
                    )
                )
    ordered = sorted(cycles.values(), key=lambda r: (r.a_min, r.m))
    return SweepResult(system, start_limit, limits, tuple(ordered), tuple(suspects))


# --------------------------------------------------------------------------
# catalog persistence (one JSON object per line)
# --------------------------------------------------------------------------

class CatalogError(ValueError):
    """A catalog file could not be read or parsed; message carries the path."""


def write_catalog(path: str, records: Iterable[CycleRecord], merge: bool = True) -> int:
    """Write records to a line-delimited JSON catalog.

    With merge=True existing records in the file are kept and deduplicated
    against the new ones. Returns the number of records written. Integers are
    rendered in plain decimal with no width limit.
    """
    merged: dict[tuple, CycleRecord] = {}
    if merge:
        try:
            for rec in read_catalog(path):
                merged[rec.canonical_key()] = rec
        except FileNotFoundError:
            pass
    for rec in records:
        merged[rec.canonical_key()] = rec
    ordered = sorted(
        merged.values(), key=lambda r: (r.system.p, r.system.q, r.a_min, r.m)
    )
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in ordered:
                fh.write(json.dumps(rec.to_json_dict(), separators=(",", ":")))
                fh.write("\n")
    except OSError as exc:
        raise CatalogError(f"cannot write catalog {path}: {exc}") from exc
    return len(ordered)


def read_catalog(path: str) -> list[CycleRecord]:
    """Parse a line-delimited catalog. FileNotFoundError passes through;
    malformed lines raise CatalogError with the path and line number."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                records.append(CycleRecord.from_json_dict(d))
            except (ValueError, KeyError, TypeError) as exc:
                raise CatalogError(
                    f"{path}:{lineno}: malformed catalog line: {exc}"
                ) from exc
    return records
