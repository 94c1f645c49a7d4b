"""Command-line surface: trajectory traces, cycle sweeps, bound tables,
minimal-m searches and the identity verification suite.

Formats: text (human tables), structured (one JSON document), csv. All
integers are rendered in full decimal everywhere; no scientific notation
appears in machine-readable output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys

from .bounds import (
    alpha_bound,
    beta_bound,
    evaluate_bounds,
    min_m_alpha,
)
from .cycles import (
    CatalogError,
    CycleRecord,
    LoopClass,
    SearchLimits,
    enumerate_cycles,
    exact_bound_check,
    read_catalog,
    sandwich_check,
    write_catalog,
)
from .dynamics import NotACycleError, PqSystem, t_step, t_trajectory, verify_linear_form, verify_product_identity
from .fixedpoint import PrecisionError
from .scan import ScanConfig, min_m_beta_scan

# the canonical verified-range input for the classic system and the published
# search results for it, quoted in reports for comparison
VERIFIED_RANGE_TOP = 19 * 2**58
CANONICAL_A_MIN = VERIFIED_RANGE_TOP - 1
PUBLISHED_ALPHA_MIN_M = 11387806137299329586
PUBLISHED_BETA_MIN_M = 6586818670


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=int, default=3, help="odd multiplier (default 3)")
    parser.add_argument("--q", type=int, default=1, help="odd increment (default 1)")
    parser.add_argument(
        "--format", choices=("text", "structured", "csv"), default="text",
        help="report format (default text)",
    )
    parser.add_argument("--out", default=None, help="write the report here instead of stdout")
    parser.add_argument(
        "--precision-bits", type=int, default=128,
        help="fractional bits for certified evaluations (default 128)",
    )
    parser.add_argument(
        "--progress", type=int, default=0, metavar="N",
        help="print progress to stderr every N scanned m (0 = off)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pqcycles",
        description="Cycle bounds for 3x+1 and its px+q generalization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_traj = sub.add_parser("trajectory", help="trace the odd-only map from a start value")
    p_traj.add_argument("start", type=int)
    p_traj.add_argument("--max-steps", type=int, default=1000)
    _add_common(p_traj)

    p_cyc = sub.add_parser("cycles", help="sweep odd starts, catalog every cycle found")
    p_cyc.add_argument("--limit", type=int, default=1000, help="largest odd start (default 1000)")
    p_cyc.add_argument("--max-steps", type=int, default=20000)
    p_cyc.add_argument("--max-bits", type=int, default=4096)
    p_cyc.add_argument("--catalog", default="catalog.jsonl", help="catalog file to write/merge")
    _add_common(p_cyc)

    p_bounds = sub.add_parser("bounds", help="evaluate the loop bounds for given m")
    p_bounds.add_argument("--m", type=int, action="append", required=True,
                          help="loop size; repeatable")
    _add_common(p_bounds)

    p_min = sub.add_parser("min-m", help="minimal loop size admitted by a minimum element")
    p_min.add_argument("search", choices=("alpha", "beta"))
    p_min.add_argument("--a-min", type=int, required=True)
    p_min.add_argument("--chunk-size", type=int, default=1 << 22)
    p_min.add_argument("--workers", type=int, default=0, help="0 = one per CPU")
    _add_common(p_min)

    p_ver = sub.add_parser("verify", help="run the exact identity suite")
    p_ver.add_argument("--catalog", default="catalog.jsonl", help="catalog file to check")
    p_ver.add_argument("--samples", type=int, default=1000)
    p_ver.add_argument("--sample-max-steps", type=int, default=20)
    p_ver.add_argument("--start-max", type=int, default=10**6)
    p_ver.add_argument("--seed", type=int, default=0)
    _add_common(p_ver)

    return parser


def _system_from(args: argparse.Namespace, parser: argparse.ArgumentParser) -> PqSystem:
    try:
        return PqSystem(args.p, args.q)
    except ValueError as exc:
        parser.error(str(exc))


def _positive(parser, value: int, name: str) -> int:
    if value < 1:
        parser.error(f"{name} must be positive")
    return value


def _emit(args, payload: dict, text_lines: list[str],
          csv_header: list[str], csv_rows: list[list]) -> None:
    if args.format == "structured":
        body = json.dumps(payload, indent=2)
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(csv_header)
        writer.writerows(csv_rows)
        body = buf.getvalue().rstrip("\n")
    else:
        body = "\n".join(text_lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body + "\n")
    else:
        print(body)


# --------------------------------------------------------------------------
# trajectory
# --------------------------------------------------------------------------

def _trace(start: int, system: PqSystem, max_steps: int):
    """Iterate T, stopping once an output value recurs (cycle entered) or at
    max_steps. Returns (values, ks, sums, cycle or None, truncated)."""
    values: list[int] = []
    ks: list[int] = []
    sums: list[int] = []
    seen: dict[int, int] = {}
    cur = start
    total = 0
    for _ in range(max_steps):
        rec = t_step(cur, system)
        if rec.output in seen:
            cycle = values[seen[rec.output]:]
            return values, ks, sums, cycle, False
        seen[rec.output] = len(values)
        values.append(rec.output)
        ks.append(rec.k)
        total += rec.k
        sums.append(total)
        cur = rec.output
    return values, ks, sums, None, True


def cmd_trajectory(args, parser) -> int:
    system = _system_from(args, parser)
    if args.start < 1 or args.start % 2 == 0:
        parser.error("start must be a positive odd integer")
    _positive(parser, args.max_steps, "--max-steps")
    values, ks, sums, cycle, truncated = _trace(args.start, system, args.max_steps)
    canonical_cycle = None
    fixed_point = False
    if cycle is not None:
        a_min = min(cycle)
        i = cycle.index(a_min)
        canonical_cycle = cycle[i:] + cycle[:i]
        fixed_point = len(cycle) == 1
    payload = {
        "command": "trajectory",
        "p": system.p,
        "q": system.q,
        "start": args.start,
        "values": values,
        "k_sequence": ks,
        "s_partial": sums,
        "entered_cycle": canonical_cycle,
        "fixed_point": fixed_point,
        "truncated": truncated,
    }
    lines = [f"trajectory of {args.start} under p={system.p} q={system.q}"]
    for i, (v, k, s) in enumerate(zip(values, ks, sums), start=1):
        lines.append(f"step {i}: value {v} k {k} S {s}")
    if canonical_cycle is not None:
        tag = " (fixed point)" if fixed_point else ""
        lines.append(f"entered cycle: {canonical_cycle}{tag}")
    if truncated:
        lines.append(f"stopped at max-steps {args.max_steps} without repeating")
    header = ["step", "value", "k", "s"]
    rows = [[i + 1, v, k, s] for i, (v, k, s) in enumerate(zip(values, ks, sums))]
    _emit(args, payload, lines, header, rows)
    return 0


# --------------------------------------------------------------------------
# cycles
# --------------------------------------------------------------------------

def _bound_value_str(rec: CycleRecord, bits: int) -> str:
    if rec.loop_class is LoopClass.BETA:
        return beta_bound(rec.m, rec.system, bits).decimal_str(24)
    return alpha_bound(rec.m, rec.system, bits).decimal_str(24)


def cmd_cycles(args, parser) -> int:
    system = _system_from(args, parser)
    _positive(parser, args.limit, "--limit")
    limits = SearchLimits(
        _positive(parser, args.max_steps, "--max-steps"),
        _positive(parser, args.max_bits, "--max-bits"),
    )
    sweep = enumerate_cycles(system, args.limit, limits)
    written = write_catalog(args.catalog, sweep.cycles, merge=True)

    cycle_rows = []
    for rec in sweep.cycles:
        check = exact_bound_check(rec)
        sand = sandwich_check(rec)
        verdict = (
            "pass-with-equality" if check.passed and check.with_equality
            else ("pass" if check.passed else "fail")
        )
        cycle_rows.append((rec, check, sand, verdict))

    payload = {
        "command": "cycles",
        "p": system.p,
        "q": system.q,
        "limit": args.limit,
        "catalog": args.catalog,
        "catalog_records": written,
        "cycles": [
            {
                **rec.to_json_dict(),
                "bound_check": verdict,
                "bound_comparison": check.describe(),
                "bound_value": _bound_value_str(rec, args.precision_bits),
                "sandwich_ok": sand.ok,
            }
            for rec, check, sand, verdict in cycle_rows
        ],
        "suspects": [
            {"start": s.start, "last_value_bits": s.last_value_bits, "reason": s.reason}
            for s in sweep.suspects
        ],
    }
    lines = [f"cycle sweep p={system.p} q={system.q}, odd starts <= {args.limit}"]
    for rec, check, sand, verdict in cycle_rows:
        lines.append(
            f"  a_min={rec.a_min} m={rec.m} S_m={rec.s_m} "
            f"class={rec.loop_class.value} bound={verdict} "
            f"elements={list(rec.elements)}"
        )
    lines.append(
        f"{len(sweep.cycles)} cycles, {len(sweep.suspects)} divergence suspects"
    )
    if sweep.suspects:
        shown = ", ".join(str(s.start) for s in sweep.suspects[:8])
        more = "..." if len(sweep.suspects) > 8 else ""
        lines.append(f"suspect starts: {shown}{more}")
    lines.append(f"catalog: {args.catalog} ({written} records)")
    header = ["p", "q", "m", "s_m", "a_min", "loop_class", "bound_value", "check"]
    rows = [
        [system.p, system.q, rec.m, rec.s_m, rec.a_min, rec.loop_class.value,
         _bound_value_str(rec, args.precision_bits), verdict]
        for rec, check, sand, verdict in cycle_rows
    ]
    _emit(args, payload, lines, header, rows)
    return 0


# --------------------------------------------------------------------------
# bounds
# --------------------------------------------------------------------------

def cmd_bounds(args, parser) -> int:
    system = _system_from(args, parser)
    bits = _positive(parser, args.precision_bits, "--precision-bits")
    rows_payload = []
    lines = [f"loop bounds under p={system.p} q={system.q} at {bits} fractional bits"]
    csv_rows = []
    for m in args.m:
        _positive(parser, m, "--m")
        ev = evaluate_bounds(m, system, bits)
        alpha_s = ev.alpha.decimal_str(24)
        beta_s = ev.beta.decimal_str(24)
        frac = ev.frac_mlog2p
        rows_payload.append(
            {
                "m": m,
                "alpha": {"lo": ev.alpha.lo, "hi": ev.alpha.hi, "bits": bits,
                          "decimal": alpha_s},
                "beta": {"lo": ev.beta.lo, "hi": ev.beta.hi, "bits": bits,
                         "decimal": beta_s},
                "frac_mlog2p": {"numerator": frac.numerator, "bits": frac.bits,
                                "error_ulps": frac.error_ulps},
            }
        )
        lines.append(f"m={m} alpha={alpha_s} beta={beta_s} "
                     f"frac(m*log2 p)={frac.as_float():.18f}")
        csv_rows.append([m, alpha_s, beta_s, frac.numerator, frac.bits])
    payload = {
        "command": "bounds",
        "p": system.p,
        "q": system.q,
        "precision_bits": bits,
        "rows": rows_payload,
    }
    _emit(args, payload, lines,
          ["m", "alpha", "beta", "frac_numerator", "frac_bits"], csv_rows)
    return 0


# --------------------------------------------------------------------------
# min-m
# --------------------------------------------------------------------------

def _min_m_notes(result) -> list[str]:
    notes = []
    sys_ = result.system
    canonical = (sys_.p, sys_.q, result.a_min) == (3, 1, CANONICAL_A_MIN)
    if canonical:
        notes.append(
            f"input a_min = 19*2^58 - 1 sits at the top of the verified "
            f"convergence range ({VERIFIED_RANGE_TOP}); the least admissible "
            f"loop minimum above the range would be 19*2^58 + 1"
        )
        if result.search == "alpha":
            if result.minimal_m == PUBLISHED_ALPHA_MIN_M:
                notes.append(
                    f"matches the published search value {PUBLISHED_ALPHA_MIN_M}"
                )
            else:
                notes.append(
                    f"published reference value {PUBLISHED_ALPHA_MIN_M} differs: "
                    f"the certified evaluation of log(2)/log(1+1/(3*a_min)) "
                    f"gives {result.minimal_m}; the published figure is "
                    f"reproducible only at reduced intermediate precision"
                )
        else:
            if result.minimal_m == PUBLISHED_BETA_MIN_M:
                notes.append(
                    f"matches the published search value {PUBLISHED_BETA_MIN_M}"
                )
            else:
                notes.append(
                    f"published reference value {PUBLISHED_BETA_MIN_M} differs "
                    f"from the computed {result.minimal_m}"
                )
            notes.append(
                "footnote: this exceeds the strongest previously published "
                "lower bound on non-trivial cycle length for the classic "
                "system (Sinisalo 2003)"
            )
    return notes


def cmd_min_m(args, parser) -> int:
    system = _system_from(args, parser)
    a_min = _positive(parser, args.a_min, "--a-min")
    bits = _positive(parser, args.precision_bits, "--precision-bits")
    if args.search == "alpha":
        result = min_m_alpha(a_min, system, max(bits, 192))
    else:
        progress = None
        if args.progress > 0:
            interval = args.progress

            def progress(m_done, _last=[0]):
                if m_done - _last[0] >= interval:
                    _last[0] = m_done
                    print(f"checked through m={m_done}", file=sys.stderr)

        cfg = ScanConfig(
            precision_bits=bits,
            chunk_size=_positive(parser, args.chunk_size, "--chunk-size"),
            workers=None if args.workers == 0 else args.workers,
            progress=progress,
        )
        result = min_m_beta_scan(a_min, system, cfg)
    notes = _min_m_notes(result)
    payload = {"command": "min-m", **result.to_json_dict(), "notes": notes}
    lines = [
        f"min-m {result.search} search: a_min={a_min} p={system.p} q={system.q}",
        f"minimal m = {result.minimal_m}",
        f"precision: {result.precision_bits} fractional bits",
    ]
    if result.near_ties:
        lines.append("near ties (guard-band events):")
        for t in result.near_ties:
            how = "exact integer identity" if t.exact else f"{t.decided_bits} bits"
            verdict = "accepted" if t.accepted else "rejected"
            lines.append(f"  m={t.m}: {verdict} via {how}")
    else:
        lines.append("near ties: none")
    for note in notes:
        lines.append(f"note: {note}")
    header = ["search", "a_min", "p", "q", "minimal_m", "precision_bits", "near_ties"]
    rows = [[result.search, a_min, system.p, system.q, result.minimal_m,
             result.precision_bits,
             ";".join(str(t.m) for t in result.near_ties)]]
    _emit(args, payload, lines, header, rows)
    return 0


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------

def _verify_record(rec: CycleRecord) -> list[str]:
    """Exact re-derivation of one catalog record; returns failure transcript
    lines (empty when clean)."""
    fails = []
    cur = rec.a_min
    for i, (elem, k) in enumerate(zip(rec.elements, rec.k_sequence)):
        if elem != cur:
            fails.append(
                f"chain mismatch at index {i}: recorded {elem}, expected {cur} "
                f"(residual {elem - cur})"
            )
            break
        step = t_step(cur, rec.system)
        if step.k != k:
            fails.append(
                f"valuation mismatch at index {i}: recorded k={k}, exact k={step.k}"
            )
            break
        cur = step.output
    else:
        if cur != rec.elements[0]:
            fails.append(f"cycle does not close: T^m({rec.elements[0]}) = {cur}")
    if rec.s_m != sum(rec.k_sequence) or rec.m != len(rec.elements):
        fails.append(
            f"header mismatch: m={rec.m} S_m={rec.s_m} vs "
            f"{len(rec.elements)} elements summing k to {sum(rec.k_sequence)}"
        )
    try:
        check = verify_product_identity(rec.elements, rec.system)
        if not check.ok:
            fails.append(
                f"product identity residual {check.residual} "
                f"(lhs {check.lhs}, rhs {check.rhs})"
            )
    except NotACycleError as exc:
        fails.append(f"product identity: {exc}")
    return fails


def cmd_verify(args, parser) -> int:
    system = _system_from(args, parser)
    failures: list[str] = []
    warnings: list[str] = []
    try:
        records = read_catalog(args.catalog)
    except FileNotFoundError:
        print(f"error: catalog not found: {args.catalog}", file=sys.stderr)
        return 1
    except CatalogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not records:
        warnings.append(f"catalog {args.catalog} is empty; cycle identities pass vacuously")
    checked = 0
    for rec in records:
        fails = _verify_record(rec)
        for f in fails:
            failures.append(
                f"catalog record p={rec.system.p} q={rec.system.q} "
                f"a_min={rec.a_min}: {f}"
            )
        checked += 1

    rng = random.Random(args.seed)
    samples = _positive(parser, args.samples, "--samples")
    max_steps = _positive(parser, args.sample_max_steps, "--sample-max-steps")
    linear_checked = 0
    for _ in range(samples):
        start = rng.randrange(1, args.start_max, 2)
        traj = t_trajectory(start, system, max_steps)
        for m in range(1, max_steps + 1):
            check = verify_linear_form(traj, m)
            if not check.ok:
                failures.append(
                    f"linear form residual {check.residual} at start {start} m={m}"
                )
        linear_checked += 1

    ok = not failures
    payload = {
        "command": "verify",
        "p": system.p,
        "q": system.q,
        "catalog": args.catalog,
        "catalog_records": checked,
        "linear_form_samples": linear_checked,
        "prefix_steps": max_steps,
        "seed": args.seed,
        "warnings": warnings,
        "failures": failures,
        "passed": ok,
    }
    lines = [f"identity suite p={system.p} q={system.q}"]
    lines.append(f"catalog {args.catalog}: {checked} records checked")
    lines.append(
        f"linear form: {linear_checked} sampled trajectories, "
        f"prefixes to {max_steps} steps, seed {args.seed}"
    )
    for w in warnings:
        lines.append(f"warning: {w}")
    for f in failures:
        lines.append(f"FAIL: {f}")
    lines.append("PASS" if ok else "FAIL")
    header = ["check", "count", "result"]
    rows = [
        ["catalog-records", checked, "pass" if ok else "fail"],
        ["linear-form-samples", linear_checked, "pass" if ok else "fail"],
    ]
    _emit(args, payload, lines, header, rows)
    return 0 if ok else 1


# --------------------------------------------------------------------------

def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "trajectory": cmd_trajectory,
        "cycles": cmd_cycles,
        "bounds": cmd_bounds,
        "min-m": cmd_min_m,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args, parser)
    except PrecisionError as exc:
        print(f"error: precision escalation exhausted: {exc}", file=sys.stderr)
        return 1
    except CatalogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
