import json

import mpmath as mp
import pytest

from pqcycles.cycles import (
    CatalogError,
    CycleRecord,
    DivergenceReport,
    LoopClass,
    SearchLimits,
    classify_cycle,
    classify_values,
    enumerate_cycles,
    exact_bound_check,
    find_cycle_from,
    read_catalog,
    sandwich_check,
    write_catalog,
)
from pqcycles.dynamics import PqSystem, t_step

S31 = PqSystem(3, 1)
S35 = PqSystem(3, 5)
S51 = PqSystem(5, 1)


def test_classify_values_examples():
    assert classify_values(1, 1, S31) is LoopClass.BETA          # 4 < 6
    assert classify_values(3, 19, S35) is LoopClass.BETA         # 62^3 < 2*57^3
    assert classify_values(3, 1, S31) is LoopClass.ALPHA         # 64 > 54
    assert classify_values(1, 1, PqSystem(1, 1)) is LoopClass.BOUNDARY_EQUALITY
    assert classify_values(1, 1, PqSystem(1, 3)) is LoopClass.ALPHA
    # the (3,5) fixed point 1 is a real alpha loop: log2(8/3) > 1
    assert classify_values(1, 1, S35) is LoopClass.ALPHA
    with pytest.raises(ValueError):
        classify_values(0, 1, S31)


def test_record_canonicalization():
    rec = CycleRecord.from_elements([43, 17, 27], S51)
    assert rec.elements == (17, 43, 27)          # successor order from a_min
    assert rec.a_min == 17 and rec.m == 3 and rec.s_m == 7
    for i, e in enumerate(rec.elements):
        step = t_step(e, S51)
        assert step.output == rec.elements[(i + 1) % rec.m]
        assert step.k == rec.k_sequence[i]
    # idempotence: canonicalizing a canonical record reproduces it
    again = CycleRecord.from_elements(rec.elements, S51)
    assert again == rec
    assert classify_cycle(rec) is rec.loop_class is LoopClass.BETA


def test_find_cycle_from():
    rec = find_cycle_from(9, S31)
    assert isinstance(rec, CycleRecord)
    assert rec.elements == (1,) and rec.m == 1
    rec = find_cycle_from(19, S35)
    assert rec.elements == (19, 31, 49) and rec.s_m == 5
    rec = find_cycle_from(13, S51)
    assert rec.elements == (13, 33, 83) and rec.s_m == 7
    with pytest.raises(ValueError):
        find_cycle_from(8, S31)


def test_find_cycle_budget_reports():
    out = find_cycle_from(7, S51, SearchLimits(max_steps=50, max_bits=4096))
    assert isinstance(out, DivergenceReport)
    assert out.reason == "step-budget" and out.steps == 50
    out = find_cycle_from(7, S51, SearchLimits(max_steps=10**6, max_bits=64))
    assert isinstance(out, DivergenceReport)
    assert out.reason == "bit-budget" and out.last_value_bits > 64


def test_enumerate_classic_only_trivial():
    sweep = enumerate_cycles(S31, 10**5)
    assert len(sweep.cycles) == 1
    assert sweep.cycles[0].elements == (1,)
    assert not sweep.suspects


def test_enumerate_3x5():
    sweep = enumerate_cycles(S35, 1000)
    keys = [rec.elements for rec in sweep.cycles]
    assert (1,) in keys and (5,) in keys
    assert (19, 31, 49) in keys and (23, 37, 29) in keys
    assert len(sweep.cycles) == 6          # plus the two 17-element cycles
    seventeens = [r for r in sweep.cycles if r.m == 17]
    assert sorted(r.a_min for r in seventeens) == [187, 347]
    assert all(r.s_m == 27 for r in seventeens)
    assert not sweep.suspects
    # deterministic ordering by (a_min, m)
    assert [r.a_min for r in sweep.cycles] == sorted(r.a_min for r in sweep.cycles)
    # every emitted record satisfies the product identity exactly
    from pqcycles.dynamics import verify_product_identity
    for rec in sweep.cycles:
        assert verify_product_identity(rec.elements, S35).ok


def test_enumerate_5x1():
    sweep = enumerate_cycles(S51, 100)
    keys = [rec.elements for rec in sweep.cycles]
    assert keys == [(1, 3), (13, 33, 83), (17, 43, 27)]
    assert sweep.suspects          # 5x+1 trajectories believed divergent exist
    suspect_starts = {s.start for s in sweep.suspects}
    assert 7 in suspect_starts
    for s in sweep.suspects:
        assert s.reason in ("step-budget", "bit-budget", "joined-suspect-path")
        assert s.last_value_bits > 0


def test_exact_bound_check_fixtures():
    rec = CycleRecord.from_elements([19, 31, 49], S35)
    chk = exact_bound_check(rec)
    assert chk.passed and not chk.with_equality
    assert chk.lhs == 62**3 == 238328
    assert chk.rhs == 2**5 * 19**3 == 219488
    assert chk.bound_kind == "beta" and chk.relation == ">"

    rec = CycleRecord.from_elements([13, 33, 83], S51)
    chk = exact_bound_check(rec)
    assert chk.passed and chk.lhs == 66**3 == 287496
    assert chk.rhs == 2**7 * 13**3 == 281216

    # one-element cycle with exact equality: 20^1 == 2^2 * 5
    rec = CycleRecord.from_elements([5], S35)
    chk = exact_bound_check(rec)
    assert chk.passed and chk.with_equality and chk.relation == "="

    rec = CycleRecord.from_elements([1], S31)
    chk = exact_bound_check(rec)
    assert chk.passed and chk.with_equality

    # real alpha loops pass the alpha comparison strictly
    rec = CycleRecord.from_elements([1], S35)
    assert rec.loop_class is LoopClass.ALPHA
    chk = exact_bound_check(rec)
    assert chk.passed and not chk.with_equality and chk.bound_kind == "alpha"

    rec = CycleRecord.from_elements([1], PqSystem(1, 3))
    chk = exact_bound_check(rec)
    assert chk.passed and chk.bound_kind == "alpha"

    # classification boundary case passes with equality
    rec = CycleRecord.from_elements([1], PqSystem(1, 1))
    assert rec.loop_class is LoopClass.BOUNDARY_EQUALITY
    chk = exact_bound_check(rec)
    assert chk.passed and chk.with_equality

    assert "bound" in exact_bound_check(rec).describe()


def test_sandwich_exact():
    rec = CycleRecord.from_elements([19, 31, 49], S35)
    s = sandwich_check(rec)
    assert s.ok and s.left_strict and s.right_relation == "<"
    rec = CycleRecord.from_elements([5], S35)
    s = sandwich_check(rec)
    assert s.ok and s.right_relation == "=" and s.degenerate
    rec = CycleRecord.from_elements([1], S31)
    s = sandwich_check(rec)
    assert s.ok and s.right_relation == "="


def test_classification_agrees_with_float_oracle():
    # exact integer classification vs 256-bit floating evaluation
    sweeps = [
        enumerate_cycles(S35, 10**4),
        enumerate_cycles(S51, 10**3),
        enumerate_cycles(S31, 10**4),
    ]
    checked = 0
    with mp.workprec(256):
        for sweep in sweeps:
            p, q = sweep.system.p, sweep.system.q
            for rec in sweep.cycles:
                x = rec.m * mp.log(1 + mp.mpf(q) / (p * rec.a_min), 2)
                if x > 1:
                    want = LoopClass.ALPHA
                elif x < 1:
                    want = LoopClass.BETA
                else:
                    want = LoopClass.BOUNDARY_EQUALITY
                assert rec.loop_class is want
                checked += 1
    assert checked >= 10


def test_catalog_roundtrip_and_merge(tmp_path):
    path = str(tmp_path / "cat.jsonl")
    sweep = enumerate_cycles(S35, 1000)
    n = write_catalog(path, sweep.cycles)
    assert n == len(sweep.cycles)
    back = read_catalog(path)
    assert back == list(sweep.cycles)
    # merging the same records is idempotent
    n2 = write_catalog(path, sweep.cycles[:2])
    assert n2 == n
    # merging records from another system appends
    other = enumerate_cycles(S51, 100)
    n3 = write_catalog(path, other.cycles)
    assert n3 == n + len(other.cycles)
    # integers serialized in plain decimal
    with open(path) as fh:
        first = json.loads(fh.readline())
    assert isinstance(first["elements"][0], int)


def test_catalog_malformed_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"p": 3, "q": 5\n')
    with pytest.raises(CatalogError) as err:
        read_catalog(str(path))
    assert "bad.jsonl:1" in str(err.value)
    missing = tmp_path / "nope.jsonl"
    with pytest.raises(FileNotFoundError):
        read_catalog(str(missing))
