"""Acceptance gate: ten headline guarantees, one verdict line each.

The lines go to the real stdout so they survive pytest capture; every
test also asserts, so a FAIL line always comes with a red test.
"""

import sys
import time

from adc import quorum as Q
from adc.sim.sweep import (SweepMatrix, run_baseline_comparison,
                           summarize_medians, trend_large_slot_advantage,
                           trend_prr_monotone, trend_small_slot_baseline,
                           trend_throughput_ranges)
from adc.verify import (check_delay_ceiling, check_k_round_load,
                        check_quorum_cardinality, check_rendezvous_floor,
                        check_repair_connectivity, check_rotation_closure,
                        check_schedule_pipeline, check_selection_load)


def _emit(n: int, passed: bool, summary: str) -> None:
    mark = "PASS" if passed else "FAIL"
    print(f"criterion {n:02d} {mark}: {summary}",
          file=sys.__stdout__, flush=True)


def test_criterion_01_rotation_closure_exhaustive():
    res = check_rotation_closure()
    ok = res.passed and res.elapsed_s < 10
    _emit(1, ok, f"{res.cases} pair-shift cases in {res.elapsed_s:.2f}s; "
                 f"{res.detail}")
    assert res.passed, res.detail
    assert res.elapsed_s < 10


def test_criterion_02_aligned_rendezvous_floor():
    res = check_rendezvous_floor(aligned=True)
    _emit(2, res.passed, f"{res.cases} demand pairs; {res.detail}")
    assert res.passed, res.detail


def test_criterion_03_shifted_rendezvous_floor():
    res = check_rendezvous_floor(aligned=False)
    _emit(3, res.passed, f"{res.cases} demand pairs, min over every "
                         f"rotation; {res.detail}")
    assert res.passed, res.detail


def test_criterion_04_cardinality_floor_and_converse():
    res = check_quorum_cardinality(m=100)
    # belt and braces: every constructible cross shape clears the floor
    side = Q.grid_side(100)
    pool = Q.build_grid_qs(100).all_cross_quorums()
    undersized = [q for q in pool if len(q) < side]
    ok = res.passed and not undersized
    _emit(4, ok, f"{res.cases} demand-driven quorums plus "
                 f"{len(pool)} cross shapes; {res.detail}")
    assert res.passed, res.detail
    assert not undersized


def test_criterion_05_selection_load_ceiling():
    res = check_selection_load(trials=1000)
    _emit(5, res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_06_k_round_balancing():
    res = check_k_round_load()
    _emit(6, res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_07_schedule_pipeline_clean():
    res = check_schedule_pipeline(count=20)
    ok = res.passed and res.elapsed_s < 60
    _emit(7, ok, f"{res.detail} in {res.elapsed_s:.1f}s")
    assert res.passed, res.detail
    assert res.elapsed_s < 60


def test_criterion_08_delay_obeys_mode_ceiling():
    res = check_delay_ceiling(count=20, vectors=5)
    modes = res.extras.get("modes", {})
    covered = {"sync", "async", "share"} <= set(modes)
    ok = res.passed and covered
    _emit(8, ok, res.detail)
    assert res.passed, res.detail
    assert covered, f"clock regimes exercised: {modes}"


def test_criterion_09_repair_restores_every_pair():
    res = check_repair_connectivity()
    _emit(9, res.passed, res.detail)
    assert res.passed, res.detail


def test_criterion_10_baseline_comparison_trends():
    t0 = time.time()
    rows = run_baseline_comparison(SweepMatrix(), jobs=4)
    med = summarize_medians(rows, "throughput")
    prr = summarize_medians(rows, "prr")
    advantage = trend_large_slot_advantage(med)
    small_slot = trend_small_slot_baseline(med)
    rho = trend_prr_monotone(prr)
    ranges = trend_throughput_ranges(med)
    elapsed = time.time() - t0
    ok = (advantage and small_slot
          and rho["adc"] > 0.8 and rho["lpl"] > 0.8
          and ranges["adc"] < ranges["lpl"] and elapsed < 600)
    _emit(10, ok,
          f"{len(rows)} runs in {elapsed:.0f}s; large-slot advantage "
          f"{advantage}, small-slot baseline {small_slot}, prr rho "
          f"adc {rho['adc']:.2f} / lpl {rho['lpl']:.2f}, throughput range "
          f"adc {ranges['adc']:.2f} < lpl {ranges['lpl']:.2f}")
    assert advantage, "quorum MAC should win on second-scale slots under load"
    assert small_slot, "listening baseline should hold the 50 ms slot"
    assert rho["adc"] > 0.8 and rho["lpl"] > 0.8, rho
    assert ranges["adc"] < ranges["lpl"], ranges
    assert elapsed < 600
