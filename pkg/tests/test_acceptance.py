"""Acceptance suite: one PASS/FAIL line per criterion.

Run alone with ``pytest tests/test_acceptance.py -s`` or ``python tests/test_acceptance.py``.
The lines are printed even without ``-s``.
"""

import math
from fractions import Fraction

import pytest

from conftest import TWO_NODE, make
from genflow.contract import ContractionLog, reduce
from genflow.generate import suite
from genflow.model import FlowState, InvariantViolation, Network, parse_instance
from genflow.netflow import UnsafeLabelling
from genflow.oracle import oracle_solve, verify_certificates
from genflow.ppn import fast_ops_cap
from genflow.report import augmentation_budget, fitted_exponent, scaling_rows
from genflow.solver import solve
from genflow.stats import RunOptions


@pytest.fixture(scope="module")
def runs():
    out = []
    for inst in suite(300):
        fast = solve(inst, RunOptions(mode="fast", checked=True, trace=True))
        ref = solve(inst, RunOptions(mode="reference", trace=True))
        out.append((inst, fast, ref, oracle_solve(inst)))
    return out


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def test_1_oracle_equivalence(runs, report):
    bad = []
    statuses = {}
    for i, (inst, fast, _, ref) in enumerate(runs):
        statuses[ref.status] = statuses.get(ref.status, 0) + 1
        if fast.status != ref.status or (ref.status == "OPTIMAL" and fast.objective != ref.objective):
            bad.append(i)
    mix = ", ".join(f"{k} {v}" for k, v in sorted(statuses.items()))
    report(1, not bad and len(statuses) == 3,
           f"{len(runs) - len(bad)}/{len(runs)} match the oracle exactly ({mix}); mismatches {bad[:10]}")


def test_2_invariants_in_checked_mode(runs, report):
    viol = [(i, fast.stats.violations[0]) for i, (_, fast, _, _) in enumerate(runs) if fast.stats.violations]
    report(2, not viol, f"{len(viol)} of {len(runs)} checked runs reported violations {viol[:3]}")


def test_3_label_bit_size(runs, report):
    bad = []
    worst = Fraction(0)
    for i, (inst, fast, _, _) in enumerate(runs):
        n, B = inst.n, inst.bound_B
        size_cap = 4 * n * n * B ** (2 * n)
        st = fast.stats
        ratio = Fraction(max(st.max_label_den, st.max_label_num), size_cap)
        worst = max(worst, ratio)
        if not (st.label_bound_ok and st.max_label_den <= size_cap and st.max_label_num <= size_cap
                and st.max_label <= 2 * n * B ** n):
            bad.append(i)
    report(3, not bad, f"{len(bad)} runs beyond the label bounds; largest size/bound ratio {float(worst):.3g}")


def test_4_mode_equivalence(runs, report):
    bad = []
    for i, (_, fast, ref, _) in enumerate(runs):
        same = (fast.status == ref.status and fast.stats.trace == ref.stats.trace
                and fast.finals == ref.finals and fast.labels == ref.labels and fast.flow == ref.flow)
        if not same:
            bad.append(i)
    events = sum(len(f.stats.trace) for _, f, _, _ in runs)
    report(4, not bad, f"{len(runs) - len(bad)}/{len(runs)} identical traces and final pairs ({events} events); differing {bad[:10]}")


def test_5_complexity_scaling(report):
    rows = scaling_rows(sizes=(10, 20, 40, 80), seeds=(0,))
    over = []
    for r in rows:
        ops_cap = fast_ops_cap(r.n, r.m)
        if r.augmentations > augmentation_budget(r.n, r.m) or r.max_ops_between_augmentations > ops_cap:
            over.append(r.n)
    summary = "; ".join(f"n={r.n} aug={r.augmentations}/{r.augmentation_cap} "
                        f"ops={r.max_ops_between_augmentations}/{int(fast_ops_cap(r.n, r.m))}" for r in rows)
    slope = fitted_exponent(rows)
    report(5, not over and not math.isnan(slope),
           f"fitted augmentation growth n^{slope:.2f}; {summary}; over cap at n in {over}")


def test_6_regression_fixtures(report):
    notes = []
    M = 1000
    unsafe = make(2, 2, [(1, 2, 1), (2, 1, Fraction(1, M))], {1: 1})
    state = FlowState(Network.from_instance(unsafe), {1: Fraction(1), 2: Fraction(1)})
    log = ContractionLog.start(state.network.nodes)
    try:
        reduce(state, log)
    except (UnsafeLabelling, InvariantViolation):
        pass
    out = solve(unsafe, RunOptions(checked=True))
    contracted = [r.arc for lg in out.logs.values() for r in lg.records]
    ok_unsafe = not log.records and 0 not in contracted and out.objective == oracle_solve(unsafe).objective
    notes.append(f"unsafe-label arc contracted: {not ok_unsafe}")
    two = solve(parse_instance(TWO_NODE))
    ok_two = two.status == "OPTIMAL" and two.objective == 100
    notes.append(f"two-node {two.status} {two.objective}")
    infeasible = solve(make(2, 1, [(2, 1, 1)], {2: 5})).status
    notes.append(f"single arc {infeasible}")
    unbounded = solve(make(3, 3, [(1, 2, 2), (2, 1, 1), (2, 3, 1)])).status
    notes.append(f"gain cycle to sink {unbounded}")
    report(6, ok_unsafe and ok_two and infeasible == "INFEASIBLE" and unbounded == "UNBOUNDED",
           "; ".join(notes))


def test_7_certificates(runs, report):
    optimal = [(inst, fast) for inst, fast, _, _ in runs if fast.status == "OPTIMAL"]
    bad = [i for i, (inst, fast) in enumerate(optimal)
           if not verify_certificates(inst, fast.flow, fast.labels, fast.objective)[0]]
    report(7, optimal and not bad, f"{len(optimal) - len(bad)}/{len(optimal)} optimal outputs verified")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
