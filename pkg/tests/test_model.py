from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import TWO_NODE, make
from genflow.generate import random_instance
from genflow.model import (FlowState, InstanceError, Network, format_instance, is_fitting_pair,
                           parse_instance, plenty_threshold, potentials, relabeled_gain)


def test_parse_two_node():
    inst = parse_instance(TWO_NODE)
    assert inst.nodes == (1, 2)
    assert inst.sink == 1
    assert inst.demand(2) == -100
    assert inst.arcs[0].tail == 2 and inst.arcs[0].head == 1 and inst.arcs[0].gain == 1
    assert inst.bound_B == 101


@pytest.mark.parametrize("text, needle", [
    ("p genflow 2 2\nt 1\na 1 2 1 1\na 1 2 2 1\n", "parallel arc"),
    ("p genflow 2 1\nt 1\na 1 2 0 1\n", "nonpositive gain"),
    ("p genflow 2 1\nt 1\na 2 2 1 1\n", "self-loop"),
    ("p genflow 2 1\nt 1\nn 1 5\na 2 1 1 1\n", "demand on sink"),
    ("p genflow 3 1\nt 1\na 2 1 1 1\n", "disconnected"),
    ("p genflow 2 1\nt 1\na 2 1 1\n", "malformed arc line"),
    ("p genflow 2 2\nt 1\na 2 1 1 1\n", "expected 2 arcs"),
    ("t 1\n", "before problem line"),
])
def test_parse_errors_are_distinct(text, needle):
    with pytest.raises(InstanceError, match=needle):
        parse_instance(text)


def test_comments_and_blank_lines():
    inst = parse_instance("# hello\np genflow 2 1  # header\n\nt 1\na 2 1 3 4\n")
    assert inst.arcs[0].gain == Fraction(3, 4)


def test_relabeled_gain_examples():
    assert relabeled_gain(Fraction(3), Fraction(1), Fraction(3)) == 1
    assert relabeled_gain(Fraction(7, 5), Fraction(1), Fraction(1)) == Fraction(7, 5)
    M = 1000
    assert relabeled_gain(Fraction(1, M), Fraction(1), Fraction(1)) == Fraction(1, M)


def _single(b):
    inst = make(2, 1, [(2, 1, 1)], {2: b}, validate=False)
    return FlowState(Network.from_instance(inst), {1: Fraction(1), 2: Fraction(1)})


def test_potentials_single_supply_node():
    p = potentials(_single(-1))
    assert (p.ex, p.deficit, p.xi, p.psi, p.phi) == (1, 0, 2, 1, 1)


def test_potentials_single_demand_node():
    p = potentials(_single(3))
    assert (p.ex, p.deficit, p.xi, p.psi, p.phi) == (0, 3, 2, 0, 0)


def test_potentials_balanced_flow():
    inst = make(3, 3, [(1, 2, 1), (2, 3, 1)], {1: -2, 2: 1})
    state = FlowState(Network.from_instance(inst), {v: Fraction(1) for v in (1, 2, 3)}, {0: 2, 1: 1})
    p = potentials(state)
    assert p.ex == 0 and p.deficit == 0 and p.xi == 2 * (3 - 1)


def test_plenty_threshold_values():
    assert plenty_threshold(2, 1) == 12
    assert plenty_threshold(4, 2) == 36
    state = _single(-(plenty_threshold(2, 1) - 1))
    assert not state.is_plentiful(2)
    state = _single(-plenty_threshold(2, 1))
    assert state.is_plentiful(2)


@given(st.integers(2, 200), st.integers(0, 400), st.integers(0, 400))
def test_plenty_threshold_supports_contraction_argument(n, d, out_deg):
    # excess of the repaired flow stays below 2n and excess plus deficit below 3n - 1
    out_deg = min(out_deg, d)
    P = plenty_threshold(n, d)
    assert P - 2 * n > 3 * n * d >= 3 * n * out_deg
    assert (2 * n - 1) + (n - 1) < 3 * n
    # while not plentiful the relabelled demand stays within the anchor grid range,
    # but only for degree below n; total degree can reach 2(n - 1)
    if d <= n - 1:
        assert P + 1 <= 4 * n * n


def test_plenty_range_exceeds_grid_for_dense_nodes():
    n = 5
    assert plenty_threshold(n, 2 * (n - 1)) + 1 > 4 * n * n


def test_fitting_pair_examples():
    inst = make(2, 1, [(2, 1, 2)], {})
    net = Network.from_instance(inst)
    ok, _ = is_fitting_pair(FlowState(net, {1: Fraction(2), 2: Fraction(1)}))
    assert ok
    ok, arc = is_fitting_pair(FlowState(net, {1: Fraction(4), 2: Fraction(1)}, {0: 1}))
    assert not ok and arc == 0
    ok, arc = is_fitting_pair(FlowState(net, {1: Fraction(1), 2: Fraction(1)}))
    assert not ok and arc == 0


@given(st.integers(2, 7), st.integers(0, 10**6), st.data())
def test_relabelled_gain_telescopes(n, seed, data):
    inst = random_instance(n, 2 * n, seed)
    mu = {v: Fraction(data.draw(st.integers(1, 50)), data.draw(st.integers(1, 50))) for v in inst.nodes}
    # random walk along arcs
    out = {}
    for a in inst.arcs:
        out.setdefault(a.tail, []).append(a)
    v = data.draw(st.sampled_from(inst.nodes))
    start = v
    plain = rel = Fraction(1)
    for _ in range(data.draw(st.integers(1, 6))):
        if v not in out:
            break
        a = data.draw(st.sampled_from(out[v]))
        plain *= a.gain
        rel *= relabeled_gain(a.gain, mu[a.tail], mu[a.head])
        v = a.head
    assert rel == plain * mu[start] / mu[v]
    if v == start:
        assert rel == plain


@given(st.integers(1, 8), st.integers(0, 20), st.integers(0, 10**6))
def test_format_parse_round_trip(n, m, seed):
    inst = random_instance(n, m, seed)
    again = parse_instance(format_instance(inst))
    assert again == inst and again.demands == inst.demands


@given(st.integers(2, 7), st.integers(0, 10**6))
def test_potentials_relations(n, seed):
    inst = random_instance(n, 2 * n, seed)
    net = Network.from_instance(inst)
    state = FlowState(net, {v: Fraction(1) for v in inst.nodes})
    p = potentials(state)
    assert p.ex >= 0 and p.deficit >= 0 and p.psi >= 0
    assert p.phi <= p.ex
    assert p.xi >= p.ex
    if p.ex == 0:
        assert p.xi == 2 * (n - 1)
