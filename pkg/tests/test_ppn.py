from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import make
from genflow.generate import random_instance
from genflow.model import FlowState, Network
from genflow.ppn import PlentifulSearch, augmentation_cap, produce_plentiful_node
from genflow.solver import initialize_fitting_pair, solve
from genflow.stats import RunOptions, Stats


def _two_node_state(inst):
    return initialize_fitting_pair(Network.from_instance(inst), {}, {1: Fraction(1), 2: Fraction(1)})


def test_two_node_initial_scaling(two_node):
    state = _two_node_state(two_node)
    assert state.mu == {1: 100, 2: 100}
    assert state.b_mu(2) == -1 and state.excess(2) == 1


@pytest.mark.parametrize("mode", ["fast", "reference"])
def test_two_node_reaches_plentiful(two_node, mode):
    state = _two_node_state(two_node)
    stats = Stats()
    opts = RunOptions(mode=mode, checked=True, trace=True)
    v = PlentifulSearch(state, opts, stats, two_node.bound_B).run()
    assert v == 2
    assert state.is_plentiful(2)
    assert stats.trace[0] == ("path", 2, 1, (0,))
    assert stats.path_augmentations == 11 and stats.null_augmentations == 0
    # largest grid point below 25/3 on the 1/16 grid
    assert state.mu[2] == Fraction(133, 16)
    assert not stats.violations


def test_two_node_without_anchors(two_node):
    state = _two_node_state(two_node)
    produce_plentiful_node(state, RunOptions(anchors=False))
    # relabelled demand lands exactly on the plenty threshold 3 * 2 * (1 + 1)
    assert state.mu[2] == Fraction(25, 3)
    assert state.b_mu(2) == -12


def test_already_plentiful_makes_no_augmentation():
    inst = make(2, 1, [(2, 1, 1)], {2: -12})
    state = FlowState(Network.from_instance(inst), {1: Fraction(1), 2: Fraction(1)})
    stats = Stats()
    assert produce_plentiful_node(state, RunOptions(checked=True), stats) == 2
    assert stats.augmentations == 0 and stats.label_updates == 0


def test_no_demand_rejected():
    inst = make(2, 1, [(2, 1, 1)])
    with pytest.raises(ValueError):
        produce_plentiful_node(FlowState(Network.from_instance(inst), {1: Fraction(1), 2: Fraction(1)}))


def test_first_update_when_every_node_is_scaled(two_node):
    # S is the whole node set, so no arc enters it and only the demand limit counts
    state = _two_node_state(two_node)
    search = PlentifulSearch(state, RunOptions(mode="reference", anchors=False), Stats())
    search.last_psi = 0
    search.augment(2, search.deficit_set())
    assert state.net[2] == -1
    sbar = search.reaching(search.deficit_set())
    assert sbar == {1, 2}
    search.update_reference(sbar)
    assert state.mu == {1: 50, 2: 50}


def test_entering_arc_sets_factor():
    inst = make(2, 1, [(2, 1, Fraction(2, 3))], {2: -1})
    state = FlowState(Network.from_instance(inst), {1: Fraction(1), 2: Fraction(1)})
    search = PlentifulSearch(state, RunOptions(mode="reference"), Stats())
    search.last_psi = 0
    assert search.reaching({1}) == {1}
    search.update_reference({1})
    assert state.mu[1] == Fraction(2, 3) and state.mu[2] == 1
    assert 0 in state.tight


def test_fast_update_matches_entering_arc():
    inst = make(2, 1, [(2, 1, Fraction(2, 3))], {2: -1})
    state = FlowState(Network.from_instance(inst), {1: Fraction(1), 2: Fraction(1)})
    search = PlentifulSearch(state, RunOptions(mode="fast"), Stats())
    search.last_psi = 0
    search.update_fast({1})
    assert state.mu[1] == Fraction(2, 3) and state.mu[2] == 1


def test_anchor_picks_smallest_grid_factor():
    inst = make(2, 1, [(2, 1, 1)], {2: -1})
    state = FlowState(Network.from_instance(inst), {1: Fraction(1), 2: Fraction(1)}, {0: 1})
    search = PlentifulSearch(state, RunOptions(), Stats())
    lo, hi = Fraction(2), Fraction(3)
    assert search.scale_limit(2) == 2
    # 16/7 is also admissible and lands on the grid, the rule takes the smaller step
    alt = Fraction(16, 7)
    assert lo <= alt < hi and search.on_grid(1 / alt)


def test_anchor_predicate():
    inst = make(2, 1, [(2, 1, 1)], {2: -1})
    state = FlowState(Network.from_instance(inst), {1: Fraction(1), 2: Fraction(1, 3)})
    search = PlentifulSearch(state, RunOptions(), Stats())
    assert not search.on_grid(Fraction(1, 3))
    # excess 3 and the next grid point 5/16 is below |b| / (2 - net) = 1/2
    assert search.anchored(2)
    state.mu[2] = Fraction(1, 3) * 100
    assert search.anchored(2) == search.on_grid(state.mu[2]) or state.excess(2) < 1


def test_augmentation_cap_grows():
    assert augmentation_cap(10, 30) < augmentation_cap(20, 60) < augmentation_cap(40, 120)


def _run(inst, mode, anchors=True):
    return solve(inst, RunOptions(mode=mode, anchors=anchors, checked=True, trace=True))


@given(st.integers(2, 6), st.integers(0, 10**6), st.sampled_from([0.0, 0.7, 1.0]), st.booleans())
def test_fast_and_reference_agree(n, seed, lossy, anchors):
    inst = random_instance(n, 2 * n, seed, max_b=12, lossy=lossy)
    a = _run(inst, "fast", anchors)
    b = _run(inst, "reference", anchors)
    assert a.status == b.status
    assert a.stats.trace == b.stats.trace
    assert a.labels == b.labels and a.flow == b.flow
    assert not a.stats.violations and not b.stats.violations
