import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import make
from genflow.generate import random_instance
from genflow.model import Arc, Instance
from genflow.oracle import OracleTooLarge, check_duals, oracle_solve, verify_certificates


def test_two_node(two_node):
    res = oracle_solve(two_node)
    assert (res.status, res.objective, res.flow) == ("OPTIMAL", 100, {0: 100})
    assert check_duals(two_node, res)


def test_statuses():
    assert oracle_solve(make(2, 1, [(2, 1, 1)], {2: 5})).status == "INFEASIBLE"
    assert oracle_solve(make(3, 3, [(1, 2, 2), (2, 1, 1), (2, 3, 1)])).status == "UNBOUNDED"


def test_gain_along_path():
    res = oracle_solve(make(3, 3, [(1, 2, 2), (2, 3, Fraction(3, 4))], {1: -4}))
    assert res.objective == 6


def test_too_large():
    arcs = tuple(Arc(1, 2, Fraction(1)) for _ in range(401))
    with pytest.raises(OracleTooLarge):
        oracle_solve(Instance((1, 2), 2, arcs, {}))


def _gauss(cols, rhs):
    """Solve the square system with the given columns; None if singular."""
    n = len(rhs)
    M = [[cols[j][i] for j in range(n)] + [rhs[i]] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return [M[i][-1] / M[i][i] for i in range(n)]


def _vertex_optimum(inst):
    """Best objective over all basic feasible solutions, or None if there are none."""
    rows = [v for v in inst.nodes if v != inst.sink]
    cols, obj = [], []
    for a in inst.arcs:
        cols.append([(a.gain if v == a.head else 0) - (1 if v == a.tail else 0) for v in rows])
        obj.append((a.gain if a.head == inst.sink else 0) - (1 if a.tail == inst.sink else 0))
    for i in range(len(rows)):
        cols.append([-1 if r == i else 0 for r in range(len(rows))])
        obj.append(0)
    rhs = [Fraction(inst.demand(v)) for v in rows]
    best = None
    for basis in itertools.combinations(range(len(cols)), len(rows)):
        x = _gauss([cols[j] for j in basis], rhs)
        if x is None or any(v < 0 for v in x):
            continue
        val = sum((obj[j] * v for j, v in zip(basis, x)), Fraction(0))
        if best is None or val > best:
            best = val
    return best


@given(st.integers(2, 4), st.integers(0, 10**6), st.sampled_from([0.0, 0.8, 1.0]))
def test_matches_vertex_enumeration(n, seed, lossy):
    inst = random_instance(n, n + 1, seed, max_b=9, max_gamma=4, lossy=lossy)
    res = oracle_solve(inst)
    best = _vertex_optimum(inst)
    if res.status == "INFEASIBLE":
        assert best is None
    elif res.status == "OPTIMAL":
        assert res.objective == best
        assert check_duals(inst, res)
    else:
        assert best is not None


def test_certificates_accept_optimum(two_node):
    assert verify_certificates(two_node, {0: Fraction(100)}, {1: Fraction(1), 2: Fraction(1)}, Fraction(100)) == (True, None)


@pytest.mark.parametrize("flow, labels, objective, needle", [
    ({0: Fraction(99)}, {1: 1, 2: 1}, 99, "net"),
    ({0: Fraction(101)}, {1: 1, 2: 1}, 101, "receives"),
    ({0: Fraction(100)}, {1: 1, 2: Fraction(1, 2)}, 100, "not tight"),
    ({0: Fraction(100)}, {1: 1, 2: 2}, 100, "relabelled gain"),
    ({0: Fraction(100)}, {1: 1, 2: 1}, 99, "claimed objective"),
    ({0: Fraction(-1)}, {1: 1, 2: 1}, None, "negative flow"),
    ({0: Fraction(100)}, {1: 1}, 100, "missing label"),
    ({0: Fraction(100)}, {1: None, 2: 1}, 100, "sink label"),
    ({0: Fraction(100)}, {1: 1, 2: None}, 100, "infinite label into a finite"),
])
def test_certificates_reject_perturbations(two_node, flow, labels, objective, needle):
    labels = {v: None if x is None else Fraction(x) for v, x in labels.items()}
    ok, why = verify_certificates(two_node, flow, labels, None if objective is None else Fraction(objective))
    assert not ok and needle in why


def test_infinite_labels_both_ends_allowed():
    inst = make(3, 1, [(2, 3, 1), (1, 3, 1)], {2: -5})
    assert verify_certificates(inst, {}, {1: Fraction(1), 2: None, 3: None}, Fraction(0))[0]
