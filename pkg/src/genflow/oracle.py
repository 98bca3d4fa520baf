"""Independent ground truth: a textbook exact simplex and a certificate checker.

Nothing here depends on the combinatorial solver; only ``Fraction`` and the
instance parser are shared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .model import Instance

MAX_ARCS = 400


class OracleTooLarge(ValueError):
    pass


@dataclass
class OracleResult:
    status: str
    objective: Fraction | None = None
    flow: dict[int, Fraction] = field(default_factory=dict)
    duals: dict[int, Fraction] = field(default_factory=dict)


def _pivot(T: list[list[Fraction]], r: int, c: int) -> None:
    row = T[r]
    p = row[c]
    if p != 1:
        T[r] = row = [x / p for x in row]
    for i, other in enumerate(T):
        if i != r and other[c] != 0:
            f = other[c]
            T[i] = [a - f * b for a, b in zip(other, row)]


def _run(T: list[list[Fraction]], basis: list[int], cost: list[Fraction], allowed: int) -> bool:
    """Maximize ``cost`` over the tableau with Bland's rule; False if unbounded.

    Rows of ``T`` end with the right-hand side; only the first ``allowed``
    columns may enter.
    """
    rows = len(T)
    while True:
        # reduced costs r_j = c_j - c_B . column_j
        enter = None
        for j in range(allowed):
            if j in basis:
                continue
            r = cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(rows))
            if r > 0:
                enter = j
                break
        if enter is None:
            return True
        leave = None
        best = None
        for i in range(rows):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return False
        _pivot(T, leave, enter)
        basis[leave] = enter


def _solve_gauss(M: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    n = len(M)
    A = [list(M[i]) + [rhs[i]] for i in range(n)]
    for c in range(n):
        p = next(i for i in range(c, n) if A[i][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for i in range(n):
            if i != c and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    return [A[i][-1] for i in range(n)]


def oracle_solve(inst: Instance) -> OracleResult:
    """Solve max net(f, t) s.t. net(f, i) >= b_i, f >= 0 by two-phase simplex."""
    if inst.m > MAX_ARCS:
        raise OracleTooLarge(f"{inst.m} arcs exceed the oracle limit {MAX_ARCS}")
    rows_nodes = [v for v in inst.nodes if v != inst.sink]
    m = inst.m
    R = len(rows_nodes)
    pos = {v: i for i, v in enumerate(rows_nodes)}
    A = [[Fraction(0)] * m for _ in range(R)]
    obj = [Fraction(0)] * m
    for k, a in enumerate(inst.arcs):
        if a.head in pos:
            A[pos[a.head]][k] += a.gain
        else:
            obj[k] += a.gain
        if a.tail in pos:
            A[pos[a.tail]][k] -= 1
        else:
            obj[k] -= 1
    b = [Fraction(inst.demand(v)) for v in rows_nodes]
    # columns: m flows, R surplus variables, R artificials
    ncol = m + 2 * R
    T: list[list[Fraction]] = []
    sign = []
    for i in range(R):
        s = -1 if b[i] < 0 else 1
        sign.append(s)
        row = [s * x for x in A[i]] + [Fraction(0)] * (2 * R) + [s * b[i]]
        row[m + i] = Fraction(-s)
        row[m + R + i] = Fraction(1)
        T.append(row)
    basis = [m + R + i for i in range(R)]
    phase1 = [Fraction(0)] * (m + R) + [Fraction(-1)] * R
    _run(T, basis, phase1, ncol)
    if any(T[i][-1] != 0 for i in range(R) if basis[i] >= m + R):
        return OracleResult("INFEASIBLE")
    # drive degenerate artificials out of the basis where possible
    for i in range(R):
        if basis[i] >= m + R:
            for j in range(m + R):
                if T[i][j] != 0 and j not in basis:
                    _pivot(T, i, j)
                    basis[i] = j
                    break
    keep = [i for i in range(R) if basis[i] < m + R]
    T = [T[i] for i in keep]
    basis = [basis[i] for i in keep]
    cost = obj + [Fraction(0)] * (2 * R)
    if not _run(T, basis, cost, m + R):
        return OracleResult("UNBOUNDED")
    x = [Fraction(0)] * ncol
    for i, j in enumerate(basis):
        x[j] = T[i][-1]
    flow = {k: x[k] for k in range(m) if x[k]}
    value = sum((obj[k] * x[k] for k in range(m)), Fraction(0))
    duals = _duals(A, b, obj, basis, m, R)
    return OracleResult("OPTIMAL", value, flow, duals)


def _duals(A, b, obj, basis, m, R) -> dict[int, Fraction]:
    """Row prices y (one per non-sink row) with y . B = c_B; empty if the basis is short."""
    if len(basis) != R:
        return {}
    cols = []
    for j in basis:
        if j < m:
            cols.append([A[i][j] for i in range(R)])
        else:
            cols.append([Fraction(-1) if i == j - m else Fraction(0) for i in range(R)])
    c_B = [obj[j] if j < m else Fraction(0) for j in basis]
    y = _solve_gauss(cols, c_B)
    return dict(enumerate(y))


def check_duals(inst: Instance, res: OracleResult) -> bool:
    """Weak-duality certificate for an optimal oracle answer."""
    if res.status != "OPTIMAL" or not res.duals:
        return res.status != "OPTIMAL"
    rows_nodes = [v for v in inst.nodes if v != inst.sink]
    pos = {v: i for i, v in enumerate(rows_nodes)}
    y = res.duals
    if any(y[i] > 0 for i in y):
        return False
    bound = sum((y[pos[v]] * inst.demand(v) for v in rows_nodes), Fraction(0))
    for k, a in enumerate(inst.arcs):
        col = Fraction(0)
        c = Fraction(0)
        if a.head in pos:
            col += y[pos[a.head]] * a.gain
        else:
            c += a.gain
        if a.tail in pos:
            col -= y[pos[a.tail]]
        else:
            c -= 1
        if col < c:
            return False
    return bound == res.objective


def verify_certificates(inst: Instance, flow: dict[int, Fraction], labels: dict[int, Fraction | None],
                        objective: Fraction | None) -> tuple[bool, str | None]:
    """Exact optimality check of a primal flow and dual labels (None = infinite)."""
    net = {v: Fraction(0) for v in inst.nodes}
    for k, x in flow.items():
        if not 0 <= k < inst.m:
            return False, f"flow on unknown arc {k}"
        if x < 0:
            return False, f"negative flow on arc {k}"
        a = inst.arcs[k]
        net[a.tail] -= x
        net[a.head] += a.gain * x
    for v in inst.nodes:
        if v != inst.sink and net[v] < inst.demand(v):
            return False, f"node {v} receives {net[v]} < demand {inst.demand(v)}"
    for v in inst.nodes:
        if v not in labels:
            return False, f"missing label for node {v}"
        if labels[v] is not None and labels[v] <= 0:
            return False, f"nonpositive label at node {v}"
    mu_t = labels[inst.sink]
    if mu_t is None:
        return False, "sink label is infinite"
    for k, a in enumerate(inst.arcs):
        mi, mj = labels[a.tail], labels[a.head]
        if mi is None and mj is None:
            rel = Fraction(1)
        elif mi is None:
            return False, f"arc {k} leaves an infinite label into a finite one"
        elif mj is None:
            rel = Fraction(0)
        else:
            rel = a.gain * mi / mj
        if rel > 1:
            return False, f"arc {k} has relabelled gain {rel} > 1"
        if flow.get(k, 0) > 0 and rel != 1:
            return False, f"arc {k} carries flow but is not tight"
    dual = Fraction(0)
    for v in inst.nodes:
        if v == inst.sink or labels[v] is None:
            continue
        if net[v] != inst.demand(v):
            return False, f"node {v} has finite label but net {net[v]} != demand {inst.demand(v)}"
        dual += Fraction(inst.demand(v)) / labels[v]
    dual = -mu_t * dual
    primal = net[inst.sink]
    if objective is not None and objective != primal:
        return False, f"claimed objective {objective} != primal value {primal}"
    if primal != dual:
        return False, f"primal value {primal} != dual value {dual}"
    return True, None
