"""Regular (unit gain) flow primitives on exact numbers.

Everything here works for ``int`` and ``Fraction`` data alike.  Infinite
capacities and unbounded node windows are written as ``None``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .model import FlowState

Number = Union[int, Fraction]
Cap = Union[int, Fraction, None]


class InfeasibleCirculation(Exception):
    """No flow meets the bounds; ``cut`` is a Hoffman-violating node set."""

    def __init__(self, cut: set[int]) -> None:
        super().__init__(f"infeasible circulation, cut {sorted(cut)}")
        self.cut = cut


class UnsafeLabelling(Exception):
    pass


@dataclass
class MaxFlow:
    value: Number
    flow: list[Number]
    source_side: set[int]


def max_flow(nodes: Sequence[int], arcs: Sequence[tuple[int, int, Cap]], s: int, t: int) -> MaxFlow:
    """Shortest augmenting path max flow; returns arc flows and a min cut side."""
    index = {v: k for k, v in enumerate(nodes)}
    size = len(nodes)
    adj: list[list[int]] = [[] for _ in range(size)]
    to: list[int] = []
    res: list[Cap] = []
    for u, v, c in arcs:
        adj[index[u]].append(len(to))
        to.append(index[v])
        res.append(c)
        adj[index[v]].append(len(to))
        to.append(index[u])
        res.append(0)
    si, ti = index[s], index[t]
    value: Number = 0
    while True:
        pred = [-1] * size
        pred[si] = -2
        todo = deque([si])
        while todo and pred[ti] == -1:
            u = todo.popleft()
            for e in adj[u]:
                w = to[e]
                if pred[w] == -1 and (res[e] is None or res[e] > 0):
                    pred[w] = e
                    todo.append(w)
        if pred[ti] == -1:
            break
        push: Cap = None
        w = ti
        while w != si:
            e = pred[w]
            if res[e] is not None and (push is None or res[e] < push):
                push = res[e]
            w = to[e ^ 1]
        if push is None:
            raise ValueError("unbounded max flow")
        w = ti
        while w != si:
            e = pred[w]
            if res[e] is not None:
                res[e] -= push
            if res[e ^ 1] is not None:
                res[e ^ 1] += push
            w = to[e ^ 1]
        value += push
    side = {nodes[k] for k in range(size) if pred[k] != -1}
    flow: list[Number] = []
    for k, (u, v, c) in enumerate(arcs):
        back = res[2 * k + 1]
        flow.append(back)
    return MaxFlow(value, flow, side)


def feasible_circulation(nodes: Sequence[int], arcs: Sequence[tuple[int, int, Number, Cap]],
                         windows: dict[int, tuple[Cap, Cap]]) -> list[Number]:
    """Find x with lo_e <= x_e <= hi_e and window lo_i <= in_i - out_i <= hi_i.

    Raises ``InfeasibleCirculation`` with the set of nodes that the final
    residual search could not reach from the super source.
    """
    z, S, T = ("z",), ("S",), ("T",)
    aux: list[tuple[object, object, Number, Cap]] = []
    for i in nodes:
        lo, hi = windows.get(i, (None, None))
        if lo is not None and hi is not None and lo > hi:
            raise InfeasibleCirculation({i})
        out_lo = lo if lo is not None and lo > 0 else 0
        out_hi: Cap = None if hi is None else max(hi, 0)
        in_lo = -hi if hi is not None and hi < 0 else 0
        in_hi: Cap = None if lo is None else max(-lo, 0)
        if out_hi is None or out_hi > 0:
            aux.append((i, z, out_lo, out_hi))
        if in_hi is None or in_hi > 0:
            aux.append((z, i, in_lo, in_hi))
    full = [(u, v, lo, hi) for u, v, lo, hi in arcs] + aux
    exc: dict[object, Number] = {}
    reduced: list[tuple[object, object, Cap]] = []
    for u, v, lo, hi in full:
        if hi is not None and hi < lo:
            raise InfeasibleCirculation({v} if v in windows else set())
        if lo:
            exc[v] = exc.get(v, 0) + lo
            exc[u] = exc.get(u, 0) - lo
        reduced.append((u, v, None if hi is None else hi - lo))
    need: Number = 0
    for v, e in exc.items():
        if e > 0:
            reduced.append((S, v, e))
            need += e
        elif e < 0:
            reduced.append((v, T, -e))
    all_nodes = list(nodes) + [z, S, T]
    mf = max_flow(all_nodes, reduced, S, T)
    if mf.value != need:
        raise InfeasibleCirculation({v for v in nodes if v not in mf.source_side})
    return [lo + mf.flow[k] for k, (u, v, lo, hi) in enumerate(arcs)]


def _floor(x: Number) -> int:
    return math.floor(x)


def _ceil(x: Number) -> int:
    return math.ceil(x)


def round_flow(state: FlowState, flow: dict[int, Fraction]) -> dict[int, int]:
    """Integral relabelled flow on the support of ``flow`` keeping every node's
    net flow between the floor and ceiling of its current value."""
    net = state.network
    if all(Fraction(x).denominator == 1 for x in flow.values()):
        return {k: int(x) for k, x in flow.items()}
    nodes = net.sorted_nodes()
    balance: dict[int, Fraction] = {v: Fraction(0) for v in nodes}
    keys = []
    arcs = []
    for k in net.arcs():
        x = Fraction(flow.get(k, 0))
        if x:
            balance[net.tail[k]] -= x
            balance[net.head[k]] += x
            keys.append(k)
            arcs.append((net.tail[k], net.head[k], _floor(x), _ceil(x)))
    windows = {v: (_floor(balance[v]), _ceil(balance[v])) for v in nodes}
    values = feasible_circulation(nodes, arcs, windows)
    out = {k: 0 for k in net.tail}
    for k, x in zip(keys, values):
        out[k] = int(x)
    return out


def repair_flow(state: FlowState) -> dict[int, int]:
    """Integral flow g fitting the labels with
    floor(b_i) <= net(g, i) <= max(net(f, i), ceil(b_i)) for every non-sink i.

    Starts from the current flow and routes only what deficit nodes lack,
    using one max-flow computation on the tight residual network.
    """
    net = state.network
    t = net.sink
    S, T = ("S",), ("T",)
    arcs: list[tuple[object, object, Cap]] = []
    ref: list[tuple[int, int]] = []
    for k in net.arcs():
        if k in state.tight:
            arcs.append((net.tail[k], net.head[k], None))
            ref.append((k, 1))
        x = state.flow.get(k, 0)
        if x > 0:
            arcs.append((net.head[k], net.tail[k], x))
            ref.append((k, -1))
    need = 0
    arcs.append((S, t, None))
    for v in net.sorted_nodes():
        if v == t:
            continue
        lo = _floor(state.b_mu(v))
        have = state.net[v]
        if have > lo:
            arcs.append((S, v, have - lo))
        elif have < lo:
            arcs.append((v, T, lo - have))
            need += lo - have
    g = {k: x for k, x in state.flow.items()}
    if need == 0:
        return g
    mf = max_flow(net.sorted_nodes() + [S, T], arcs, S, T)
    if mf.value != need:
        raise UnsafeLabelling(f"repair flow short by {need - mf.value}")
    for (k, sign), x in zip(ref, mf.flow):
        if x:
            g[k] = g.get(k, 0) + sign * int(x)
    return g


def is_safe_labelling(state: FlowState) -> tuple[bool, set[int] | None]:
    """Decide whether some primal feasible flow fits the labels.

    On failure the witness ``X`` excludes the sink, has no tight arc entering
    it, and has positive total relabelled demand.
    """
    net = state.network
    nodes = net.sorted_nodes()
    arcs = [(net.tail[k], net.head[k], 0, None) for k in net.arcs() if k in state.tight]
    windows: dict[int, tuple[Cap, Cap]] = {}
    for v in nodes:
        windows[v] = (None, None) if v == net.sink else (state.b_mu(v), None)
    try:
        feasible_circulation(nodes, arcs, windows)
    except InfeasibleCirculation as exc:
        return False, exc.cut
    return True, None
