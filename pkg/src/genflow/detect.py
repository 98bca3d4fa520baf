"""Flow-generating cycles, flooded nodes and initial labels.

A cycle whose gain product exceeds one can manufacture flow, so every node it
reaches can absorb any demand.  Detection is a multiplicative Bellman-Ford:
``w_i`` is the best gain of a walk starting at ``i`` (the empty walk counts as
gain one), relaxed as ``w_i = max(w_i, gain_ij * w_j)``.  Without gainy
cycles the values settle within ``n - 1`` rounds and ``mu_i = 1 / w_i`` is a
feasible labelling; a change in round ``n`` exposes a cycle through the
predecessor pointers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from .model import Instance, InvariantViolation

ArcList = list[tuple[int, int, Fraction]]


@dataclass
class CycleWitness:
    arcs: list[int]
    gain: Fraction


@dataclass
class Flooding:
    flooded: set[int]
    labels: dict[int, Fraction]
    # per flooded node: (cycle, path) where path runs from a cycle node to it
    witness: dict[int, tuple[CycleWitness, list[int]]] = field(default_factory=dict)
    rounds: list[int] = field(default_factory=list)


def find_flow_generating_cycle(nodes: list[int], arcs: ArcList) -> CycleWitness | dict[int, Fraction]:
    """Return a gainy cycle (arc indices into ``arcs``) or feasible labels."""
    out: dict[int, list[int]] = {v: [] for v in nodes}
    for k, (u, v, g) in enumerate(arcs):
        out[u].append(k)
    best = {v: Fraction(1) for v in nodes}
    pred: dict[int, int | None] = {v: None for v in nodes}
    n = len(nodes)
    changed_at: int | None = None
    for rnd in range(1, n + 1):
        changed_at = None
        for u in nodes:
            for k in out[u]:
                _, v, g = arcs[k]
                cand = g * best[v]
                if cand > best[u]:
                    best[u] = cand
                    pred[u] = k
                    changed_at = u
        if changed_at is None:
            return {v: 1 / best[v] for v in nodes}
    assert changed_at is not None
    for start in [changed_at] + nodes:
        cyc = _pointer_cycle(start, pred, arcs, n)
        if cyc is not None:
            return cyc
    raise InvariantViolation("round n changed a label but no gainy pointer cycle exists")


def _pointer_cycle(start: int, pred: dict[int, int | None], arcs: ArcList, n: int) -> CycleWitness | None:
    # walk n predecessor steps to land on a cycle, if there is one
    x = start
    for _ in range(n):
        if pred[x] is None:
            return None
        x = arcs[pred[x]][1]
    cycle: list[int] = []
    y = x
    while True:
        k = pred[y]
        if k is None:
            return None
        cycle.append(k)
        y = arcs[k][1]
        if y == x:
            break
    gain = Fraction(1)
    for k in cycle:
        gain *= arcs[k][2]
    return CycleWitness(cycle, gain) if gain > 1 else None


def flooded_set(inst: Instance) -> Flooding:
    """Nodes reachable from a flow-generating cycle, plus labels elsewhere."""
    all_arcs: ArcList = [(a.tail, a.head, a.gain) for a in inst.arcs]
    alive = set(inst.nodes)
    flooded: set[int] = set()
    witness: dict[int, tuple[CycleWitness, list[int]]] = {}
    rounds = []
    while True:
        idx = [k for k, (u, v, g) in enumerate(all_arcs) if u in alive and v in alive]
        sub = [all_arcs[k] for k in idx]
        found = find_flow_generating_cycle(sorted(alive), sub)
        if not isinstance(found, CycleWitness):
            rounds.append(0)
            return Flooding(flooded, found, witness, rounds)
        cyc = CycleWitness([idx[k] for k in found.arcs], found.gain)
        rounds.append(len(cyc.arcs))
        # BFS over arcs among still-alive nodes, remembering the arc used
        via: dict[int, int | None] = {}
        todo = deque()
        for k in cyc.arcs:
            u = all_arcs[k][0]
            if u not in via:
                via[u] = None
                todo.append(u)
        while todo:
            u = todo.popleft()
            for k, (a, b, g) in enumerate(all_arcs):
                if a == u and b in alive and b not in via:
                    via[b] = k
                    todo.append(b)
        for v in via:
            path: list[int] = []
            w = v
            while via[w] is not None:
                path.append(via[w])
                w = all_arcs[via[w]][0]
            path.reverse()
            witness[v] = (cyc, path)
        flooded |= set(via)
        alive -= set(via)
        if not alive:
            return Flooding(flooded, {}, witness, rounds)
