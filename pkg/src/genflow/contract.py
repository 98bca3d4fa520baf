"""Arc contraction, its bookkeeping, and recovery of an optimal primal flow."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .model import FlowState, InvariantViolation, Network, potentials
from .netflow import InfeasibleCirculation, feasible_circulation, repair_flow
from .stats import Stats


@dataclass
class Contraction:
    arc: int
    p: int                  # removed node
    q: int                  # surviving node
    gain: Fraction          # gain of p->q at contraction time
    sink_was_p: bool
    demand_p: Fraction
    demand_q: Fraction
    # (arc id, old tail, old head, old gain) for every rerouted arc
    moved: list[tuple[int, int, int, Fraction]] = field(default_factory=list)
    # (arc id, tail, head, gain, kept arc id) for every discarded parallel/self arc
    dropped: list[tuple[int, int, int, Fraction, int | None]] = field(default_factory=list)


@dataclass
class ContractionLog:
    records: list[Contraction] = field(default_factory=list)
    preimage: dict[int, set[int]] = field(default_factory=dict)

    @classmethod
    def start(cls, nodes) -> "ContractionLog":
        return cls([], {v: {v} for v in nodes})

    def to_text(self) -> str:
        lines = []
        for r in self.records:
            lines.append(f"c {r.arc} {r.p} {r.q} {r.gain} sink={'p' if r.sink_was_p else '-'}")
            for k, u, v, g in r.moved:
                lines.append(f"m {k} {u} {v} {g}")
            for k, u, v, g, kept in r.dropped:
                lines.append(f"d {k} {u} {v} {g} {'-' if kept is None else kept}")
        return "\n".join(lines) + ("\n" if lines else "")


def contractible_arc(state: FlowState) -> int | None:
    """Lowest arc id whose relabelled flow beats total excess plus deficit."""
    pot = potentials(state)
    limit = pot.ex + pot.deficit
    for k in state.network.arcs():
        if state.flow[k] > limit:
            return k
    return None


def contract_arc(state: FlowState, k: int, log: ContractionLog) -> Contraction:
    """Merge the tail of arc ``k`` into its head, keeping the graph simple."""
    net = state.network
    p, q = net.tail[k], net.head[k]
    g_pq = net.gain[k]
    if state.gain_mu(k) != 1:
        raise InvariantViolation(f"contracting non-tight arc {k}")
    rec = Contraction(k, p, q, g_pq, net.sink == p, net.demand[p], net.demand[q])
    for a in list(net.out_arcs[p]) + list(net.in_arcs[p]):
        u, v = net.tail[a], net.head[a]
        if {u, v} == {p, q}:
            rec.dropped.append((a, u, v, net.gain[a], None))
            state.flow.pop(a, None)
            state.tight.discard(a)
            net.remove_arc(a)
    for a in list(net.in_arcs[p]):
        u, g = net.tail[a], net.gain[a]
        rec.moved.append((a, u, p, g))
        net.remove_arc(a)
        net.add_arc(a, u, q, g * g_pq)
    for a in list(net.out_arcs[p]):
        v, g = net.head[a], net.gain[a]
        rec.moved.append((a, p, v, g))
        net.remove_arc(a)
        net.add_arc(a, q, v, g / g_pq)
    if net.sink == p:
        net.sink = q
        net.demand[q] = Fraction(0)
    elif net.sink != q:
        net.demand[q] = net.demand[q] + g_pq * net.demand[p]
    net.remove_node(p)
    state.mu.pop(p)
    state.net[q] = state.net[q] + state.net.pop(p)
    _prune_bundles(state, q, rec)
    state.refresh_tight(list(net.in_arcs[q]) + list(net.out_arcs[q]))
    log.records.append(rec)
    log.preimage[q] = log.preimage.get(q, {q}) | log.preimage.pop(p, {p})
    return rec


def _prune_bundles(state: FlowState, q: int, rec: Contraction) -> None:
    net = state.network
    bundles: dict[tuple[int, int], list[int]] = {}
    for a in list(net.in_arcs[q]) + list(net.out_arcs[q]):
        bundles.setdefault((net.tail[a], net.head[a]), []).append(a)
    for arcs in bundles.values():
        if len(arcs) < 2:
            continue
        top = max(net.gain[a] for a in arcs)
        keep = min(a for a in arcs if net.gain[a] == top)
        for a in sorted(arcs):
            if a == keep:
                continue
            x = state.flow.pop(a, 0)
            if x and net.gain[a] != top:
                raise InvariantViolation(f"flow on dominated parallel arc {a}")
            state.flow[keep] += x
            rec.dropped.append((a, net.tail[a], net.head[a], net.gain[a], keep))
            state.tight.discard(a)
            net.remove_arc(a)


def reduce(state: FlowState, log: ContractionLog, stats: Stats | None = None,
           checked: bool = False) -> int:
    """Repair the flow, then contract arcs while the contraction test passes.

    Returns the number of contracted arcs; raises if there is none.
    """
    n = state.n_ref
    xi_before = potentials(state).xi
    state.flow = repair_flow(state)
    state.recompute_net()
    notes = stats.violations if stats is not None else []
    if checked:
        pot = potentials(state)
        if pot.ex > xi_before:
            notes.append(f"reduce: repaired excess {pot.ex} above {xi_before}")
        if pot.deficit >= n - 1 and pot.deficit > 0:
            notes.append(f"reduce: repaired deficit {pot.deficit} >= n-1")
    count = 0
    while len(state.network.nodes) > 1:
        k = contractible_arc(state)
        if k is None:
            break
        xi = potentials(state).xi if checked else None
        contract_arc(state, k, log)
        count += 1
        if checked and potentials(state).xi > xi:
            notes.append(f"reduce: relaxed excess grew when contracting arc {k}")
    if count == 0:
        raise InvariantViolation("no contractible arc although a plentiful node exists")
    if stats is not None:
        stats.reduce_calls += 1
        stats.contractions += count
    return count


def expand_to_original(mu: dict[int, Fraction], log: ContractionLog) -> dict[int, Fraction]:
    """Undo contractions (last first) by making every contracted arc tight."""
    out = dict(mu)
    for r in reversed(log.records):
        out[r.p] = out[r.q] / r.gain
    return out


def compute_primal(net: Network, mu: dict[int, Fraction]) -> dict[int, Fraction]:
    """Optimal flow for the dual-optimal labels ``mu``, as true (not relabelled) values.

    Every non-sink node is balanced exactly at its demand; only tight arcs
    carry flow.
    """
    nodes = net.sorted_nodes()
    t = net.sink
    arcs = []
    keys = []
    for k in net.arcs():
        if net.gain[k] * mu[net.tail[k]] == mu[net.head[k]]:
            arcs.append((net.tail[k], net.head[k], 0, None))
            keys.append(k)
    windows = {}
    total = Fraction(0)
    for v in nodes:
        if v == t:
            continue
        b = net.demand[v] / mu[v]
        windows[v] = (b, b)
        total += b
    windows[t] = (-total, -total)
    try:
        values = feasible_circulation(nodes, arcs, windows)
    except InfeasibleCirculation as exc:
        raise InvariantViolation(f"labels are not optimal: {exc}") from None
    return {k: Fraction(x) * mu[net.tail[k]] for k, x in zip(keys, values) if x}
