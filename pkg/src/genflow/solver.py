"""Two-phase driver.

Phase one decides feasibility on an auxiliary instance whose initial flow is
trivially feasible; phase two optimizes on the non-flooded part with cheap
escape arcs into the sink, and the answer is mapped back to the input graph.
Both phases run the same main loop: search for a plentiful node, contract,
repeat until no demand is left, then undo the contractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import detect
from .contract import ContractionLog, compute_primal, expand_to_original, reduce
from .model import FlowState, Instance, InvariantViolation, Network, potentials
from .netflow import round_flow
from .oracle import verify_certificates
from .ppn import PlentifulSearch, augmentation_cap, fast_ops_cap
from .stats import RunOptions, Stats

OPTIMAL, INFEASIBLE, UNBOUNDED = "OPTIMAL", "INFEASIBLE", "UNBOUNDED"


@dataclass
class SolveOutcome:
    status: str
    flow: dict[int, Fraction] = field(default_factory=dict)      # original arc index -> flow
    labels: dict[int, Fraction | None] = field(default_factory=dict)  # None means +inf
    objective: Fraction | None = None
    stats: Stats = field(default_factory=Stats)
    phase_stats: dict[str, Stats] = field(default_factory=dict)
    # per phase: final relabelled flow and labels, and the contraction log
    finals: dict[str, tuple[dict[int, int], dict[int, Fraction]]] = field(default_factory=dict)
    logs: dict[str, ContractionLog] = field(default_factory=dict)


@dataclass
class PhaseOne:
    flooded: set[int]
    network: Network
    aux_sink: int
    big_gain: Fraction      # max of gain and 1/gain over arcs outside the flooded set
    escape_gain: Fraction   # gain of every arc into the auxiliary sink
    sink_demand: int        # demand placed on the original sink (0 if flooded)
    flow: dict[int, Fraction]
    labels: dict[int, Fraction]
    flooding: detect.Flooding


@dataclass
class LoopResult:
    network: Network          # the phase instance before contraction
    labels: dict[int, Fraction]
    flow: dict[int, Fraction]
    log: ContractionLog
    final: FlowState


# --------------------------------------------------------------------------
# main loop

def initialize_fitting_pair(net: Network, flow: dict[int, Fraction], mu: dict[int, Fraction],
                            n_ref: int | None = None) -> FlowState:
    """Scale labels so that every excess is at most one, then round the flow."""
    inflow = {v: Fraction(0) for v in net.nodes}
    for k, x in flow.items():
        inflow[net.tail[k]] -= x
        inflow[net.head[k]] += net.gain[k] * x
    delta = Fraction(1)
    for v in net.non_sink():
        e = (inflow[v] - net.demand[v]) / mu[v]
        if e > delta:
            delta = e
    scaled = {v: x * delta for v, x in mu.items()}
    state = FlowState(net, scaled, None, n_ref)
    rel = {k: Fraction(x) / scaled[net.tail[k]] for k, x in flow.items() if x}
    state.flow = {k: 0 for k in net.tail}
    state.flow.update(round_flow(state, rel))
    state.recompute_net()
    return state


def _check_reduce(state: FlowState, stats: Stats, n: int) -> None:
    ok, arc = state.is_fitting_pair()
    if not ok:
        stats.violations.append(f"reduce: not a fitting pair at arc {arc}")
    pot = potentials(state)
    if pot.xi >= 2 * n - 1:
        stats.violations.append(f"reduce: relaxed excess {pot.xi} >= 2n-1")


def run_contraction_loop(state: FlowState, opts: RunOptions, stats: Stats,
                         bound_B: int | None = None) -> tuple[FlowState, ContractionLog]:
    """Alternate plentiful-node search and contraction until no demand is left."""
    net = state.network
    log = ContractionLog.start(net.nodes)
    n, m = len(net.nodes), max(len(net.tail), 1)
    cap = augmentation_cap(n, m)
    stats.observe_labels(state.mu, state.n_ref, bound_B)
    while state.has_demands():
        PlentifulSearch(state, opts, stats, bound_B).run()
        reduce(state, log, stats, checked=opts.checked)
        if opts.checked:
            _check_reduce(state, stats, state.n_ref)
        stats.observe_labels(state.mu, state.n_ref, bound_B)
        if stats.augmentations > cap:
            raise InvariantViolation(f"augmentation count exceeded the cap {cap}")
    return state, log


def solve_phase(net: Network, flow: dict[int, Fraction], mu: dict[int, Fraction],
                opts: RunOptions, stats: Stats, bound_B: int | None = None) -> LoopResult:
    original = net.copy()
    state = initialize_fitting_pair(net.copy(), flow, mu, len(net.nodes))
    if opts.checked:
        pot = potentials(state)
        for v in state.network.non_sink():
            bm = state.b_mu(v)
            if not bm - 1 <= state.net[v] <= bm + 2:
                stats.violations.append(f"init: node {v} net {state.net[v]} outside [b-1, b+2]")
        if pot.xi >= 2 * state.n_ref - 1:
            stats.violations.append("init: relaxed excess too large")
    final, log = run_contraction_loop(state, opts, stats, bound_B)
    if stats.max_ops_between_events > fast_ops_cap(len(original.nodes), len(original.tail)):
        stats.ops_budget_ok = False
    labels = expand_to_original(final.mu, log)
    primal = compute_primal(original, labels)
    return LoopResult(original, labels, primal, log, final)


# --------------------------------------------------------------------------
# phase one

def _gain_bound(inst: Instance, keep: set[int]) -> Fraction:
    top = Fraction(1)
    for a in inst.arcs:
        if a.tail in keep and a.head in keep:
            top = max(top, a.gain, 1 / a.gain)
    return top


def build_phase_one_instance(inst: Instance) -> PhaseOne:
    flooding = detect.flooded_set(inst)
    Z = flooding.flooded
    rest = [v for v in inst.nodes if v not in Z]
    keep = set(rest)
    n = len(rest)  # simple paths outside the flooded set have at most n - 1 arcs
    big = _gain_bound(inst, keep)
    escape = 1 / (big ** (n - 1) + 1)
    aux = max(inst.nodes) + 1
    net = Network()
    for v in rest:
        net.add_node(v, Fraction(inst.demand(v)) if v != inst.sink else Fraction(0))
    net.add_node(aux)
    net.sink = aux
    for k, a in enumerate(inst.arcs):
        if a.tail in keep and a.head in keep:
            net.add_arc(k, a.tail, a.head, a.gain)
    # a unit delivered along a simple path outside Z costs at most big^(n-1) at the sink
    positive = sum(b for v, b in inst.demands.items() if b > 0 and v in keep)
    sink_demand = 0
    if inst.sink in keep:
        sink_demand = -(1 + math.ceil(big ** (n - 1)) * (1 + positive))
        net.demand[inst.sink] = Fraction(sink_demand)
    labels = {v: flooding.labels[v] for v in rest}
    labels[aux] = Fraction(1)
    flow: dict[int, Fraction] = {}
    k = inst.m
    for j in rest:
        b = inst.demand(j) if j != inst.sink else 0
        if b > 0:
            net.add_arc(k, aux, j, labels[j])
            flow[k] = b / labels[j]
            k += 1
    for j in rest:
        net.add_arc(k, j, aux, escape)
        k += 1
    return PhaseOne(Z, net, aux, big, escape, sink_demand, flow, labels, flooding)


def interpret_phase_one(p1: PhaseOne, result: LoopResult, inst: Instance) -> str:
    out = sum((x for k, x in result.flow.items() if p1.network.tail[k] == p1.aux_sink), Fraction(0))
    if out > 0:
        return INFEASIBLE
    if inst.sink in p1.flooded:
        return UNBOUNDED
    return "FEASIBLE"


# --------------------------------------------------------------------------
# phase two

def build_phase_two_instance(inst: Instance, p1: PhaseOne, result: LoopResult
                             ) -> tuple[Network, dict[int, Fraction], dict[int, Fraction], set[int]]:
    """Restrict to non-flooded nodes and add escape arcs j->t where missing.

    Returns the network, initial true flow, initial labels and the aux arc ids.
    """
    keep = [v for v in inst.nodes if v not in p1.flooded]
    keep_set = set(keep)
    net = Network()
    for v in keep:
        net.add_node(v, Fraction(inst.demand(v)) if v != inst.sink else Fraction(0))
    net.sink = inst.sink
    existing = set()
    for k, a in enumerate(inst.arcs):
        if a.tail in keep_set and a.head in keep_set:
            net.add_arc(k, a.tail, a.head, a.gain)
            existing.add((a.tail, a.head))
    aux_arcs = set()
    k = inst.m
    for j in keep:
        if j != inst.sink and (j, inst.sink) not in existing:
            net.add_arc(k, j, inst.sink, p1.escape_gain)
            aux_arcs.add(k)
            k += 1
    labels = {v: result.labels[v] for v in keep}
    flow = {a: x for a, x in result.flow.items() if a < inst.m and a in net.tail}
    for a in aux_arcs:
        if net.gain[a] * labels[net.tail[a]] > labels[net.sink]:
            raise InvariantViolation(f"escape arc {a} violates the phase-one labels")
    return net, flow, labels, aux_arcs


def map_back(inst: Instance, p1: PhaseOne, net: Network, result: LoopResult,
             aux_arcs: set[int]) -> tuple[dict[int, Fraction], dict[int, Fraction | None]]:
    flow = {k: x for k, x in result.flow.items() if k not in aux_arcs and x}
    W = {net.tail[k] for k in aux_arcs if result.flow.get(k, 0) > 0}
    # residual reachability from W over original arcs outside the flooded set
    reach = set(W)
    todo = list(W)
    while todo:
        u = todo.pop()
        for k in net.out_arcs[u]:
            if k not in aux_arcs and net.head[k] not in reach:
                reach.add(net.head[k])
                todo.append(net.head[k])
        for k in net.in_arcs[u]:
            if flow.get(k, 0) > 0 and net.tail[k] not in reach:
                reach.add(net.tail[k])
                todo.append(net.tail[k])
    if inst.sink in reach:
        raise InvariantViolation("sink reachable from escape-arc users")
    labels: dict[int, Fraction | None] = {}
    scale = result.labels[inst.sink]
    for v in inst.nodes:
        if v in p1.flooded or v in reach:
            labels[v] = None
        else:
            labels[v] = result.labels[v] / scale
    arcs = inst.arcs
    for z in sorted(p1.flooded):
        b = inst.demand(z)
        if b <= 0:
            continue
        cycle, path = p1.flooding.witness[z]
        path_gain = Fraction(1)
        for k in path:
            path_gain *= arcs[k].gain
        y = b / path_gain
        x = y / (cycle.gain - 1)
        start = arcs[path[0]].tail if path else z
        # rotate the cycle so that it begins at the path start
        order = list(cycle.arcs)
        while arcs[order[0]].tail != start:
            order.append(order.pop(0))
        amount = x
        for k in order:
            flow[k] = flow.get(k, Fraction(0)) + amount
            amount *= arcs[k].gain
        amount = y
        for k in path:
            flow[k] = flow.get(k, Fraction(0)) + amount
            amount *= arcs[k].gain
    return flow, labels


# --------------------------------------------------------------------------
# entry point

def objective_of(inst: Instance, flow: dict[int, Fraction]) -> Fraction:
    total = Fraction(0)
    for k, x in flow.items():
        a = inst.arcs[k]
        if a.head == inst.sink:
            total += a.gain * x
        if a.tail == inst.sink:
            total -= x
    return total


def solve(inst: Instance, opts: RunOptions | None = None) -> SolveOutcome:
    opts = opts or RunOptions()
    stats = Stats()
    if inst.n == 1:
        return SolveOutcome(OPTIMAL, {}, {inst.sink: Fraction(1)}, Fraction(0), stats)
    B = inst.bound_B
    p1 = build_phase_one_instance(inst)
    s1 = Stats()
    r1 = solve_phase(p1.network, p1.flow, p1.labels, opts, s1, B)
    verdict = interpret_phase_one(p1, r1, inst)
    stats.merge(s1)
    phases = {"one": s1}
    finals = {"one": (dict(r1.final.flow), dict(r1.final.mu))}
    logs = {"one": r1.log}
    if verdict != "FEASIBLE":
        return SolveOutcome(verdict, stats=stats, phase_stats=phases, finals=finals, logs=logs)
    net2, flow2, mu2, aux = build_phase_two_instance(inst, p1, r1)
    s2 = Stats()
    r2 = solve_phase(net2, flow2, mu2, opts, s2, B)
    stats.merge(s2)
    phases["two"] = s2
    finals["two"] = (dict(r2.final.flow), dict(r2.final.mu))
    logs["two"] = r2.log
    flow, labels = map_back(inst, p1, net2, r2, aux)
    objective = objective_of(inst, flow)
    ok, why = verify_certificates(inst, flow, labels, objective)
    if not ok:
        raise InvariantViolation(f"certificate check failed: {why}")
    return SolveOutcome(OPTIMAL, flow, labels, objective, stats, phases, finals, logs)


# --------------------------------------------------------------------------
# text output

def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def format_solution(inst: Instance, out: SolveOutcome) -> str:
    lines = [f"s {out.status}"]
    if out.status == OPTIMAL:
        lines.append(f"v {_frac(out.objective)}")
        for v in sorted(out.labels):
            x = out.labels[v]
            lines.append(f"l {v} {'inf' if x is None else _frac(x)}")
        for k in sorted(out.flow):
            if out.flow[k]:
                a = inst.arcs[k]
                lines.append(f"f {a.tail} {a.head} {_frac(out.flow[k])}")
    return "\n".join(lines) + "\n"


def format_stats(inst: Instance, out: SolveOutcome) -> str:
    st = out.stats
    n, B = inst.n, inst.bound_B
    rows = [
        ("path_augmentations", st.path_augmentations),
        ("null_augmentations", st.null_augmentations),
        ("helpful", st.helpful),
        ("unhelpful", st.unhelpful),
        ("label_updates", st.label_updates),
        ("contractions", st.contractions),
        ("heap_ops", st.heap_ops),
        ("arc_scans", st.arc_scans),
        ("max_ops_between_augmentations", st.max_ops_between_events),
        ("max_label_denominator", st.max_label_den),
        ("denominator_bound", 4 * n * n * B ** (2 * n)),
        ("label_size_ok", int(st.label_den_ok)),
        ("label_value_ok", int(st.label_value_ok)),
        ("ops_budget_ok", int(st.ops_budget_ok)),
        ("anchor_fallbacks", st.anchor_fallbacks),
        ("psi_trace", " ".join(_frac(x) for x in st.psi_trace)),
        ("xi_trace", " ".join(_frac(x) for x in st.xi_trace)),
        ("violations", len(st.violations)),
    ]
    return "".join(f"c {k} {v}\n" for k, v in rows)


def parse_solution(text: str, inst: Instance) -> tuple[str, dict[int, Fraction], dict[int, Fraction | None], Fraction | None]:
    status = None
    objective = None
    labels: dict[int, Fraction | None] = {}
    flow: dict[int, Fraction] = {}
    index = {(a.tail, a.head): k for k, a in enumerate(inst.arcs)}
    for raw in text.splitlines():
        tok = raw.split("#", 1)[0].split()
        if not tok or tok[0] == "c":
            continue
        if tok[0] == "s":
            status = tok[1]
        elif tok[0] == "v":
            objective = Fraction(tok[1])
        elif tok[0] == "l":
            labels[int(tok[1])] = None if tok[2] == "inf" else Fraction(tok[2])
        elif tok[0] == "f":
            key = (int(tok[1]), int(tok[2]))
            if key not in index:
                raise ValueError(f"flow on unknown arc {key}")
            flow[index[key]] = Fraction(tok[3])
        else:
            raise ValueError(f"unknown solution line {raw!r}")
    if status is None:
        raise ValueError("missing status line")
    return status, flow, labels, objective
