"""Domain types for generalized maximum flow.

An instance is a simple, weakly connected digraph with a distinguished sink
``t``, a positive rational gain on every arc and an integer demand ``b_i`` on
every other node.  The problem is

    maximize   net(f, t)
    subject to net(f, i) >= b_i   for i != t,   f >= 0,

where ``net(f, i) = sum_in gain_e * f_e - sum_out f_e``.

Algorithms work on a *relabelled* view: given positive node labels ``mu``,
the relabelled gain of an arc ``ij`` is ``gain * mu_i / mu_j``, the relabelled
flow is ``f_ij / mu_i`` and the relabelled demand is ``b_i / mu_i``.  An arc is
tight when its relabelled gain equals one.  ``FlowState`` stores the labels,
the integral relabelled flow and a mutable copy of the graph that the
contraction step can shrink.
"""

from __future__ import annotations

import bisect
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, TextIO

Rational = Fraction


class InstanceError(ValueError):
    """Raised for malformed or invalid instance input."""


class InvariantViolation(AssertionError):
    """An algorithmic invariant failed at runtime."""


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    gain: Fraction


@dataclass(frozen=True)
class Instance:
    nodes: tuple[int, ...]
    sink: int
    arcs: tuple[Arc, ...]
    demands: dict[int, int] = field(hash=False)
    bound_B: int = 0

    def __post_init__(self) -> None:
        if not self.bound_B:
            object.__setattr__(self, "bound_B", compute_bound(self.arcs, self.demands))

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.arcs)

    def demand(self, i: int) -> int:
        return self.demands.get(i, 0)

    def validate(self) -> None:
        node_set = set(self.nodes)
        if self.sink not in node_set:
            raise InstanceError(f"sink {self.sink} is not a node")
        if self.sink in self.demands and self.demands[self.sink] != 0:
            raise InstanceError(f"demand on sink {self.sink}")
        seen: set[tuple[int, int]] = set()
        for a in self.arcs:
            if a.tail not in node_set or a.head not in node_set:
                raise InstanceError(f"arc {a.tail}->{a.head} uses an unknown node")
            if a.tail == a.head:
                raise InstanceError(f"self-loop at node {a.tail}")
            if a.gain <= 0:
                raise InstanceError(f"nonpositive gain on arc {a.tail}->{a.head}")
            if (a.tail, a.head) in seen:
                raise InstanceError(f"parallel arc {a.tail}->{a.head}")
            seen.add((a.tail, a.head))
        for i, b in self.demands.items():
            if i not in node_set:
                raise InstanceError(f"demand on unknown node {i}")
            if int(b) != b:
                raise InstanceError(f"non-integral demand on node {i}")
        if not is_weakly_connected(self.nodes, ((a.tail, a.head) for a in self.arcs)):
            raise InstanceError("graph is disconnected")
        B = self.bound_B
        for a in self.arcs:
            if a.gain.numerator >= B or a.gain.denominator >= B:
                raise InstanceError("bound_B does not exceed every gain numerator/denominator")
        if any(abs(b) >= B for b in self.demands.values()):
            raise InstanceError("bound_B does not exceed every demand")


def compute_bound(arcs: Iterable[Arc], demands: dict[int, int]) -> int:
    top = 1
    for a in arcs:
        top = max(top, a.gain.numerator, a.gain.denominator)
    for b in demands.values():
        top = max(top, abs(int(b)))
    return top + 1


def is_weakly_connected(nodes: Iterable[int], pairs: Iterable[tuple[int, int]]) -> bool:
    nodes = list(nodes)
    if not nodes:
        return True
    adj: dict[int, list[int]] = {v: [] for v in nodes}
    for u, v in pairs:
        adj[u].append(v)
        adj[v].append(u)
    seen = {nodes[0]}
    todo = [nodes[0]]
    while todo:
        u = todo.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == len(nodes)


# --------------------------------------------------------------------------
# text format

def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise InstanceError(f"line {lineno}: expected an integer, got {tok!r}") from None


def parse_instance(text: str | TextIO) -> Instance:
    if not isinstance(text, str):
        text = text.read()
    header: tuple[int, int] | None = None
    sink: int | None = None
    demands: dict[int, int] = {}
    arcs: list[Arc] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        kind = tok[0]
        if kind == "p":
            if len(tok) != 4 or tok[1] != "genflow":
                raise InstanceError(f"line {lineno}: malformed problem line")
            if header is not None:
                raise InstanceError(f"line {lineno}: duplicate problem line")
            header = (_parse_int(tok[2], lineno), _parse_int(tok[3], lineno))
            if header[0] < 1 or header[1] < 0:
                raise InstanceError(f"line {lineno}: bad node or arc count")
            continue
        if header is None:
            raise InstanceError(f"line {lineno}: data before problem line")
        n = header[0]
        if kind == "t":
            if len(tok) != 2:
                raise InstanceError(f"line {lineno}: malformed sink line")
            if sink is not None:
                raise InstanceError(f"line {lineno}: duplicate sink line")
            sink = _parse_int(tok[1], lineno)
            if not 1 <= sink <= n:
                raise InstanceError(f"line {lineno}: sink id out of range")
        elif kind == "n":
            if len(tok) != 3:
                raise InstanceError(f"line {lineno}: malformed node line")
            i, b = _parse_int(tok[1], lineno), _parse_int(tok[2], lineno)
            if not 1 <= i <= n:
                raise InstanceError(f"line {lineno}: node id out of range")
            if i in demands:
                raise InstanceError(f"line {lineno}: duplicate demand for node {i}")
            demands[i] = b
        elif kind == "a":
            if len(tok) != 5:
                raise InstanceError(f"line {lineno}: malformed arc line")
            u, v, num, den = (_parse_int(x, lineno) for x in tok[1:])
            if not (1 <= u <= n and 1 <= v <= n):
                raise InstanceError(f"line {lineno}: arc endpoint out of range")
            if den == 0 or num * den <= 0:
                raise InstanceError(f"line {lineno}: nonpositive gain")
            arcs.append(Arc(u, v, Fraction(num, den)))
        else:
            raise InstanceError(f"line {lineno}: unknown line type {kind!r}")
    if header is None:
        raise InstanceError("missing problem line")
    if sink is None:
        raise InstanceError("missing sink line")
    if len(arcs) != header[1]:
        raise InstanceError(f"expected {header[1]} arcs, found {len(arcs)}")
    if demands.get(sink, 0) != 0:
        raise InstanceError(f"demand on sink {sink}")
    demands = {i: b for i, b in demands.items() if b != 0}
    inst = Instance(tuple(range(1, header[0] + 1)), sink, tuple(arcs), demands)
    inst.validate()
    return inst


def format_instance(inst: Instance) -> str:
    lines = [f"p genflow {inst.n} {inst.m}", f"t {inst.sink}"]
    for i in sorted(inst.demands):
        if inst.demands[i]:
            lines.append(f"n {i} {inst.demands[i]}")
    for a in inst.arcs:
        lines.append(f"a {a.tail} {a.head} {a.gain.numerator} {a.gain.denominator}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# relabelled quantities

def relabeled_gain(gain: Fraction, mu_tail: Fraction, mu_head: Fraction) -> Fraction:
    return gain * mu_tail / mu_head


def plenty_threshold(n: int, degree: int) -> int:
    """Demand magnitude (relabelled) at which a node counts as plentiful."""
    return 3 * n * (degree + 1)


@dataclass
class Potentials:
    ex: Fraction
    deficit: Fraction
    xi: Fraction
    psi: Fraction
    phi: Fraction


@dataclass
class VSign:
    v_minus: set[int]
    v_zero: set[int]
    v_plus: set[int]


class Network:
    """Mutable working copy of an instance graph.

    Arc ids are stable across contractions; rational demands are allowed
    because merging nodes scales one demand by a gain.
    """

    def __init__(self) -> None:
        self.nodes: set[int] = set()
        self.sink: int = 0
        self.tail: dict[int, int] = {}
        self.head: dict[int, int] = {}
        self.gain: dict[int, Fraction] = {}
        self.out_arcs: dict[int, list[int]] = {}
        self.in_arcs: dict[int, list[int]] = {}
        self.demand: dict[int, Fraction] = {}

    @classmethod
    def from_instance(cls, inst: Instance) -> "Network":
        net = cls()
        for v in inst.nodes:
            net.add_node(v, Fraction(inst.demand(v)) if v != inst.sink else Fraction(0))
        net.sink = inst.sink
        for k, a in enumerate(inst.arcs):
            net.add_arc(k, a.tail, a.head, a.gain)
        return net

    def copy(self) -> "Network":
        net = Network()
        net.nodes = set(self.nodes)
        net.sink = self.sink
        net.tail = dict(self.tail)
        net.head = dict(self.head)
        net.gain = dict(self.gain)
        net.out_arcs = {v: list(a) for v, a in self.out_arcs.items()}
        net.in_arcs = {v: list(a) for v, a in self.in_arcs.items()}
        net.demand = dict(self.demand)
        return net

    def add_node(self, v: int, b: Fraction = Fraction(0)) -> None:
        self.nodes.add(v)
        self.out_arcs.setdefault(v, [])
        self.in_arcs.setdefault(v, [])
        self.demand[v] = Fraction(b)

    def add_arc(self, k: int, u: int, v: int, gain: Fraction) -> None:
        self.tail[k] = u
        self.head[k] = v
        self.gain[k] = Fraction(gain)
        bisect.insort(self.out_arcs[u], k)
        bisect.insort(self.in_arcs[v], k)

    def remove_arc(self, k: int) -> None:
        self.out_arcs[self.tail[k]].remove(k)
        self.in_arcs[self.head[k]].remove(k)
        del self.tail[k], self.head[k], self.gain[k]

    def remove_node(self, v: int) -> None:
        assert not self.out_arcs[v] and not self.in_arcs[v]
        self.nodes.discard(v)
        del self.out_arcs[v], self.in_arcs[v], self.demand[v]

    def arcs(self) -> list[int]:
        return sorted(self.tail)

    def degree(self, v: int) -> int:
        return len(self.out_arcs[v]) + len(self.in_arcs[v])

    def sorted_nodes(self) -> list[int]:
        return sorted(self.nodes)

    def non_sink(self) -> list[int]:
        return [v for v in sorted(self.nodes) if v != self.sink]

    def vsign(self) -> VSign:
        vm, v0, vp = set(), set(), set()
        for v in self.nodes:
            if v == self.sink:
                continue
            b = self.demand[v]
            (vm if b < 0 else vp if b > 0 else v0).add(v)
        return VSign(vm, v0, vp)


class FlowState:
    """A labelling ``mu`` together with an integral relabelled flow on a network.

    ``flow`` holds relabelled arc flows and ``net`` caches the relabelled net
    flow at every node; both are exact integers while the main loop runs.
    ``n_ref`` is the node count the numeric bounds refer to (the size of the
    instance handed to the main loop, not of the contracted graph).
    """

    def __init__(self, network: Network, mu: dict[int, Fraction],
                 flow: dict[int, int] | None = None, n_ref: int | None = None) -> None:
        self.network = network
        self.mu = {v: Fraction(x) for v, x in mu.items()}
        self.flow: dict[int, int] = dict(flow) if flow else {k: 0 for k in network.tail}
        for k in network.tail:
            self.flow.setdefault(k, 0)
        self.n_ref = n_ref if n_ref is not None else len(network.nodes)
        self.tight: set[int] = set()
        self.net: dict[int, int] = {}
        self.refresh()

    def refresh(self) -> None:
        self.refresh_tight(self.network.tail)
        self.recompute_net()

    def refresh_tight(self, arcs: Iterable[int]) -> None:
        net = self.network
        mu = self.mu
        for k in arcs:
            if net.gain[k] * mu[net.tail[k]] == mu[net.head[k]]:
                self.tight.add(k)
            else:
                self.tight.discard(k)

    def recompute_net(self) -> None:
        net = self.network
        self.net = {v: 0 for v in net.nodes}
        for k, x in self.flow.items():
            if x:
                self.net[net.tail[k]] -= x
                self.net[net.head[k]] += x

    def copy(self) -> "FlowState":
        st = FlowState.__new__(FlowState)
        st.network = self.network.copy()
        st.mu = dict(self.mu)
        st.flow = dict(self.flow)
        st.n_ref = self.n_ref
        st.tight = set(self.tight)
        st.net = dict(self.net)
        return st

    # relabelled quantities -------------------------------------------------

    def gain_mu(self, k: int) -> Fraction:
        net = self.network
        return relabeled_gain(net.gain[k], self.mu[net.tail[k]], self.mu[net.head[k]])

    def b_mu(self, v: int) -> Fraction:
        return self.network.demand[v] / self.mu[v]

    def excess(self, v: int) -> Fraction:
        return self.net[v] - self.b_mu(v)

    def plenty(self, v: int) -> int:
        return plenty_threshold(self.n_ref, self.network.degree(v))

    def is_plentiful(self, v: int) -> bool:
        return abs(self.b_mu(v)) >= self.plenty(v)

    def true_flow(self) -> dict[int, Fraction]:
        net = self.network
        return {k: x * self.mu[net.tail[k]] for k, x in self.flow.items() if x}

    def potentials(self) -> Potentials:
        return potentials(self)

    def is_fitting_pair(self) -> tuple[bool, int | None]:
        return is_fitting_pair(self)

    def has_demands(self) -> bool:
        net = self.network
        return any(net.demand[v] != 0 for v in net.nodes if v != net.sink)


def potentials(state: FlowState) -> Potentials:
    net = state.network
    ex = deficit = psi = phi = Fraction(0)
    xi = Fraction(0)
    for v in net.nodes:
        if v == net.sink:
            continue
        e = state.excess(v)
        if e > 0:
            ex += e
        else:
            deficit -= e
        xi += max(e, Fraction(2))
        if net.demand[v] < 0:
            psi -= state.b_mu(v)
            phi += e
    return Potentials(ex, deficit, xi, psi, phi)


def is_fitting_pair(state: FlowState) -> tuple[bool, int | None]:
    """Check dual feasibility and that every arc with flow is tight.

    Returns ``(ok, witness_arc)``.
    """
    net = state.network
    for k in net.arcs():
        g = state.gain_mu(k)
        if g > 1:
            return False, k
        if state.flow.get(k, 0) and g != 1:
            return False, k
        if state.flow.get(k, 0) < 0:
            return False, k
    return True, None


def tight_components(state: FlowState, nodes: set[int]) -> dict[int, int]:
    """Label each node of ``nodes`` by its undirected tight component (smallest id)."""
    net = state.network
    comp: dict[int, int] = {}
    for s in sorted(nodes):
        if s in comp:
            continue
        comp[s] = s
        todo = deque([s])
        while todo:
            u = todo.popleft()
            for k in net.out_arcs[u]:
                if k in state.tight:
                    w = net.head[k]
                    if w in nodes and w not in comp:
                        comp[w] = s
                        todo.append(w)
            for k in net.in_arcs[u]:
                if k in state.tight:
                    w = net.tail[k]
                    if w in nodes and w not in comp:
                        comp[w] = s
                        todo.append(w)
    return comp
