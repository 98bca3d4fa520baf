"""Augment along tight paths and scale labels until some node is plentiful.

Two interchangeable drivers share the outer loop:

* ``reference`` recomputes the scaled set and the scaling factor from scratch
  after every single label change;
* ``fast`` merges consecutive changes into one pass driven by a binary heap of
  entry times, so the work between two augmentation events stays near
  ``O(m + n log n)``.

Both produce the same sequence of path and null augmentation events and the
same final labels.  With anchors on, labels are steered onto the grid
``Z / (4 n^2)`` so that their bit size stays bounded.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from fractions import Fraction

from .model import FlowState, InvariantViolation, potentials, tight_components
from .netflow import is_safe_labelling
from .stats import RunOptions, Stats


def augmentation_cap(n: int, m: int) -> int:
    m = max(m, 1)
    return int(10 * m * n * (math.log2(max(n * n / m, 1)) + 2) + 10 * m * n) + 10


def fast_ops_cap(n: int, m: int) -> float:
    return 10 * (m + n * math.log2(max(n, 2)))


class PlentifulSearch:
    def __init__(self, state: FlowState, opts: RunOptions, stats: Stats,
                 bound_B: int | None = None) -> None:
        self.st = state
        self.opts = opts
        self.stats = stats
        self.n = state.n_ref
        self.grid = 4 * self.n * self.n
        self.B = bound_B
        self.non_deficit_minus: set[int] = set()

    # grid helpers -----------------------------------------------------------

    def on_grid(self, x: Fraction) -> bool:
        return (x * self.grid).denominator == 1

    def grid_floor(self, x: Fraction) -> Fraction:
        return Fraction(math.floor(x * self.grid), self.grid)

    def grid_below(self, x: Fraction) -> Fraction:
        return Fraction(math.ceil(x * self.grid) - 1, self.grid)

    def anchored(self, v: int) -> bool:
        """Whether ``v`` may start an augmentation or be returned as plentiful."""
        if not self.opts.anchors:
            return True
        st = self.st
        mu = st.mu[v]
        if self.on_grid(mu):
            return True
        b = st.network.demand[v]
        if b < 0:
            if st.excess(v) < 1:
                return False
            room = 2 - st.net[v]
            if room <= 0:
                return True
            return self.grid_below(mu) <= -b / room
        if b > 0:
            P = st.plenty(v)
            if st.b_mu(v) < P:
                return False
            return self.grid_below(mu) <= b / (P + 1)
        return False

    def scale_limit(self, v: int) -> Fraction:
        """Largest admissible scaling step for a demand node inside S."""
        st = self.st
        bm = st.b_mu(v)
        if bm < 0:
            lo = (1 - st.net[v]) / -bm
            hi = (2 - st.net[v]) / -bm
        else:
            P = st.plenty(v)
            lo = P / bm
            hi = (P + 1) / bm
        if not self.opts.anchors:
            if lo <= 1:
                raise InvariantViolation(f"node {v} needs no scaling but was not handled")
            return lo
        mu = st.mu[v]
        g = self.grid_floor(mu / lo) if lo > 1 else self.grid_below(mu)
        if g > 0 and (hi <= 0 or g > mu / hi):
            return mu / g
        if lo > 1:
            self.stats.anchor_fallbacks += 1
            return lo
        raise InvariantViolation(f"no anchor step for node {v}")

    # sets -------------------------------------------------------------------

    def deficit_set(self) -> set[int]:
        st = self.st
        t = st.network.sink
        q = {t}
        for v in st.network.nodes:
            if v != t and st.net[v] < st.b_mu(v):
                q.add(v)
        return q

    def reaching(self, targets: set[int]) -> set[int]:
        """Nodes with a tight residual path into ``targets``."""
        st = self.st
        net = st.network
        seen = set(targets)
        todo = deque(targets)
        scans = 0
        while todo:
            u = todo.popleft()
            for k in net.in_arcs[u]:
                scans += 1
                w = net.tail[k]
                if w not in seen and k in st.tight:
                    seen.add(w)
                    todo.append(w)
            for k in net.out_arcs[u]:
                scans += 1
                w = net.head[k]
                if w not in seen and st.flow[k] > 0:
                    seen.add(w)
                    todo.append(w)
        self.count(arcs=scans)
        return seen

    def count(self, heap: int = 0, arcs: int = 0) -> None:
        self.stats.heap_ops += heap
        self.stats.arc_scans += arcs
        self.stats.ops_since_event += heap + arcs

    def source(self, sbar: set[int]) -> int | None:
        st = self.st
        for v in sorted(sbar):
            if st.network.demand.get(v, 0) < 0 and v != st.network.sink:
                if st.excess(v) >= 1 and self.anchored(v):
                    return v
        return None

    def terminal(self) -> int | None:
        st = self.st
        for v in st.network.non_sink():
            if st.network.demand[v] != 0 and st.is_plentiful(v) and self.anchored(v):
                return v
        return None

    # augmentation -----------------------------------------------------------

    def augment(self, s: int, q: set[int]) -> None:
        st = self.st
        net = st.network
        via: dict[int, tuple[int, int] | None] = {s: None}
        todo = deque([s])
        end = None
        scans = 0
        while todo and end is None:
            u = todo.popleft()
            steps = [(net.head[k], k, 1) for k in net.out_arcs[u] if k in st.tight]
            steps += [(net.tail[k], k, -1) for k in net.in_arcs[u] if st.flow[k] > 0]
            scans += len(net.out_arcs[u]) + len(net.in_arcs[u])
            for w, k, sign in steps:
                if w in via:
                    continue
                via[w] = (k, sign)
                if w in q:
                    end = w
                    break
                todo.append(w)
        self.count(arcs=scans)
        if end is None:
            raise InvariantViolation(f"no tight path from {s} to the deficit set")
        path = []
        w = end
        while via[w] is not None:
            k, sign = via[w]
            st.flow[k] += sign
            path.append(k if sign > 0 else -k - 1)
            w = net.tail[k] if sign > 0 else net.head[k]
        path.reverse()
        st.net[s] -= 1
        st.net[end] += 1
        stats = self.stats
        stats.path_augmentations += 1
        helpful = end == net.sink or net.demand[end] >= 0
        if helpful:
            stats.helpful += 1
        else:
            stats.unhelpful += 1
        if self.opts.trace:
            stats.trace.append(("path", s, end, tuple(path)))
        stats.close_interval()
        stats.observe_labels(st.mu, self.n, self.B)

    def record_nulls(self, was_deficit: list[int]) -> None:
        st = self.st
        for v in sorted(was_deficit):
            if st.net[v] >= st.b_mu(v):
                self.stats.null_augmentations += 1
                self.stats.unhelpful += 1
                if self.opts.trace:
                    self.stats.trace.append(("null", v))
                self.stats.close_interval()

    # label updates ----------------------------------------------------------

    def scaled_set(self, sbar: set[int]) -> set[int]:
        comp = tight_components(self.st, sbar)
        root = comp[self.st.network.sink]
        return {v for v, c in comp.items() if c == root}

    def update_reference(self, sbar: set[int]) -> None:
        st = self.st
        net = st.network
        S = self.scaled_set(sbar)
        alpha: Fraction | None = None
        for v in S:
            for k in net.in_arcs[v]:
                if net.tail[k] not in S:
                    a = 1 / st.gain_mu(k)
                    if alpha is None or a < alpha:
                        alpha = a
            if v != net.sink and net.demand[v] != 0:
                a = self.scale_limit(v)
                if alpha is None or a < alpha:
                    alpha = a
        if alpha is None or alpha <= 1:
            raise InvariantViolation(f"scaling factor {alpha} is not finite and above one")
        deficit = [v for v in S if v != net.sink and net.demand[v] < 0 and st.net[v] < st.b_mu(v)]
        for v in S:
            st.mu[v] /= alpha
        self.retighten(S)
        self.stats.label_updates += 1
        self.record_nulls(deficit)
        self.after_update(S)

    def retighten(self, S: set[int]) -> None:
        st = self.st
        net = st.network
        touched = set()
        for v in S:
            touched.update(net.in_arcs[v])
            touched.update(net.out_arcs[v])
        st.refresh_tight(touched)

    def update_fast(self, sbar: set[int]) -> None:
        """One heap-driven pass standing in for a run of reference updates."""
        st = self.st
        net = st.network
        t = net.sink
        comp = tight_components(st, sbar)
        self.count(arcs=sum(net.degree(v) for v in sbar))
        members: dict[int, list[int]] = {}
        for v, c in comp.items():
            members.setdefault(c, []).append(v)
        entry: dict[int, Fraction] = {}
        heap: list[tuple[Fraction, int]] = []
        best: dict[int, Fraction] = {}
        deadline: Fraction | None = None
        null_times: list[Fraction] = []
        watch: list[tuple[Fraction, int]] = []  # V- nodes that may turn plentiful
        deficit: list[int] = []
        fresh_source = False
        ops = 0

        def admit(v: int, when: Fraction) -> None:
            nonlocal deadline, fresh_source, ops
            entry[v] = when
            if v != t and net.demand[v] != 0:
                bm = st.b_mu(v)
                if bm < 0 and st.excess(v) >= 1 and self.anchored(v):
                    # pass ends at this clock, so no limit is needed
                    fresh_source = True
                else:
                    lim = when * self.scale_limit(v)
                    if deadline is None or lim < deadline:
                        deadline = lim
                if bm < 0:
                    if st.net[v] < bm:
                        deficit.append(v)
                        null_times.append(when * st.net[v] / bm)
                    watch.append((when * st.plenty(v) / -bm, v))
            for k in net.in_arcs[v]:
                ops += 1
                u = net.tail[k]
                if u in entry:
                    continue
                key = when / st.gain_mu(k)
                if u not in best or key < best[u]:
                    best[u] = key
                    heapq.heappush(heap, (key, u))
                    ops += 1
            for k in net.out_arcs[v]:
                ops += 1
                if st.flow[k] > 0:
                    u = net.head[k]
                    if u not in entry and (u not in best or when < best[u]):
                        best[u] = when
                        heapq.heappush(heap, (when, u))
                        ops += 1

        for v in members[comp[t]]:
            admit(v, Fraction(1))
        fresh_source = False
        clock = Fraction(1)
        while True:
            while heap and heap[0][1] in entry:
                heapq.heappop(heap)
                ops += 1
            top = heap[0][0] if heap else None
            if top is None and deadline is None:
                raise InvariantViolation("label scaling is unbounded")
            if top is None or (deadline is not None and deadline <= top):
                clock = deadline
                break
            clock = top
            while heap and heap[0][0] == clock:
                _, u = heapq.heappop(heap)
                ops += 1
                if u in entry:
                    continue
                group = members[comp[u]] if u in comp else [u]
                for z in group:
                    if z not in entry:
                        admit(z, clock)
            if fresh_source:
                break
            if deadline is not None and deadline <= clock:
                break
            if null_times and min(null_times) <= clock:
                break
            if self.plentiful_at(watch, entry, clock):
                break
        if clock <= 1:
            raise InvariantViolation(f"scaling factor {clock} is not above one")
        self.count(heap=ops)
        for v, when in entry.items():
            st.mu[v] = st.mu[v] * when / clock
        self.retighten(set(entry))
        self.stats.label_updates += 1
        self.stats.label_passes += 1
        self.record_nulls(deficit)
        self.after_update(set(entry))

    def plentiful_at(self, watch, entry, clock) -> bool:
        st = self.st
        for when, v in watch:
            if when > clock:
                continue
            if not self.opts.anchors:
                return True
            saved = st.mu[v]
            st.mu[v] = saved * entry[v] / clock
            try:
                if st.is_plentiful(v) and self.anchored(v):
                    return True
            finally:
                st.mu[v] = saved
        return False

    # invariant checks -------------------------------------------------------

    def violation(self, msg: str) -> None:
        self.stats.violations.append(msg)

    def check(self, where: str) -> None:
        if not self.opts.checked:
            return
        st = self.st
        net = st.network
        n = self.n
        ok, arc = st.is_fitting_pair()
        if not ok:
            self.violation(f"{where}: not a fitting pair at arc {arc}")
        if any(x < 0 for x in st.flow.values()):
            self.violation(f"{where}: negative relabelled flow")
        pot = potentials(st)
        if pot.xi >= 2 * n - 1:
            self.violation(f"{where}: relaxed excess {pot.xi} >= 2n-1")
        if not -n < pot.phi < 2 * n:
            self.violation(f"{where}: V- excess {pot.phi} outside (-n, 2n)")
        for v in net.non_sink():
            if net.demand[v] < 0:
                bm = st.b_mu(v)
                if st.net[v] <= bm - 1:
                    self.violation(f"{where}: node {v} net {st.net[v]} <= b - 1 = {bm - 1}")
                if v in self.non_deficit_minus and st.net[v] < bm:
                    self.violation(f"{where}: node {v} fell back into deficit")
                if st.net[v] >= bm:
                    self.non_deficit_minus.add(v)

    def after_update(self, S: set[int]) -> None:
        if not self.opts.checked:
            return
        st = self.st
        net = st.network
        self.check("label update")
        safe, cut = is_safe_labelling(st)
        if not safe:
            self.violation(f"label update: unsafe labelling, cut {sorted(cut or [])}")
        for v in S:
            if v != net.sink and net.demand[v] < 0 and st.excess(v) > 2:
                self.violation(f"label update: node {v} excess {st.excess(v)} above 2")
        psi = potentials(st).psi
        if psi < self.last_psi:
            self.violation("label update: psi decreased")
        self.last_psi = psi

    # driver -----------------------------------------------------------------

    def run(self) -> int:
        st = self.st
        net = st.network
        stats = self.stats
        stats.ppn_calls += 1
        start = potentials(st)
        self.last_psi = start.psi
        demand0 = {u: st.b_mu(u) for u in net.non_sink()
                   if net.demand[u] < 0 and not st.is_plentiful(u)}
        aug0 = stats.augmentations
        nulls0 = stats.null_augmentations
        self.non_deficit_minus = set()
        self.check("ppn start")
        cap = augmentation_cap(self.n, max(len(net.tail), 1))
        update_cap = 50 * cap
        updates0 = stats.label_updates
        fast = self.opts.mode == "fast"
        while True:
            v = self.terminal()
            if v is not None:
                break
            q = self.deficit_set()
            sbar = self.reaching(q)
            while (s := self.source(sbar)) is not None:
                self.augment(s, q)
                self.check("augmentation")
                q = self.deficit_set()
                sbar = self.reaching(q)
            if stats.augmentations - aug0 > cap or stats.label_updates - updates0 > update_cap:
                raise InvariantViolation("plentiful-node search exceeded its iteration cap")
            if fast:
                self.update_fast(sbar)
            else:
                self.update_reference(sbar)
        stats.observe_labels(st.mu, self.n, self.B)
        end = potentials(st)
        stats.psi_trace.append(end.psi)
        stats.xi_trace.append(end.xi)
        if self.opts.checked:
            r = stats.augmentations - aug0
            if end.psi - start.psi < r - 4 * self.n:
                self.violation(f"ppn: psi rose by {end.psi - start.psi} after {r} augmentations")
            for u in net.non_sink():
                # bound applies to nodes that were short of plentiful when the call began
                if u in demand0 and st.b_mu(u) < demand0[u] and -st.b_mu(u) >= st.plenty(u) + 3:
                    self.violation(f"ppn: node {u} demand {st.b_mu(u)} beyond plenty + 3")
            if stats.null_augmentations - nulls0 > self.n:
                self.violation("ppn: more than n null augmentations")
        return v


def produce_plentiful_node(state: FlowState, opts: RunOptions | None = None,
                           stats: Stats | None = None, bound_B: int | None = None) -> int:
    """Run the search on ``state`` in place and return a plentiful node."""
    opts = opts or RunOptions()
    stats = stats if stats is not None else Stats()
    if not state.has_demands():
        raise ValueError("no demand nodes left")
    return PlentifulSearch(state, opts, stats, bound_B).run()
