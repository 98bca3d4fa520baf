"""Seeded random instances for tests, benchmarks and the ``gen`` command."""

from __future__ import annotations

import random
from fractions import Fraction

from .model import Arc, Instance


def random_instance(nodes: int, arcs: int, seed: int, max_b: int = 20, max_gamma: int = 10,
                    sink: int | None = None, lossy: float = 0.0) -> Instance:
    """Simple weakly connected digraph; each non-sink node gets a demand with probability 1/2.

    With probability ``lossy`` an arc's gain is flipped to be at most one,
    which makes flow-generating cycles rarer.
    """
    if nodes < 1:
        raise ValueError("need at least one node")
    limit = nodes * (nodes - 1)
    arcs = max(min(arcs, limit), nodes - 1)
    rng = random.Random(seed)
    order = list(range(1, nodes + 1))
    rng.shuffle(order)
    pairs: list[tuple[int, int]] = []
    used: set[tuple[int, int]] = set()
    for i in range(1, nodes):
        u, v = order[i], order[rng.randrange(i)]
        if rng.random() < 0.5:
            u, v = v, u
        pairs.append((u, v))
        used.add((u, v))
    while len(pairs) < arcs:
        u, v = rng.randint(1, nodes), rng.randint(1, nodes)
        if u != v and (u, v) not in used:
            pairs.append((u, v))
            used.add((u, v))
    t = sink if sink is not None else rng.randint(1, nodes)
    out = []
    for u, v in pairs:
        g = Fraction(rng.randint(1, max_gamma), rng.randint(1, max_gamma))
        if g > 1 and rng.random() < lossy:
            g = 1 / g
        out.append(Arc(u, v, g))
    demands = {}
    for v in range(1, nodes + 1):
        if v != t and rng.random() < 0.5:
            b = rng.randint(-max_b, max_b)
            if b:
                demands[v] = b
    inst = Instance(tuple(range(1, nodes + 1)), t, tuple(out), demands)
    inst.validate()
    return inst


def suite(count: int = 300, seed: int = 2024) -> list[Instance]:
    """The desk-scale suite: n <= 10, m <= 25, |b| <= 20, gains built from 1..10."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(2, 10)
        m = rng.randint(n - 1, min(25, n * (n - 1)))
        lossy = rng.choice((0.0, 0.7, 0.9))
        out.append(random_instance(n, m, rng.randrange(10**9), 20, 10, lossy=lossy))
    return out
