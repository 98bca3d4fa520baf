from fractions import Fraction

import pytest
from hypothesis import settings

from genflow.model import Arc, Instance, Network, parse_instance

settings.register_profile("desk", max_examples=60, deadline=None)
settings.load_profile("desk")

TWO_NODE = "p genflow 2 1\nt 1\nn 2 -100\na 2 1 1 1\n"


def make(n, sink, arcs, demands=None, validate=True):
    inst = Instance(tuple(range(1, n + 1)), sink,
                    tuple(Arc(u, v, Fraction(g)) for u, v, g in arcs), dict(demands or {}))
    if validate:
        inst.validate()
    return inst


def network_to_instance(net: Network) -> Instance:
    """Wrap a (possibly contracted) working network for the oracle; demands may be rational."""
    ids = net.arcs()
    return Instance(tuple(net.sorted_nodes()), net.sink,
                    tuple(Arc(net.tail[k], net.head[k], net.gain[k]) for k in ids),
                    {v: b for v, b in net.demand.items() if b and v != net.sink}, bound_B=10**9)


@pytest.fixture
def two_node():
    return parse_instance(TWO_NODE)
