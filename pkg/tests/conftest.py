import pytest

from rplsim.scenario import ScenarioConfig
from rplsim.topology import Topology


def chain_topology(n, attackers=(), extra_edges=()):
    """0-1-2-...-(n-1) line rooted at 0, plus optional extra edges."""
    edges = [(i, i + 1) for i in range(n - 1)]
    edges.extend(extra_edges)
    return Topology.from_edges(n, edges, root_id=0, attackers=attackers)


def star_topology(k):
    """Root 0 with k leaves."""
    return Topology.from_edges(k + 1, [(0, i) for i in range(1, k + 1)], root_id=0)


def tiny_cfg(**overrides):
    """A fast, valid config for engine-level tests."""
    params = dict(node_count=10, area=(30.0, 30.0), tx_range=20.0,
                  malicious_fraction=0.0, duration_s=50.0, seed=7)
    params.update(overrides)
    return ScenarioConfig(**params)


@pytest.fixture
def cfg_factory():
    return tiny_cfg
