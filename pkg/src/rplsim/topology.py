"""Random geometric topology generation under the unit-disk connectivity rule."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import ConnectivityFailure
from .scenario import ScenarioConfig

MAX_CONNECTIVITY_ATTEMPTS = 100


@dataclass(frozen=True)
class Topology:
    """Node placement plus derived unit-disk adjacency.

    ``adjacency[i]`` is the sorted tuple of neighbors of node ``i``;
    two nodes are adjacent iff their Euclidean distance is <= tx_range.
    """

    positions: tuple[tuple[float, float], ...]
    root_id: int
    adjacency: tuple[tuple[int, ...], ...]
    attacker_set: frozenset[int] = field(default_factory=frozenset)

    @property
    def node_count(self) -> int:
        return len(self.positions)

    def benign_ids(self) -> list[int]:
        return [i for i in range(self.node_count) if i not in self.attacker_set]

    @classmethod
    def from_edges(cls, node_count, edges, root_id=0, attackers=(), positions=None):
        """Build a topology from an explicit edge list (for tests and tools)."""
        neigh = [set() for _ in range(node_count)]
        for a, b in edges:
            if a == b:
                continue
            neigh[a].add(b)
            neigh[b].add(a)
        if positions is None:
            positions = tuple((float(i), 0.0) for i in range(node_count))
        return cls(
            positions=tuple(positions),
            root_id=root_id,
            adjacency=tuple(tuple(sorted(s)) for s in neigh),
            attacker_set=frozenset(attackers),
        )


def _build_adjacency(positions, tx_range):
    n = len(positions)
    limit = tx_range * tx_range
    neigh = [[] for _ in range(n)]
    for i in range(n):
        xi, yi = positions[i]
        for j in range(i + 1, n):
            dx = xi - positions[j][0]
            dy = yi - positions[j][1]
            if dx * dx + dy * dy <= limit:
                neigh[i].append(j)
                neigh[j].append(i)
    return tuple(tuple(row) for row in neigh)  # rows already sorted by construction


def _is_connected(adjacency) -> bool:
    n = len(adjacency)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count == n


def _nearest_to_center(positions, area) -> int:
    cx, cy = area[0] / 2.0, area[1] / 2.0
    best = 0
    best_d = float("inf")
    for i, (x, y) in enumerate(positions):
        d = (x - cx) ** 2 + (y - cy) ** 2
        if d < best_d:
            best = i
            best_d = d
    return best


def generate_topology(cfg: ScenarioConfig) -> Topology:
    """Generate a connected random topology from a seeded PRNG.

    Positions are i.i.d. uniform over the area (Mersenne Twister, seeded
    with cfg.seed, so runs replay identically across platforms). The root
    is the node nearest the area center. Attackers are drawn uniformly
    among non-root nodes, |attackers| = round(malicious_fraction * n).
    Re-samples until the whole graph is connected, up to a bounded number
    of attempts.
    """
    rng = random.Random(cfg.seed)
    w, h = cfg.area
    n = cfg.node_count
    for _ in range(MAX_CONNECTIVITY_ATTEMPTS):
        positions = tuple((rng.uniform(0.0, w), rng.uniform(0.0, h)) for _ in range(n))
        adjacency = _build_adjacency(positions, cfg.tx_range)
        if _is_connected(adjacency):
            break
    else:
        raise ConnectivityFailure(
            "no connected topology in %d attempts (n=%d, area=%gx%g, tx_range=%g)"
            % (MAX_CONNECTIVITY_ATTEMPTS, n, w, h, cfg.tx_range)
        )
    root_id = _nearest_to_center(positions, cfg.area)
    attacker_count = round(cfg.malicious_fraction * n)
    candidates = [i for i in range(n) if i != root_id]
    attackers = frozenset(rng.sample(candidates, attacker_count))
    return Topology(
        positions=positions,
        root_id=root_id,
        adjacency=adjacency,
        attacker_set=attackers,
    )
