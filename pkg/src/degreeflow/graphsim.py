"""Event-driven stochastic simulation of the evolving network.

Implements the eight elementary processes as a Gillespie chain whose total
event rates are chosen so that the large-N degree distribution reproduces
the mean-field master equation: rewiring fires at 2E omega_r (2E omega_p for
the preferential variant), link deletion at E l_d, link addition at N l_r
(N l_p preferential), node deletion at 2E n_d (a uniformly chosen edge
endpoint IS a degree-biased node), and node addition at N n_r / N n_p.
Degree-biased choices always sample a uniform endpoint of a uniform edge,
which is exact and O(1).  Placements that turn out illegal (duplicate links,
self-links, not enough distinct targets) are resampled up to a fixed number
of attempts and then skipped, with a counter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .degree_ode import TruncatedDistribution
from .errors import AbsorbingStateReached, DomainError, ValidationError
from .model import ProcessRates

__all__ = ["Network", "SimConfig", "SimResult", "step", "run", "empirical_distribution"]

_RETRIES = 100


class Network:
    """Undirected simple graph with O(1) uniform edge and node sampling."""

    def __init__(self):
        self.adj: dict[int, set[int]] = {}
        self._nodes: list[int] = []
        self._node_pos: dict[int, int] = {}
        self._edges: list[tuple[int, int]] = []
        self._edge_pos: dict[tuple[int, int], int] = {}
        self._next_id = 0

    # -- builders -----------------------------------------------------------

    @classmethod
    def empty(cls, n: int) -> "Network":
        net = cls()
        for _ in range(n):
            net.add_node()
        return net

    @classmethod
    def regular_ring(cls, n: int, k: int) -> "Network":
        """Circulant graph: node i linked to i +- 1 .. i +- k/2 (k even, k < n)."""
        if k % 2 != 0 or k < 0:
            raise ValidationError(f"ring degree must be even and >= 0, got {k}")
        if k >= n:
            raise ValidationError(f"ring degree {k} needs more than {n} nodes")
        net = cls.empty(n)
        for i in range(n):
            for d in range(1, k // 2 + 1):
                net.add_edge(i, (i + d) % n)
        return net

    @classmethod
    def erdos_renyi(cls, n: int, mean_degree: float, rng: np.random.Generator) -> "Network":
        """G(n, p) with p = mean_degree/(n-1), sampled by geometric skipping."""
        if n < 1:
            raise ValidationError(f"need at least one node, got {n}")
        net = cls.empty(n)
        if n == 1 or mean_degree <= 0.0:
            return net
        p = min(mean_degree / (n - 1), 1.0)
        if p >= 1.0:
            for i in range(n):
                for j in range(i + 1, n):
                    net.add_edge(i, j)
            return net
        # Batagelj-Brandes skip sampling over the upper-triangular pair index.
        lq = math.log1p(-p)
        i, j = 1, -1
        while i < n:
            j += 1 + int(math.log(1.0 - rng.random()) / lq)
            while j >= i and i < n:
                j -= i
                i += 1
            if i < n:
                net.add_edge(i, j)
        return net

    # -- counts -------------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self._nodes)

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def degree(self, u: int) -> int:
        return len(self.adj[u])

    # -- mutation -----------------------------------------------------------

    def add_node(self) -> int:
        u = self._next_id
        self._next_id += 1
        self._node_pos[u] = len(self._nodes)
        self._nodes.append(u)
        self.adj[u] = set()
        return u

    def remove_node(self, u: int) -> None:
        for v in list(self.adj[u]):
            self.remove_edge(u, v)
        pos = self._node_pos.pop(u)
        last = self._nodes.pop()
        if last != u:
            self._nodes[pos] = last
            self._node_pos[last] = pos
        del self.adj[u]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValidationError("self-links are not allowed")
        if v in self.adj[u]:
            raise ValidationError(f"link ({u}, {v}) already present")
        key = (u, v) if u < v else (v, u)
        self._edge_pos[key] = len(self._edges)
        self._edges.append(key)
        self.adj[u].add(v)
        self.adj[v].add(u)

    def remove_edge(self, u: int, v: int) -> None:
        key = (u, v) if u < v else (v, u)
        pos = self._edge_pos.pop(key)
        last = self._edges.pop()
        if last != key:
            self._edges[pos] = last
            self._edge_pos[last] = pos
        self.adj[u].discard(v)
        self.adj[v].discard(u)

    # -- sampling -----------------------------------------------------------

    def random_node(self, rng: np.random.Generator) -> int:
        return self._nodes[int(rng.integers(len(self._nodes)))]

    def random_edge(self, rng: np.random.Generator) -> tuple[int, int]:
        return self._edges[int(rng.integers(len(self._edges)))]

    def random_endpoint(self, rng: np.random.Generator) -> int:
        """Degree-biased node: a uniform endpoint of a uniform edge."""
        e = self.random_edge(rng)
        return e[int(rng.integers(2))]

    def degree_counts(self, k_max: int) -> np.ndarray:
        degs = np.fromiter((len(s) for s in self.adj.values()), dtype=np.int64, count=len(self.adj))
        counts = np.bincount(np.minimum(degs, k_max + 1), minlength=k_max + 2)
        return counts[: k_max + 1]  # degrees beyond k_max fall off the histogram

    def check(self) -> None:
        """Validate the internal invariants (used by the test suite)."""
        assert len(self._nodes) == len(self.adj) == len(self._node_pos)
        for u, pos in self._node_pos.items():
            assert self._nodes[pos] == u
        deg_sum = 0
        for u, nbrs in self.adj.items():
            assert u not in nbrs, "self-link"
            deg_sum += len(nbrs)
            for v in nbrs:
                assert u in self.adj[v], "asymmetric adjacency"
        assert deg_sum == 2 * len(self._edges)
        assert len(self._edges) == len(self._edge_pos)
        for key, pos in self._edge_pos.items():
            assert self._edges[pos] == key
            assert key[0] < key[1]


def empirical_distribution(net: Network, k_max: int | None = None) -> TruncatedDistribution:
    """Observed degree distribution of the graph (degrees > k_max dropped)."""
    if net.n_nodes == 0:
        raise DomainError("the empty graph has no degree distribution")
    if k_max is None:
        k_max = max((len(s) for s in net.adj.values()), default=0)
    counts = net.degree_counts(k_max)
    return TruncatedDistribution(counts.astype(float) / net.n_nodes)


# -- event execution --------------------------------------------------------


def _pick_new_neighbor(net: Network, keeper: int, rng, preferential: bool) -> int | None:
    for _ in range(_RETRIES):
        w = net.random_endpoint(rng) if preferential else net.random_node(rng)
        if w != keeper and not net.has_edge(keeper, w):
            return w
    return None


def _rewire(net: Network, rng, preferential: bool) -> bool:
    u, v = net.random_edge(rng)
    keeper, loser = (u, v) if rng.integers(2) == 0 else (v, u)
    net.remove_edge(keeper, loser)
    w = _pick_new_neighbor(net, keeper, rng, preferential)
    if w is None:
        net.add_edge(keeper, loser)  # restore: rewiring must conserve E
        return False
    net.add_edge(keeper, w)
    return True


def _add_link(net: Network, rng, preferential: bool) -> bool:
    for _ in range(_RETRIES):
        u = net.random_endpoint(rng) if preferential else net.random_node(rng)
        v = net.random_endpoint(rng) if preferential else net.random_node(rng)
        if u != v and not net.has_edge(u, v):
            net.add_edge(u, v)
            return True
    return False


def _add_node(net: Network, rng, m: int, preferential: bool) -> bool:
    targets: set[int] = set()
    if m > 0:
        budget = _RETRIES * max(m, 1)
        while len(targets) < m and budget > 0:
            budget -= 1
            w = net.random_endpoint(rng) if preferential else net.random_node(rng)
            targets.add(w)
        if len(targets) < m:
            return False
    u = net.add_node()
    for w in targets:
        net.add_edge(u, w)
    return True


def _clocks(net: Network, rates: ProcessRates) -> np.ndarray:
    e, n = float(net.n_edges), float(net.n_nodes)
    m = rates.m
    return np.array(
        [
            2.0 * e * rates.omega_r,
            2.0 * e * rates.omega_p,
            e * rates.l_d,
            n * rates.l_r if n >= 2 else 0.0,
            n * rates.l_p if e >= 1 and n >= 2 else 0.0,
            2.0 * e * rates.n_d,
            n * rates.n_r if n >= m else 0.0,
            n * rates.n_p if n >= m and (e >= 1 or m == 0) else 0.0,
        ]
    )


def _draw(net: Network, rates: ProcessRates, rng: np.random.Generator) -> tuple[float, int]:
    """Waiting time and event index of the next event (state untouched)."""
    lam = _clocks(net, rates)
    total = float(lam.sum())
    if total <= 0.0:
        raise AbsorbingStateReached("all event rates vanished")
    dt = float(rng.exponential(1.0 / total))
    pick = float(rng.random()) * total
    idx = int(np.searchsorted(np.cumsum(lam), pick, side="right"))
    return dt, min(idx, 7)


def _execute(net: Network, idx: int, rates: ProcessRates, rng: np.random.Generator) -> bool:
    if idx == 0:
        return _rewire(net, rng, preferential=False)
    if idx == 1:
        return _rewire(net, rng, preferential=True)
    if idx == 2:
        u, v = net.random_edge(rng)
        net.remove_edge(u, v)
        return True
    if idx == 3:
        return _add_link(net, rng, preferential=False)
    if idx == 4:
        return _add_link(net, rng, preferential=True)
    if idx == 5:
        # clock 2E*n_d with a uniform victim: survivors then lose a
        # neighbor at rate n_d*mu*k while the removed sample is unbiased
        net.remove_node(net.random_node(rng))
        return True
    if idx == 6:
        return _add_node(net, rng, rates.m, preferential=False)
    return _add_node(net, rng, rates.m, preferential=True)


def step(net: Network, rates: ProcessRates, rng: np.random.Generator) -> tuple[float, bool]:
    """Execute one Gillespie event in place.

    Returns (elapsed time, executed flag); the flag is False when the drawn
    event had to be skipped after exhausting its placement attempts.  Raises
    AbsorbingStateReached when no process is applicable.
    """
    dt, idx = _draw(net, rates, rng)
    ok = _execute(net, idx, rates, rng)
    return dt, ok


# -- ensemble runs ----------------------------------------------------------


@dataclass(frozen=True)
class SimConfig:
    """Ensemble simulation setup.

    graph: "regular" (circulant of degree graph_degree), "erdos" (mean
    degree graph_degree), or "empty".  Sample times must be increasing and
    nonnegative.  k_max fixes the histogram length shared by all snapshots.
    """

    rates: ProcessRates
    n_nodes: int
    sample_times: tuple[float, ...]
    seed: int
    replicas: int = 1
    graph: str = "regular"
    graph_degree: float = 0.0
    k_max: int = 200

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValidationError(f"need at least one node, got {self.n_nodes}")
        if self.replicas < 1:
            raise ValidationError(f"need at least one replica, got {self.replicas}")
        if self.graph not in ("regular", "erdos", "empty"):
            raise ValidationError(f"unknown initial graph kind {self.graph!r}")
        ts = tuple(float(t) for t in self.sample_times)
        if not ts or any(t < 0.0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("sample times must be nonnegative and strictly increasing")
        if self.k_max < 1:
            raise ValidationError(f"k_max must be >= 1, got {self.k_max}")
        object.__setattr__(self, "sample_times", ts)


@dataclass
class SimResult:
    """Ensemble-averaged degree histograms at the sample times."""

    times: np.ndarray  # (T,)
    mean: np.ndarray  # (T, k_max+1) ensemble mean of p_k
    stderr: np.ndarray  # (T, k_max+1) standard error over replicas
    absorbed: list[bool]
    skipped: int
    mean_nodes: np.ndarray  # (T,) average node count
    replicas: int = field(default=1)


def _build_initial(config: SimConfig, rng: np.random.Generator) -> Network:
    if config.graph == "regular":
        k = int(round(config.graph_degree))
        return Network.regular_ring(config.n_nodes, k)
    if config.graph == "erdos":
        return Network.erdos_renyi(config.n_nodes, config.graph_degree, rng)
    return Network.empty(config.n_nodes)


def run(config: SimConfig) -> SimResult:
    """Simulate the ensemble and return averaged degree histograms.

    Each replica gets an independent child stream of the seed.  Once a
    replica reaches an absorbing state (total rate zero) its remaining
    snapshots repeat the frozen graph, flagged in ``absorbed``.
    """
    times = np.asarray(config.sample_times, dtype=float)
    seeds = np.random.SeedSequence(config.seed).spawn(config.replicas)
    per_rep = np.empty((config.replicas, times.size, config.k_max + 1))
    n_counts = np.zeros((config.replicas, times.size))
    absorbed: list[bool] = []
    skipped = 0

    for r in range(config.replicas):
        rng = np.random.default_rng(seeds[r])
        net = _build_initial(config, rng)
        t = 0.0
        frozen = False
        j = 0

        def snap(j):
            if net.n_nodes > 0:
                per_rep[r, j] = net.degree_counts(config.k_max) / net.n_nodes
            else:
                per_rep[r, j] = 0.0
            n_counts[r, j] = net.n_nodes

        while j < times.size and times[j] <= t:
            snap(j)
            j += 1
        while j < times.size:
            if frozen:
                snap(j)
                j += 1
                continue
            try:
                dt, idx = _draw(net, config.rates, rng)
            except AbsorbingStateReached:
                frozen = True
                continue
            # Samples inside the waiting interval see the pre-event state.
            t_next = t + dt
            while j < times.size and times[j] <= t_next:
                snap(j)
                j += 1
            if not _execute(net, idx, config.rates, rng):
                skipped += 1
            t = t_next
        absorbed.append(frozen)

    mean = per_rep.mean(axis=0)
    if config.replicas > 1:
        stderr = per_rep.std(axis=0, ddof=1) / math.sqrt(config.replicas)
    else:
        stderr = np.zeros_like(mean)
    return SimResult(
        times=times,
        mean=mean,
        stderr=stderr,
        absorbed=absorbed,
        skipped=skipped,
        mean_nodes=n_counts.mean(axis=0),
        replicas=config.replicas,
    )
