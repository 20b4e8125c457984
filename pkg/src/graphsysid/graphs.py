"""Weighted undirected graphs and their combinatorial graph Laplacians.

A combinatorial graph Laplacian (CGL) is L = D - W for a simple weighted
graph: symmetric, positive semidefinite, nonpositive off-diagonal, zero row
sums. Connected graphs give a single zero eigenvalue with eigenvector
1/sqrt(n) * ones.
"""

from dataclasses import dataclass, field

import numpy as np

from . import rng

GRAPH_KINDS = ("grid", "erdos_renyi", "modular")

MAX_CONNECTIVITY_RETRIES = 1000

PSD_TOL = 1e-10


@dataclass(frozen=True)
class WeightedGraph:
    """Vertex count plus weighted edge list.

    Edges are (i, j, w) with 0 <= i < j < n and w > 0; pairs absent from the
    list have weight zero. The list is kept in lexicographic (i, j) order.
    """

    n: int
    edges: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("vertex count must be positive")
        seen = set()
        for i, j, w in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i},{j}) violates 0 <= i < j < n")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            if not (w > 0 and np.isfinite(w)):
                raise ValueError(f"edge ({i},{j}) has nonpositive weight {w}")
            seen.add((i, j))

    def adjacency(self):
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i, j] = w
            A[j, i] = w
        return A

    def is_connected(self):
        return _connected(self.n, [(i, j) for i, j, _ in self.edges])

    def to_dict(self):
        return {"n": self.n, "edges": [[int(i), int(j), float(w)] for i, j, w in self.edges]}

    @classmethod
    def from_dict(cls, d):
        edges = tuple(sorted((int(i), int(j), float(w)) for i, j, w in d["edges"]))
        return cls(n=int(d["n"]), edges=edges)


@dataclass(frozen=True)
class GraphModelSpec:
    """Parameters of the random graph models used in the experiments.

    kind "grid": 4-nearest-neighbour lattice, n a perfect square.
    kind "erdos_renyi": each pair attached independently with probability p.
    kind "modular": stochastic block model with `module_count` modules,
    within-module probability p2, cross-module probability p1; remainder
    vertices go to the last module.

    Edge weights are i.i.d. uniform on [weight_low, weight_high] for every
    model, one draw per realised edge in lexicographic edge order.
    """

    kind: str
    n: int
    p: float = 0.2
    p1: float = 0.1
    p2: float = 0.2
    module_count: int = 4
    weight_low: float = 0.1
    weight_high: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")
        if self.n < 2:
            raise ValueError("need at least two vertices")
        for name in ("p", "p1", "p2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1]")
        if not (self.weight_low > 0):
            raise ValueError("weight_low must be positive")
        if self.weight_high < self.weight_low:
            raise ValueError("weight_high must be >= weight_low")
        if self.kind == "grid":
            s = int(round(np.sqrt(self.n)))
            if s * s != self.n:
                raise ValueError(f"grid graphs need a perfect-square vertex count, got n={self.n}")
        if self.kind == "modular" and not (1 <= self.module_count <= self.n):
            raise ValueError("module_count must lie in [1, n]")


def _connected(n, pairs):
    """Breadth-first check that the undirected graph on `pairs` is connected."""
    if n == 1:
        return True
    adj = [[] for _ in range(n)]
    for i, j in pairs:
        adj[i].append(j)
        adj[j].append(i)
    seen = [False] * n
    queue = [0]
    seen[0] = True
    count = 1
    while queue:
        v = queue.pop()
        for u in adj[v]:
            if not seen[u]:
                seen[u] = True
                count += 1
                queue.append(u)
    return count == n


def build_cgl(g: WeightedGraph) -> np.ndarray:
    """CGL of a connected weighted graph, L = D - W.

    Rejects disconnected graphs so that the zero eigenvalue is simple, which
    every downstream pseudo-determinant computation relies on.
    """
    if not g.is_connected():
        raise ValueError("graph is disconnected; its CGL would have a repeated zero eigenvalue")
    A = g.adjacency()
    return np.diag(A.sum(axis=1)) - A


def quadratic_form(L: np.ndarray, x: np.ndarray) -> float:
    """x^T L x, the Laplacian variation of the signal x (always >= 0 for CGLs)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (L.shape[0],):
        raise ValueError(f"signal length {x.shape} does not match n={L.shape[0]}")
    return float(x @ L @ x)


def _lattice_pairs(n):
    side = int(round(np.sqrt(n)))
    pairs = []
    for r in range(side):
        for c in range(side):
            v = r * side + c
            if c + 1 < side:
                pairs.append((v, v + 1))
            if r + 1 < side:
                pairs.append((v, v + side))
    return sorted(pairs)


def _module_labels(n, module_count):
    # equal-size modules; remainder vertices assigned to the last module
    size = n // module_count
    labels = np.minimum(np.arange(n) // max(size, 1), module_count - 1)
    return labels


def _draw_topology(spec: GraphModelSpec, gen) -> list:
    if spec.kind == "grid":
        return _lattice_pairs(spec.n)
    pairs = [(i, j) for i in range(spec.n) for j in range(i + 1, spec.n)]
    if spec.kind == "erdos_renyi":
        probs = np.full(len(pairs), spec.p)
    else:
        labels = _module_labels(spec.n, spec.module_count)
        probs = np.array([spec.p2 if labels[i] == labels[j] else spec.p1 for i, j in pairs])
    u = gen.random(len(pairs))
    return [pair for pair, ui, pi in zip(pairs, u, probs) if ui < pi]


def generate_graph(spec: GraphModelSpec) -> WeightedGraph:
    """Random connected graph per `spec`, deterministic given spec.seed.

    Topology attempts that come out disconnected are discarded and redrawn
    from a fresh substream; weights are then drawn uniform per realised edge
    in lexicographic order from the accepted attempt's weight substream.
    """
    for attempt in range(MAX_CONNECTIVITY_RETRIES):
        tgen = rng.stream(spec.seed, "topology", attempt)
        pairs = _draw_topology(spec, tgen)
        if _connected(spec.n, pairs):
            wgen = rng.stream(spec.seed, "weights", attempt)
            w = rng.uniforms(wgen, len(pairs), spec.weight_low, spec.weight_high)
            edges = tuple((i, j, float(wi)) for (i, j), wi in zip(pairs, w))
            return WeightedGraph(n=spec.n, edges=edges)
    raise RuntimeError(
        f"no connected graph found in {MAX_CONNECTIVITY_RETRIES} attempts; "
        f"the model {spec.kind} with these probabilities is too sparse"
    )
