"""Undirected simple connected graphs, generators, and topology predicates.

Edges are stored once as ``(i, j)`` with ``i < j`` and kept in lexicographic
order. Every downstream edge-space index (factor graph, operators, iterates)
is derived from that single order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DisconnectedGraph,
    DuplicateEdge,
    GenerationFailed,
    GraphError,
    IndexOutOfRange,
    SelfLoop,
    TooLargeForExactConductance,
    TooSmall,
)

ER_MAX_RETRIES = 1000
CONDUCTANCE_LIMIT = 20


@dataclass(frozen=True)
class Graph:
    """Validated undirected, simple, connected graph.

    Build through :func:`build_graph` or the generators; the constructor
    itself assumes canonical input. Two graphs compare equal iff they have the
    same vertex count and edge set.
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...] = field(init=False, compare=False, repr=False)
    degrees: tuple[int, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        nbrs: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        object.__setattr__(self, "adjacency", tuple(tuple(sorted(v)) for v in nbrs))
        object.__setattr__(self, "degrees", tuple(len(v) for v in nbrs))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def d_min(self) -> int:
        return min(self.degrees)

    @property
    def d_max(self) -> int:
        return max(self.degrees)

    @property
    def delta_ratio(self) -> float:
        """Degree irregularity d_max / d_min (1 for regular graphs)."""
        return self.d_max / self.d_min

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.intp).reshape(-1, 2)

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices))
        e = self.edge_array()
        a[e[:, 0], e[:, 1]] = 1.0
        a[e[:, 1], e[:, 0]] = 1.0
        return a

    def degree_matrix(self) -> np.ndarray:
        return np.diag(np.asarray(self.degrees, dtype=float))

    def laplacian(self) -> np.ndarray:
        return self.degree_matrix() - self.adjacency_matrix()

    def is_bipartite(self) -> bool:
        color = [-1] * self.n_vertices
        color[0] = 0
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if color[w] < 0:
                    color[w] = 1 - color[v]
                    queue.append(w)
                elif color[w] == color[v]:
                    return False
        return True


def _is_connected(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for i, j in edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        v = stack.pop()
        for w in nbrs[v]:
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return all(seen)


def build_graph(n: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Validate an edge list and return a canonical :class:`Graph`.

    Pairs may be given in either orientation; they are stored as ``(min, max)``.

    Raises
    ------
    TooSmall
        Empty edge list or fewer than two vertices.
    IndexOutOfRange, SelfLoop, DuplicateEdge, DisconnectedGraph
        On the corresponding invariant violation.
    """
    n = int(n)
    pairs = [tuple(int(v) for v in e) for e in edge_list]
    if n < 2 or not pairs:
        raise TooSmall(f"need at least 2 vertices and 1 edge, got n={n}, m={len(pairs)}")
    seen: set[tuple[int, int]] = set()
    for pair in pairs:
        if len(pair) != 2:
            raise GraphError(f"edge {pair!r} is not a pair")
        i, j = pair
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise SelfLoop(f"self-loop at vertex {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise DuplicateEdge(f"edge {key} listed twice")
        seen.add(key)
    edges = tuple(sorted(seen))
    if not _is_connected(n, edges):
        raise DisconnectedGraph(f"graph with n={n}, m={len(edges)} is not connected")
    return Graph(n, edges)


# -- generators --------------------------------------------------------------

def cycle(n: int) -> Graph:
    if n < 3:
        raise TooSmall("cycle needs n >= 3")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n: int) -> Graph:
    if n < 2:
        raise TooSmall("complete graph needs n >= 2")
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path(n: int) -> Graph:
    if n < 2:
        raise TooSmall("path needs n >= 2")
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def star(n: int) -> Graph:
    """Star on ``n`` vertices: vertex 0 joined to the other ``n - 1``."""
    if n < 2:
        raise TooSmall("star needs n >= 2")
    return build_graph(n, [(0, i) for i in range(1, n)])


def erdos_renyi(n: int, p: float, seed: int | None = None) -> Graph:
    """G(n, p) conditioned on connectivity by resampling.

    Deterministic for a given seed. Gives up after ``ER_MAX_RETRIES`` draws.
    """
    if n < 2:
        raise TooSmall("erdos_renyi needs n >= 2")
    if not 0.0 < p <= 1.0:
        raise GraphError(f"edge probability must lie in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(ER_MAX_RETRIES):
        keep = rng.random(iu.size) < p
        edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
        if edges and _is_connected(n, edges):
            return Graph(n, tuple(sorted(edges)))
    raise GenerationFailed(f"no connected G({n}, {p}) sample in {ER_MAX_RETRIES} tries")


def er_corpus(count: int = 30, n_min: int = 4, n_max: int = 10, seed: int = 42,
              p_range: tuple[float, float] = (0.25, 0.6)) -> list[Graph]:
    """Reproducible list of connected random graphs with varied size and density."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        p = float(rng.uniform(*p_range))
        out.append(erdos_renyi(n, p, int(rng.integers(2**31))))
    return out


def house() -> Graph:
    """4-cycle 0-1-2-3 with vertex 4 joined to 0 and 3 (a triangle roof)."""
    return build_graph(5, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (3, 4)])


def paw() -> Graph:
    """Triangle with one pendant vertex."""
    return build_graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)])


def bowtie() -> Graph:
    """Two triangles sharing vertex 2."""
    return build_graph(5, [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)])


def square_with_pendant() -> Graph:
    """4-cycle with one pendant vertex attached to vertex 0."""
    return build_graph(5, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4)])


def petersen() -> Graph:
    """Outer 5-cycle, inner pentagram, spokes ``i -- i + 5``."""
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return build_graph(10, outer + spokes + inner)


_FIXED = {
    "house": house,
    "petersen": petersen,
    "paw": paw,
    "bowtie": bowtie,
    "square_pendant": square_with_pendant,
}


def generate(kind: str, *args, **kwargs) -> Graph:
    """Dispatch by name: cycle, complete, path, star, erdos_renyi, or a fixed graph."""
    table = {
        "cycle": cycle,
        "complete": complete,
        "path": path,
        "star": star,
        "erdos_renyi": erdos_renyi,
        "er": erdos_renyi,
        **_FIXED,
    }
    try:
        fn = table[kind]
    except KeyError:
        raise GraphError(f"unknown graph kind {kind!r}; choose from {sorted(table)}") from None
    return fn(*args, **kwargs)


def from_spec(spec: str, seed: int | None = None) -> Graph:
    """Parse ``name:arg:arg`` (e.g. ``cycle:6``, ``er:10:0.4:1``) or an edge-list path."""
    if Path(spec).is_file():
        return read_edge_list(spec)
    name, *args = spec.split(":")
    try:
        if name in ("er", "erdos_renyi"):
            if len(args) not in (2, 3):
                raise GraphError("expected er:n:p[:seed]")
            s = int(args[2]) if len(args) == 3 else seed
            return erdos_renyi(int(args[0]), float(args[1]), s)
        if name in _FIXED:
            if args:
                raise GraphError(f"{name} takes no arguments")
            return _FIXED[name]()
        if len(args) != 1:
            raise GraphError(f"expected {name}:n")
        return generate(name, int(args[0]))
    except ValueError as exc:
        if isinstance(exc, GraphError):
            raise
        raise GraphError(f"cannot parse graph spec {spec!r}: {exc}") from exc


# -- edge-list text format -----------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    """Parse ``n m`` then ``m`` lines ``i j``; ``#`` starts a comment."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise GraphError("empty edge list")
    try:
        header = [int(t) for t in rows[0]]
        if len(header) != 2:
            raise GraphError("header must be 'n m'")
        n, m = header
        pairs = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise GraphError(f"malformed edge list: {exc}") from exc
    if len(pairs) != m:
        raise GraphError(f"header declares {m} edges, found {len(pairs)}")
    return build_graph(n, pairs)


def read_edge_list(path: str | Path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n_vertices} {g.n_edges}"]
    lines += [f"{i} {j}" for i, j in g.edges]
    return "\n".join(lines) + "\n"


# -- topology predicates -------------------------------------------------------

def biconnected_blocks(g: Graph) -> list[list[tuple[int, int]]]:
    """Edge sets of the biconnected components (iterative Hopcroft-Tarjan), each
    sorted in canonical ``(i, j)``, ``i < j`` form."""
    n = g.n_vertices
    disc = [-1] * n
    low = [0] * n
    blocks: list[list[tuple[int, int]]] = []
    edge_stack: list[tuple[int, int]] = []
    timer = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = timer
        timer += 1
        # frame: (vertex, parent, neighbor iterator)
        stack = [(root, -1, iter(g.adjacency[root]))]
        while stack:
            v, parent, it = stack[-1]
            advanced = False
            for w in it:
                if disc[w] < 0:
                    edge_stack.append((v, w))
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, v, iter(g.adjacency[w])))
                    advanced = True
                    break
                if w != parent and disc[w] < disc[v]:
                    edge_stack.append((v, w))
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if parent >= 0:
                low[parent] = min(low[parent], low[v])
                if low[v] >= disc[parent]:
                    block = []
                    while True:
                        e = edge_stack.pop()
                        block.append(e)
                        if e == (parent, v):
                            break
                    blocks.append(sorted((min(e), max(e)) for e in block))
    return blocks


def has_even_cycle(g: Graph) -> bool:
    """True iff ``g`` contains a simple cycle of even length.

    A block that is neither a bridge nor a cycle holds a theta subgraph, and
    two of a theta's three paths share parity, so it has an even cycle. A
    cycle block is even iff its length is.
    """
    for block in biconnected_blocks(g):
        n_edges = len(block)
        n_verts = len({v for e in block for v in e})
        if n_edges > n_verts:
            return True
        if n_edges == n_verts and n_edges % 2 == 0:
            return True
    return False


def one_minus_gamma_multiplicity(g: Graph) -> int:
    """Dimension of the 1 - gamma eigenspace of the reduced ADMM operator.

    Equals the nullity of the unsigned incidence matrix, ``m - n + b`` with
    ``b = 1`` for bipartite graphs. Positive whenever an even cycle exists,
    but also for odd-cycle cacti such as :func:`bowtie`.
    """
    b = 1 if g.is_bipartite() else 0
    return g.n_edges - g.n_vertices + b


def conductance(g: Graph, limit: int = CONDUCTANCE_LIMIT, side: str = "literal") -> Fraction:
    """Exact conductance by exhaustive search over vertex subsets.

    Minimizes cut(S) / vol(S) over nonempty proper subsets with
    ``vol(S) <= |V|`` (``side="literal"``) or ``vol(S) <= vol(V) / 2``
    (``side="half_volume"``, the textbook convention).
    """
    if side not in ("literal", "half_volume"):
        raise ValueError(f"side must be 'literal' or 'half_volume', got {side!r}")
    n = g.n_vertices
    if n > limit:
        raise TooLargeForExactConductance(
            f"exhaustive conductance limited to {limit} vertices (graph has {n}); "
            "skip the regime check or pass the conductance explicitly"
        )
    masks = np.arange(1, 2**n - 1, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    vol = bits @ np.asarray(g.degrees, dtype=np.int64)
    cut = np.zeros(masks.size, dtype=np.int64)
    for i, j in g.edges:
        cut += bits[:, i] ^ bits[:, j]
    feasible = vol <= n if side == "literal" else 2 * vol <= sum(g.degrees)
    ratio = np.where(feasible, cut / np.maximum(vol, 1), np.inf)
    k = int(np.argmin(ratio))
    return Fraction(int(cut[k]), int(vol[k]))


@dataclass(frozen=True)
class TopologyClass:
    has_even_cycle: bool
    conductance: Fraction | float
    low_conductance: bool
    delta_ratio: float
    # 1 - gamma eigenspace dimension; differs from has_even_cycle on odd cacti
    one_minus_gamma_multiplicity: int = 0

    @property
    def has_one_minus_gamma(self) -> bool:
        return self.one_minus_gamma_multiplicity > 0


def classify(g: Graph, conductance_override: Fraction | float | None = None) -> TopologyClass:
    phi = conductance(g) if conductance_override is None else conductance_override
    return TopologyClass(
        has_even_cycle=has_even_cycle(g),
        conductance=phi,
        low_conductance=phi <= Fraction(1, 2),
        delta_ratio=g.delta_ratio,
        one_minus_gamma_multiplicity=one_minus_gamma_multiplicity(g),
    )
