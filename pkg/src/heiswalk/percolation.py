"""Bond percolation and effective resistance on finite generator-edge boxes.

A BoxGraph holds the ball of a given radius (word metric on G_H, L1 on
Z^d) together with every directed generator edge between ball members.
Percolation keeps each edge with probability p, drawing one uniform per
(edge identity, seed) via a hash, so masks at different p or different
radii are monotonically coupled: raising p or shrinking the box never
closes an open edge.

Resistance treats each open edge as a unit resistor with orientation
ignored, and solves the Dirichlet problem between the origin and the
sphere of a chosen radius with diagonally preconditioned conjugate
gradients.  Disconnection is reported as infinite resistance, solver
non-convergence as SolverConvergenceError.

Transience of a ball sequence cannot be decided by any finite solve;
resistance_profile reports the honest finite surrogate (resistance to
growing shells under one coupled mask) and leaves the reading of the
increments to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import CapExceededError, ConfigError, SolverConvergenceError
from .heisenberg import DEFAULT_BALL_CAP, ball_with_distances
from .rng import edge_uniforms, stream

__all__ = [
    "BoxGraph",
    "SubgraphMask",
    "FlowAssignment",
    "ResistanceProfile",
    "heisenberg_box",
    "lattice_box",
    "build_custom_graph",
    "percolate",
    "percolate_box",
    "oriented_cluster",
    "effective_resistance",
    "resistance_profile",
    "path_flow_assignment",
    "path_flow_energy",
    "LATTICE_VERTEX_CAP",
]

LATTICE_VERTEX_CAP = 2_000_000

DIVERGENCE_TOL = 1e-9
SOLVER_RTOL = 1e-8


class BoxGraph:
    """Vertices of a ball plus the directed generator edges inside it.

    Vertices are coordinate tuples in a fixed canonical order (by
    distance, then coordinates), so every derived array is reproducible.
    Each edge carries a 64-bit key built from the tail coordinates and
    the generator label only; the key is independent of the box radius,
    which is what couples masks across nested boxes.
    """

    def __init__(self, family, radius, vertices, dist, edges, n_labels):
        self.family = family
        self.radius = radius
        self.vertices = tuple(vertices)
        self.index = {v: i for i, v in enumerate(self.vertices)}
        self.dist = np.asarray(dist, dtype=np.int32)
        self.n_labels = n_labels
        n = len(self.vertices)
        if edges:
            arr = np.asarray(edges, dtype=np.int64)
            self.tails = arr[:, 0].astype(np.int32)
            self.heads = arr[:, 1].astype(np.int32)
            self.labels = arr[:, 2].astype(np.uint8)
            self.keys = arr[:, 3].astype(np.uint64)
        else:
            self.tails = np.zeros(0, dtype=np.int32)
            self.heads = np.zeros(0, dtype=np.int32)
            self.labels = np.zeros(0, dtype=np.uint8)
            self.keys = np.zeros(0, dtype=np.uint64)
        # out_edge[v, label] = edge index or -1; each label leaves v at most once
        self.out_edge = np.full((n, n_labels), -1, dtype=np.int64)
        self.out_edge[self.tails, self.labels] = np.arange(len(self.tails))
        # undirected incidence in CSR form for connectivity and Laplacians
        ends = np.concatenate([self.tails, self.heads])
        other = np.concatenate([self.heads, self.tails])
        eid = np.concatenate([np.arange(len(self.tails))] * 2)
        order = np.argsort(ends, kind="stable")
        self._adj_vertex = other[order].astype(np.int32)
        self._adj_edge = eid[order].astype(np.int64)
        self._adj_ptr = np.searchsorted(ends[order], np.arange(n + 1))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def origin(self):
        """The unique distance-zero vertex."""
        return self.vertices[int(np.argmin(self.dist))]

    @property
    def n_edges(self) -> int:
        return len(self.tails)

    def neighbors(self, i: int):
        """(vertex, edge) pairs incident to i, orientation ignored."""
        lo, hi = self._adj_ptr[i], self._adj_ptr[i + 1]
        return self._adj_vertex[lo:hi], self._adj_edge[lo:hi]


def heisenberg_box(radius: int, cap: int = DEFAULT_BALL_CAP) -> BoxGraph:
    """Word-metric ball of G_H with its a- and b-edges (labels 0, 1)."""
    dist_map = ball_with_distances(radius, cap)
    vertices = sorted(dist_map, key=lambda g: (dist_map[g], g))
    index = {v: i for i, v in enumerate(vertices)}
    dist = [dist_map[v] for v in vertices]
    edges = []
    for i, (n, m, k) in enumerate(vertices):
        key_base = _pack_heis(n, m, k)
        for label, head in ((0, (n + 1, m, k - m)), (1, (n, m + 1, k))):
            j = index.get(head)
            if j is not None:
                edges.append((i, j, label, key_base | (label << 41)))
    return BoxGraph("heisenberg", radius, vertices, dist, edges, 2)


def _pack_heis(n: int, m: int, k: int) -> int:
    # 10+10+21 bits; ball coordinates stay far inside these ranges
    assert -512 <= n < 512 and -512 <= m < 512 and -(1 << 20) <= k < (1 << 20)
    return (n + 512) | ((m + 512) << 10) | ((k + (1 << 20)) << 20)


def lattice_box(d: int, radius: int) -> BoxGraph:
    """L1 ball of Z^d with its +e_i edges (label = axis index)."""
    if d < 1 or d > 4:
        raise ConfigError("lattice dimension must be in 1..4")
    if radius < 0:
        raise ConfigError("radius must be >= 0")
    size_bound = (2 * radius + 1) ** d
    if size_bound > 8 * LATTICE_VERTEX_CAP:
        raise CapExceededError(f"lattice box radius {radius} too large")
    from itertools import product

    vertices = []
    for v in product(range(-radius, radius + 1), repeat=d):
        dd = sum(abs(c) for c in v)
        if dd <= radius:
            vertices.append((dd, v))
    if len(vertices) > LATTICE_VERTEX_CAP:
        raise CapExceededError(f"lattice box has {len(vertices)} vertices")
    vertices.sort()
    dist = [dd for dd, _ in vertices]
    verts = [v for _, v in vertices]
    index = {v: i for i, v in enumerate(verts)}
    edges = []
    for i, v in enumerate(verts):
        key_base = _pack_lattice(v)
        for axis in range(d):
            head = v[:axis] + (v[axis] + 1,) + v[axis + 1 :]
            j = index.get(head)
            if j is not None:
                edges.append((i, j, axis, key_base | (axis << (12 * d))))
    return BoxGraph(f"z{d}", radius, verts, dist, edges, d)


def _pack_lattice(v: tuple) -> int:
    key = 0
    for pos, c in enumerate(v):
        assert -2048 <= c < 2048
        key |= (c + 2048) << (12 * pos)
    return key


def build_custom_graph(vertices, dist, directed_edges) -> BoxGraph:
    """Small hand-built network; edges are (tail, head, label) tuples.

    Used for circuit-algebra validation of the resistance solver.  Keys
    are hashes of (tail index, label), adequate since hand networks are
    never coupled across radii.
    """
    index = {v: i for i, v in enumerate(vertices)}
    edges = []
    n_labels = 1
    for tail, head, label in directed_edges:
        n_labels = max(n_labels, label + 1)
        edges.append((index[tail], index[head], label, (index[tail] << 8) | label))
    return BoxGraph("custom", max(dist), vertices, dist, edges, n_labels)


@dataclass(frozen=True)
class SubgraphMask:
    """Open-edge indicator over a BoxGraph, reproducible from (p, seed)."""

    graph: BoxGraph
    p: float
    seed: int
    open: np.ndarray

    @property
    def open_fraction(self) -> float:
        return float(self.open.mean()) if len(self.open) else 0.0


def percolate(graph: BoxGraph, p: float, seed: int) -> SubgraphMask:
    """Bernoulli(p) edge retention, coupled across p and radius by seed."""
    if not 0.0 < p <= 1.0:
        raise ConfigError(f"p must be in (0, 1], got {p}")
    u = edge_uniforms(graph.keys, seed)
    mask = u < p
    mask.flags.writeable = False
    return SubgraphMask(graph, p, seed, mask)


def percolate_box(family: str, radius: int, p: float, seed: int) -> SubgraphMask:
    """Build the ball graph for a named family and percolate it."""
    if family == "heisenberg":
        graph = heisenberg_box(radius)
    elif family.startswith("z") and family[1:].isdigit():
        graph = lattice_box(int(family[1:]), radius)
    else:
        raise ConfigError(f"unknown graph family {family!r}")
    return percolate(graph, p, seed)


def oriented_cluster(mask: SubgraphMask, v=None, max_dist: int | None = None) -> set:
    """Vertices reachable from v (default: origin) along open directed edges.

    max_dist restricts the search to the sub-ball of that radius, which
    is how one coupled mask serves a whole radius profile.
    """
    graph = mask.graph
    if v is None:
        v = graph.origin
    start = graph.index.get(tuple(v))
    if start is None:
        raise ConfigError(f"vertex {v!r} is outside the box")
    limit = graph.radius if max_dist is None else max_dist
    if graph.dist[start] > limit:
        raise ConfigError(f"vertex {v!r} is outside radius {limit}")
    seen = {start}
    stack = [start]
    out_edge = graph.out_edge
    heads = graph.heads
    dist = graph.dist
    is_open = mask.open
    while stack:
        i = stack.pop()
        for e in out_edge[i]:
            if e >= 0 and is_open[e]:
                j = heads[e]
                if j not in seen and dist[j] <= limit:
                    seen.add(int(j))
                    stack.append(int(j))
    return {graph.vertices[i] for i in seen}


def _component(mask: SubgraphMask, start: int, limit: int) -> np.ndarray:
    """Undirected open component of start within the radius limit."""
    graph = mask.graph
    seen = np.zeros(graph.n_vertices, dtype=bool)
    seen[start] = True
    stack = [start]
    is_open = mask.open
    dist = graph.dist
    while stack:
        i = stack.pop()
        nbr, eid = graph.neighbors(i)
        keep = is_open[eid] & ~seen[nbr] & (dist[nbr] <= limit)
        for j in nbr[keep]:
            seen[j] = True
            stack.append(int(j))
    return seen


def effective_resistance(mask: SubgraphMask, source=None, sink_radius: int | None = None) -> float:
    """Resistance between source and the sphere at sink_radius.

    Open edges inside the sub-ball of that radius are unit resistors,
    orientation ignored.  Potentials solve the Dirichlet problem
    (1 at source, 0 on the whole sphere); the result is 1 over the
    current leaving the source.  Infinite when no open path reaches the
    sphere; SolverConvergenceError if CG stalls within its iteration cap.
    """
    graph = mask.graph
    if source is None:
        source = graph.origin
    r = graph.radius if sink_radius is None else sink_radius
    if not 1 <= r <= graph.radius:
        raise ConfigError(f"sink_radius must be in [1, {graph.radius}]")
    src = graph.index.get(tuple(source))
    if src is None or graph.dist[src] >= r:
        raise ConfigError("source must lie strictly inside the sink sphere")
    comp = _component(mask, src, r)
    shell = comp & (graph.dist == r)
    if not shell.any():
        return float("inf")

    # restrict to the source component; ground the shell
    tails, heads = graph.tails, graph.heads
    keep = mask.open & comp[tails] & comp[heads] & (graph.dist[tails] <= r) & (graph.dist[heads] <= r)
    t, h = tails[keep], heads[keep]

    role = np.zeros(graph.n_vertices, dtype=np.int8)  # 1 source, 2 ground
    role[src] = 1
    role[shell] = 2
    free = comp & (role == 0) & (graph.dist <= r)
    col = np.cumsum(free) - 1  # free-vertex numbering

    inner = free[t] & free[h]
    n_free = int(free.sum())
    b = np.zeros(n_free)
    # edges touching the source push unit potential into the system
    for a_end, b_end in ((t, h), (h, t)):
        sel = (role[a_end] == 1) & free[b_end]
        np.add.at(b, col[b_end[sel]], 1.0)
    if n_free:
        ti, hi = col[t[inner]], col[h[inner]]
        deg = np.zeros(n_free)
        np.add.at(deg, col[t[free[t]]], 1.0)
        np.add.at(deg, col[h[free[h]]], 1.0)
        lap = scipy.sparse.coo_matrix(
            (
                np.concatenate([deg, -np.ones(len(ti)), -np.ones(len(ti))]),
                (
                    np.concatenate([np.arange(n_free), ti, hi]),
                    np.concatenate([np.arange(n_free), hi, ti]),
                ),
            ),
            shape=(n_free, n_free),
        ).tocsr()
        phi = _solve_spd(lap, b, graph.n_vertices)
    else:
        phi = np.zeros(0)

    potential = np.zeros(graph.n_vertices)
    potential[src] = 1.0
    potential[free] = phi
    at_src = (role[t] == 1) | (role[h] == 1)
    other = np.where(role[t[at_src]] == 1, h[at_src], t[at_src])
    current = float(np.sum(1.0 - potential[other]))
    if current <= 0:
        return float("inf")
    return 1.0 / current


def _solve_spd(lap, b, n_vertices: int) -> np.ndarray:
    maxiter = max(20, int(50 * math.sqrt(n_vertices)))
    diag = lap.diagonal()
    precond = scipy.sparse.diags(1.0 / np.where(diag > 0, diag, 1.0))
    try:
        phi, info = scipy.sparse.linalg.cg(lap, b, rtol=SOLVER_RTOL, maxiter=maxiter, M=precond)
    except TypeError:  # older scipy spells the tolerance differently
        phi, info = scipy.sparse.linalg.cg(lap, b, tol=SOLVER_RTOL, maxiter=maxiter, M=precond)
    if info != 0:
        raise SolverConvergenceError(f"conjugate gradient stopped with status {info}")
    return phi


@dataclass(frozen=True)
class ResistanceProfile:
    """(radius, resistance, oriented-cluster size) per radius, one mask.

    cluster_size counts the open oriented cluster of the origin inside
    each sub-ball; resistance ignores orientation.  For averaged
    profiles the per-seed profiles ride along in per_seed.
    """

    entries: tuple
    per_seed: tuple = ()

    def radii(self):
        return [e[0] for e in self.entries]

    def resistances(self):
        return [e[1] for e in self.entries]

    def increments(self):
        res = self.resistances()
        return [b - a for a, b in zip(res, res[1:])]


def resistance_profile(graph: BoxGraph, p: float, radii, seeds) -> ResistanceProfile:
    """Origin-to-sphere resistance at each radius, averaged over seeds.

    One mask per seed is drawn on the full graph and restricted to each
    sub-ball, so entries within a seed are nested (resistance
    nondecreasing in radius) and entries across p values are coupled.
    """
    radii = list(radii)
    if radii != sorted(radii) or len(set(radii)) != len(radii):
        raise ConfigError("radii must be strictly increasing")
    if not radii or radii[-1] > graph.radius:
        raise ConfigError("radii must be nonempty and within the graph radius")
    per_seed = []
    for seed in seeds:
        mask = percolate(graph, p, seed)
        entries = []
        for r in radii:
            res = effective_resistance(mask, None, r)
            csize = len(oriented_cluster(mask, None, max_dist=r))
            entries.append((r, res, csize))
        per_seed.append(ResistanceProfile(tuple(entries)))
    averaged = tuple(
        (
            r,
            float(np.mean([prof.entries[i][1] for prof in per_seed])),
            float(np.mean([prof.entries[i][2] for prof in per_seed])),
        )
        for i, r in enumerate(radii)
    )
    return ResistanceProfile(averaged, tuple(per_seed))


@dataclass(frozen=True)
class FlowAssignment:
    """Unit flow from source to the sink set, signed along edge orientation.

    surviving records how many sampled paths were averaged when the flow
    came from path_flow_assignment; hand-built flows may leave it at 1.
    """

    graph: BoxGraph
    flow: np.ndarray
    source: tuple
    sinks: frozenset
    surviving: int = 1

    def energy(self) -> float:
        return float(np.sum(self.flow**2))

    def max_divergence(self) -> float:
        """Largest net outflow over vertices that are neither source nor sink."""
        net = np.zeros(self.graph.n_vertices)
        np.add.at(net, self.graph.tails, self.flow)
        np.add.at(net, self.graph.heads, -self.flow)
        skip = {self.graph.index[self.source]} | {self.graph.index[s] for s in self.sinks}
        keep = np.ones(self.graph.n_vertices, dtype=bool)
        keep[list(skip)] = False
        return float(np.abs(net[keep]).max()) if keep.any() else 0.0

    def source_outflow(self) -> float:
        net = np.zeros(self.graph.n_vertices)
        np.add.at(net, self.graph.tails, self.flow)
        np.add.at(net, self.graph.heads, -self.flow)
        return float(net[self.graph.index[self.source]])


def path_flow_assignment(
    graph: BoxGraph, mask: SubgraphMask, num_paths: int, seed: int
) -> FlowAssignment | None:
    """Average of surviving oriented-path unit flows, truncated at the shell.

    Words are drawn uniformly (fair a/b letters); a word survives when
    its first `radius` edges are all open, which is the entire portion
    inside the box since an oriented prefix of length t sits at distance
    exactly t.  None when no word survives.
    """
    if num_paths < 1:
        raise ConfigError("num_paths must be positive")
    r = graph.radius
    rng = stream(seed, 0)
    words = rng.integers(0, 2, size=(num_paths, max(2 * r, 1)), dtype=np.uint8)
    counts = np.zeros(graph.n_edges)
    surviving = 0
    sinks = set()
    origin = graph.index[tuple(graph.origin)]
    for w in words:
        edge_ids = []
        i = origin
        ok = True
        for t in range(r):
            e = graph.out_edge[i, w[t]]
            if e < 0 or not mask.open[e]:
                ok = False
                break
            edge_ids.append(e)
            i = graph.heads[e]
        if ok:
            surviving += 1
            counts[edge_ids] += 1.0
            sinks.add(graph.vertices[i])
    if surviving == 0:
        return None
    flow = counts / surviving
    flow.flags.writeable = False
    return FlowAssignment(graph, flow, tuple(graph.origin), frozenset(sinks), surviving)


def path_flow_energy(
    p: float, num_paths: int, radius: int, seed: int, graph: BoxGraph | None = None
) -> tuple[float, int]:
    """Energy of the averaged surviving-path flow; (inf, 0) if none survive.

    The flow is feasible for the source-to-sphere problem, so by the
    Thomson principle its energy upper-bounds effective_resistance on
    the same mask.
    """
    if graph is None:
        graph = heisenberg_box(radius)
    elif graph.radius != radius:
        raise ConfigError("graph radius does not match requested radius")
    mask = percolate(graph, p, seed)
    assignment = path_flow_assignment(graph, mask, num_paths, seed)
    if assignment is None:
        return float("inf"), 0
    return assignment.energy(), assignment.surviving
