"""Graph container, SBM generator, spectral-radius normalization and edge-list I/O.

Nodes are 0-indexed in memory; the edge-list text format is 1-indexed.
"""

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from evgraph.errors import InvalidArgument, UnsupportedGraph
from evgraph.sparse import CSR


@dataclass(frozen=True, eq=False)
class Graph:
    """Sparsity structure and shift-operator values of a graph.

    ``shift[i, j] != 0`` encodes the directed edge ``(j, i)``: node ``i``
    listens to node ``j``. Undirected graphs store both ordered copies.
    """

    shift: CSR
    directed: bool = False
    raw_weights: CSR | None = field(default=None)

    def __post_init__(self):
        n, m = self.shift.shape
        if n != m or n < 1:
            raise InvalidArgument(f"shift must be square and non-empty, got {self.shift.shape}")
        if not self.directed and not _is_symmetric(self.shift):
            raise InvalidArgument("undirected graph requires a symmetric shift operator")

    @classmethod
    def from_dense(cls, shift, directed=None, raw_weights=None):
        shift = np.asarray(shift, dtype=float)
        if directed is None:
            directed = not np.array_equal(shift, shift.T)
        raw = None if raw_weights is None else CSR.from_dense(raw_weights)
        return cls(CSR.from_dense(shift), directed=directed, raw_weights=raw)

    @property
    def num_nodes(self):
        return self.shift.shape[0]

    @cached_property
    def num_directed_edges(self):
        return int(np.count_nonzero(self.shift.row_ids != self.shift.indices))

    @cached_property
    def support_with_diag(self):
        """Pattern of ``S + I`` as a :class:`CSR` of ones."""
        return _with_diagonal(self.shift)

    @cached_property
    def off_diagonal_support(self):
        """Pattern of ``S`` without its diagonal, as a :class:`CSR` of ones."""
        keep = self.shift.row_ids != self.shift.indices
        return CSR.from_coo(
            self.shift.row_ids[keep], self.shift.indices[keep], np.ones(keep.sum()), self.shift.shape
        )

    @cached_property
    def neighborhoods(self):
        """``neighborhoods[i]`` = sorted in-neighbours of ``i`` (self excluded)."""
        s = self.shift
        out = []
        for i in range(self.num_nodes):
            cols = s.indices[s.indptr[i]:s.indptr[i + 1]]
            out.append(cols[cols != i])
        return out

    @cached_property
    def degrees(self):
        return np.array([len(nb) for nb in self.neighborhoods])

    @cached_property
    def spectral_radius(self):
        """Largest absolute eigenvalue of a symmetric shift (dense Jacobi)."""
        from evgraph.spectral import eigendecompose

        lam = eigendecompose(self).eigenvalues
        return float(max(abs(lam[0]), abs(lam[-1])))

    def to_dense(self):
        return self.shift.to_dense()

    @property
    def is_symmetric(self):
        return _is_symmetric(self.shift)

    def hop_distances(self, sources):
        """Unweighted BFS distance from the nearest of ``sources`` (``-1`` if unreachable).

        Edges are followed in both directions.
        """
        adj = [set() for _ in range(self.num_nodes)]
        for i, nb in enumerate(self.neighborhoods):
            for j in nb.tolist():
                adj[i].add(j)
                adj[j].add(i)
        dist = np.full(self.num_nodes, -1, dtype=np.int64)
        queue = deque()
        for s in sources:
            dist[s] = 0
            queue.append(s)
        while queue:
            u = queue.popleft()
            for v in sorted(adj[u]):
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    def is_connected(self):
        return bool(np.all(self.hop_distances([0]) >= 0))


def _is_symmetric(a: CSR) -> bool:
    t = a.transpose()
    return a.pattern_equals(t) and np.array_equal(a.data, t.data)


def _with_diagonal(a: CSR) -> CSR:
    n = a.shape[0]
    rows = np.concatenate((a.row_ids, np.arange(n)))
    cols = np.concatenate((a.indices, np.arange(n)))
    flat = np.unique(rows * n + cols)
    return CSR.from_coo(flat // n, flat % n, np.ones(len(flat)), a.shape)


def build_sbm(num_nodes, num_communities, p_intra, p_inter, seed):
    """Undirected unweighted stochastic block model with contiguous communities.

    Node ``i`` belongs to community ``i // (num_nodes // num_communities)``.
    Each unordered pair is drawn once; the graph is not resampled when it
    comes out disconnected.
    """
    if num_communities < 1 or num_nodes < 1 or num_nodes % num_communities:
        raise InvalidArgument(
            f"num_nodes={num_nodes} is not divisible by num_communities={num_communities}"
        )
    for name, p in (("p_intra", p_intra), ("p_inter", p_inter)):
        if not 0.0 <= p <= 1.0:
            raise InvalidArgument(f"{name}={p} is not a probability")
    rng = np.random.default_rng(seed)
    block = num_nodes // num_communities
    community = np.arange(num_nodes) // block
    iu, ju = np.triu_indices(num_nodes, k=1)
    prob = np.where(community[iu] == community[ju], p_intra, p_inter)
    keep = rng.random(len(iu)) < prob
    rows = np.concatenate((iu[keep], ju[keep]))
    cols = np.concatenate((ju[keep], iu[keep]))
    adjacency = CSR.from_coo(rows, cols, np.ones(len(rows)), (num_nodes, num_nodes))
    return Graph(adjacency, directed=False, raw_weights=adjacency)


def community_of(num_nodes, num_communities):
    """0-indexed community id of every node under the contiguous-block convention."""
    return np.arange(num_nodes) // (num_nodes // num_communities)


def normalize_by_spectral_radius(g: Graph) -> Graph:
    """Return a graph whose shift is ``W / lambda_max(W)``."""
    from evgraph.spectral import eigendecompose

    if g.directed:
        raise UnsupportedGraph("spectral-radius normalization needs an undirected graph")
    weights = g.raw_weights if g.raw_weights is not None else g.shift
    if weights.nnz == 0 or not np.any(weights.data):
        raise InvalidArgument("cannot normalize the zero matrix (lambda_max = 0)")
    lam_max = eigendecompose(Graph(weights, directed=False)).eigenvalues[-1]
    if lam_max <= 0:
        raise InvalidArgument(f"largest eigenvalue is {lam_max}, cannot normalize")
    return Graph(weights.with_data(weights.data / lam_max), directed=False, raw_weights=weights)


# -- edge-list text format -----------------------------------------------------
def write_edge_list(g: Graph, path):
    """Header ``N M directed|undirected`` then one 1-indexed ``i j w`` per stored entry."""
    s = g.shift
    lines = [f"{g.num_nodes} {g.num_directed_edges} {'directed' if g.directed else 'undirected'}"]
    for i, j, w in zip(s.row_ids.tolist(), s.indices.tolist(), s.data.tolist()):
        lines.append(f"{i + 1} {j + 1} {w!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> Graph:
    text = Path(path).read_text().split("\n")
    rows = [ln.split() for ln in text if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 3 or rows[0][2] not in ("directed", "undirected"):
        raise InvalidArgument(f"{path}: header must be 'N M directed|undirected'")
    n, m, kind = int(rows[0][0]), int(rows[0][1]), rows[0][2]
    triples = rows[1:]
    if any(len(t) != 3 for t in triples):
        raise InvalidArgument(f"{path}: every edge line needs exactly 'i j w'")
    i = np.array([int(t[0]) - 1 for t in triples], dtype=np.int64)
    j = np.array([int(t[1]) - 1 for t in triples], dtype=np.int64)
    w = np.array([float(t[2]) for t in triples])
    if len(i) and (min(i.min(), j.min()) < 0 or max(i.max(), j.max()) >= n):
        raise InvalidArgument(f"{path}: node index out of range 1..{n}")
    shift = CSR.from_coo(i, j, w, (n, n))
    g = Graph(shift, directed=(kind == "directed"))
    if g.num_directed_edges != m:
        raise InvalidArgument(f"{path}: header says M={m} but found {g.num_directed_edges} off-diagonal entries")
    return g


def write_dense_csv(matrix, path):
    """Row-major CSV with a ``rows,cols`` header line."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = [f"{matrix.shape[0]},{matrix.shape[1]}"]
    lines += [",".join(repr(float(v)) for v in row) for row in matrix]
    Path(path).write_text("\n".join(lines) + "\n")


def read_dense_csv(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    rows, cols = (int(v) for v in lines[0].split(","))
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
    if rows == 0:
        data = data.reshape(0, cols)
    if data.shape != (rows, cols):
        raise InvalidArgument(f"{path}: header says {rows}x{cols}, body is {data.shape}")
    return data


def shift_apply(g: Graph, x):
    """``S @ x`` by sparse row traversal; ``x`` is ``(N,)`` or ``(N, F, ...)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[:1] != (g.num_nodes,):
        raise InvalidArgument(f"signal has {x.shape[0] if x.ndim else 0} rows, graph has {g.num_nodes} nodes")
    return g.shift.matmul(x)
