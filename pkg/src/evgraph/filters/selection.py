"""Privileged-node sets for the node-variant and hybrid families."""

from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument

STRATEGIES = ("max-degree", "spectral-proxies")


@dataclass(frozen=True, eq=False)
class PrivilegedSet:
    """Sorted privileged nodes plus, for every node, the position in ``nodes`` it copies taps from."""

    nodes: np.ndarray
    assignment: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.int64)
        assignment = np.asarray(self.assignment, dtype=np.int64)
        if nodes.ndim != 1 or len(nodes) < 1:
            raise InvalidArgument("privileged set must contain at least one node")
        if np.any(np.diff(nodes) <= 0):
            raise InvalidArgument("privileged nodes must be sorted and distinct")
        if nodes.min() < 0 or nodes.max() >= len(assignment):
            raise InvalidArgument("privileged node index out of range")
        if assignment.min() < 0 or assignment.max() >= len(nodes):
            raise InvalidArgument("assignment references a non-privileged index")
        if np.any(assignment[nodes] != np.arange(len(nodes))):
            raise InvalidArgument("every privileged node must be assigned to itself")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "assignment", assignment)

    def __len__(self):
        return len(self.nodes)

    def selection_matrix(self):
        """Binary ``N x |B|`` matrix ``C_B``."""
        c = np.zeros((len(self.assignment), len(self.nodes)))
        c[np.arange(len(self.assignment)), self.assignment] = 1.0
        return c

    @classmethod
    def for_nodes(cls, graph, nodes):
        nodes = np.array(sorted(set(int(n) for n in nodes)), dtype=np.int64)
        return cls(nodes, nearest_assignment(graph, nodes))


def nearest_assignment(graph, nodes):
    """Map each node to its nearest privileged node by hop count, ties to the lowest index.

    Nodes that reach no privileged node fall back to the first one.
    """
    dist = np.stack([graph.hop_distances([int(n)]) for n in nodes])
    dist = np.where(dist < 0, np.iinfo(np.int64).max, dist)
    return np.argmin(dist, axis=0)


def select_max_degree(graph, size):
    degree = graph.degrees
    order = np.lexsort((np.arange(graph.num_nodes), -degree))
    return np.sort(order[:size])


def select_spectral_proxies(graph, size, seed, order=2, iterations=50, tol=1e-6):
    """Greedy sampling by the order-``order`` spectral proxy.

    At each step the smallest eigenvector of ``((S^T)^k S^k)`` restricted to
    the unselected nodes is estimated by shifted power iteration and the node
    with the largest squared component joins the set.
    """
    rng = np.random.default_rng(seed)
    s = graph.to_dense()
    sk = np.linalg.matrix_power(s, order)
    gram = sk.T @ sk
    chosen = []
    remaining = list(range(graph.num_nodes))
    for _ in range(size):
        sub = gram[np.ix_(remaining, remaining)]
        shift = np.max(np.sum(np.abs(sub), axis=1)) if sub.size else 0.0
        flipped = shift * np.eye(len(remaining)) - sub
        v = rng.standard_normal(len(remaining))
        v /= np.linalg.norm(v)
        for _ in range(iterations):
            nxt = flipped @ v
            norm = np.linalg.norm(nxt)
            if norm == 0:
                break
            nxt /= norm
            done = np.linalg.norm(nxt - v) < tol
            v = nxt
            if done:
                break
        pick = int(np.argmax(v * v))
        chosen.append(remaining.pop(pick))
    return np.sort(np.array(chosen, dtype=np.int64))


def select_privileged(graph, strategy, size, seed=0):
    if not 1 <= size <= graph.num_nodes:
        raise InvalidArgument(f"privileged set size {size} outside 1..{graph.num_nodes}")
    if strategy == "max-degree":
        nodes = select_max_degree(graph, size)
    elif strategy == "spectral-proxies":
        nodes = select_spectral_proxies(graph, size, seed)
    else:
        raise InvalidArgument(f"unknown selection strategy {strategy!r}; expected one of {STRATEGIES}")
    return PrivilegedSet.for_nodes(graph, nodes)
