from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.filters.base import (
    FilterBank,
    adjoint_powers,
    check_grad_shape,
    power_states,
    promote,
    uniform_init,
)
from evgraph.filters.selection import PrivilegedSet


@dataclass(frozen=True, eq=False)
class NVParams(FilterBank):
    """``H(S) = sum_k diag(C_B phi_B^(k)) S^k``; taps shape ``(K+1, |B|, F_out, F_in)``.

    Node ``i`` uses the taps of privileged node ``privileged.assignment[i]``.
    """

    privileged: PrivilegedSet
    taps: np.ndarray

    family = "node-variant"
    _learnable = ("taps",)

    def __post_init__(self):
        taps = promote(self.taps, 2, "taps")
        if taps.shape[1] != len(self.privileged.nodes):
            raise InvalidArgument(f"taps cover {taps.shape[1]} privileged nodes, set has {len(self.privileged.nodes)}")
        object.__setattr__(self, "taps", taps)

    @property
    def order(self):
        return self.taps.shape[0] - 1

    @classmethod
    def init(cls, privileged, order, out_features, in_features, rng):
        shape = (order + 1, len(privileged.nodes), out_features, in_features)
        return cls(privileged, uniform_init(rng, shape, (order + 1) * in_features))

    def node_taps(self):
        """Per-node taps ``(K+1, N, F_out, F_in)``."""
        return self.taps[:, self.privileged.assignment]

    def forward(self, z, graph, spectrum=None):
        if len(self.privileged.assignment) != z.shape[0]:
            raise InvalidArgument("privileged assignment does not cover every node")
        states = power_states(graph, z, self.order)
        y = np.einsum("knoi,knib->nob", self.node_taps(), states)
        return y, (states, y.shape)

    def backward(self, cache, grad, graph, spectrum=None):
        states, y_shape = cache
        grad = check_grad_shape(grad, y_shape)
        d_node = np.einsum("nob,knib->knoi", grad, states)
        d_taps = np.einsum("nc,knoi->kcoi", self.privileged.selection_matrix(), d_node)
        per_order = np.einsum("knoi,nob->knib", self.node_taps(), grad)
        return {"taps": d_taps}, adjoint_powers(graph, per_order)
