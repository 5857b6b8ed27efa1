from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.filters.edge_variant import broadcast_blocks, sum_blocks
from evgraph.filters.base import (
    FilterBank,
    adjoint_powers,
    check_grad_shape,
    power_states,
    promote,
    uniform_init,
)
from evgraph.filters.selection import PrivilegedSet
from evgraph.sparse import CSR


def privileged_support(graph, privileged):
    """Pattern of ``S + I`` restricted to rows of privileged nodes."""
    full = graph.support_with_diag
    keep = np.isin(full.row_ids, privileged.nodes)
    return CSR.from_coo(full.row_ids[keep], full.indices[keep], np.ones(keep.sum()), full.shape)


@dataclass(frozen=True, eq=False)
class HEVParams(FilterBank):
    """Hybrid filter ``sum_{k=0}^K (Phi_B^(k) ... Phi_B^(0) + phi_k S^k)``.

    ``diag0`` holds the diagonal of ``Phi_B^(0)`` at the privileged nodes,
    ``edge_coeffs[k-1]`` the values of ``Phi_B^(k)`` on ``edge_pattern``
    (privileged rows only) and ``global_taps`` the polynomial taps.
    """

    privileged: PrivilegedSet
    edge_pattern: CSR
    diag0: np.ndarray
    edge_coeffs: np.ndarray
    global_taps: np.ndarray

    family = "hybrid-ev"
    _learnable = ("global_taps", "diag0", "edge_coeffs")

    def __post_init__(self):
        diag0 = promote(self.diag0, 1, "diag0")
        edge = promote(self.edge_coeffs, 2, "edge_coeffs")
        taps = promote(self.global_taps, 1, "global_taps")
        if diag0.shape[0] != len(self.privileged):
            raise InvalidArgument("diag0 must have one entry per privileged node")
        if edge.shape[1] != self.edge_pattern.nnz:
            raise InvalidArgument("edge coefficients do not match the privileged support")
        if edge.shape[0] != taps.shape[0] - 1:
            raise InvalidArgument(f"order mismatch: {edge.shape[0]} edge matrices vs {taps.shape[0]} global taps")
        rows_ok = np.isin(self.edge_pattern.row_ids, self.privileged.nodes)
        if not rows_ok.all():
            raise InvalidArgument("edge pattern has entries outside privileged rows")
        object.__setattr__(self, "diag0", diag0)
        object.__setattr__(self, "edge_coeffs", edge)
        object.__setattr__(self, "global_taps", taps)

    @property
    def order(self):
        return self.global_taps.shape[0] - 1

    @property
    def feature_shape(self):
        return self.global_taps.shape[-2:]

    def max_privileged_degree(self, graph):
        return int(max(graph.degrees[self.privileged.nodes]))

    @classmethod
    def init(cls, graph, privileged, order, out_features, in_features, rng):
        pattern = privileged_support(graph, privileged)
        row_fan = pattern.nnz / len(privileged)
        feat = (out_features, in_features)
        return cls(
            privileged,
            pattern,
            uniform_init(rng, (len(privileged),) + feat, in_features),
            uniform_init(rng, (order, pattern.nnz) + feat, row_fan * in_features),
            uniform_init(rng, (order + 1,) + feat, (order + 1) * in_features),
        )

    @classmethod
    def from_matrices(cls, graph, privileged, diag0, matrices, global_taps):
        """Dense constructor used by tests; validates the support constraints."""
        pattern = privileged_support(graph, privileged)
        diag0 = np.asarray(diag0, dtype=float)
        off = np.setdiff1d(np.arange(graph.num_nodes), privileged.nodes)
        if diag0.ndim == 2:
            if np.any(diag0 - np.diag(np.diag(diag0)) != 0):
                raise InvalidArgument("Phi_B^(0) must be diagonal")
            diag0 = np.diag(diag0)
        if np.any(diag0[off] != 0):
            raise InvalidArgument("Phi_B^(0) has nonzeros outside the privileged set")
        allowed = pattern.to_dense() != 0
        coeffs = []
        for k, m in enumerate(matrices, start=1):
            m = np.asarray(m, dtype=float)
            if np.any(m[~allowed] != 0):
                raise InvalidArgument(f"Phi_B^({k}) violates the privileged-row support")
            coeffs.append(m[pattern.row_ids, pattern.indices])
        coeffs = np.array(coeffs).reshape(len(coeffs), pattern.nnz)
        return cls(privileged, pattern, diag0[privileged.nodes], coeffs, global_taps)

    def _flat(self, k):
        return self.edge_coeffs[k].reshape(self.edge_pattern.nnz, -1)

    def forward(self, z, graph, spectrum=None):
        nodes = self.privileged.nodes
        n, fi, b = z.shape
        fo = self.out_features
        powers = power_states(graph, z, self.order)
        y = np.einsum("koi,knib->nob", self.global_taps, powers)
        head = np.zeros((fo, fi, n, b))
        head[:, :, nodes, :] = np.einsum("coi,cib->oicb", self.diag0, z[nodes])
        chains = [head.reshape(fo * fi, n, b)]
        for k in range(self.order):
            chains.append(self.edge_pattern.block_matmul(self._flat(k), chains[-1]))
        y = y + sum_blocks(np.sum(chains, axis=0), fo, fi)
        return y, (z, powers, chains, y.shape)

    def backward(self, cache, grad, graph, spectrum=None):
        z, powers, chains, y_shape = cache
        grad = check_grad_shape(grad, y_shape)
        nodes = self.privileged.nodes
        fo, fi = self.feature_shape
        d_taps = np.einsum("nob,knib->koi", grad, powers)
        dz = adjoint_powers(graph, np.einsum("koi,nob->knib", self.global_taps, grad))

        g = broadcast_blocks(np.transpose(grad, (1, 0, 2))[:, None], fo, fi)
        adj = g
        d_edge = np.empty_like(self.edge_coeffs)
        for k in range(self.order - 1, -1, -1):
            d_edge[k] = self.edge_pattern.block_edge_products(adj, chains[k]).reshape(self.edge_coeffs[k].shape)
            adj = g + self.edge_pattern.block_rmatmul(self._flat(k), adj)
        head_adj = adj.reshape((fo, fi) + adj.shape[1:])[:, :, nodes, :]
        d_diag0 = np.einsum("oicb,cib->coi", head_adj, z[nodes])
        dz[nodes] += np.einsum("coi,oicb->cib", self.diag0, head_adj)
        return {"global_taps": d_taps, "diag0": d_diag0, "edge_coeffs": d_edge}, dz
