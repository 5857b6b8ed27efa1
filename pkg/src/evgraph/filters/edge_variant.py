from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.filters.base import FilterBank, check_grad_shape, promote, uniform_init
from evgraph.sparse import CSR


@dataclass(frozen=True, eq=False)
class EVParams(FilterBank):
    """Edge-variant recursion ``H = sum_{k=1}^K Phi^(k) ... Phi^(1)``.

    ``coeffs[k-1]`` holds the stored values of ``Phi^(k)`` on ``pattern``,
    which is the support of ``S + I`` (or of ``S`` off the diagonal when
    self-loops are disabled). Shape ``(K, nnz, F_out, F_in)``.
    """

    pattern: CSR
    coeffs: np.ndarray
    use_self_loops: bool = True

    family = "edge-variant"
    _learnable = ("coeffs",)

    def __post_init__(self):
        coeffs = promote(self.coeffs, 2, "coeffs")
        if coeffs.shape[0] < 1:
            raise InvalidArgument("edge-variant filter needs order K >= 1")
        if coeffs.shape[1] != self.pattern.nnz:
            raise InvalidArgument(
                f"coefficient matrices hold {coeffs.shape[1]} entries, support has {self.pattern.nnz}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self):
        return self.coeffs.shape[0]

    @staticmethod
    def support_for(graph, use_self_loops=True):
        return graph.support_with_diag if use_self_loops else graph.off_diagonal_support

    @classmethod
    def init(cls, graph, order, out_features, in_features, rng, use_self_loops=True):
        pattern = cls.support_for(graph, use_self_loops)
        fan = max(pattern.nnz / graph.num_nodes, 1.0) * in_features
        coeffs = uniform_init(rng, (order, pattern.nnz, out_features, in_features), fan)
        return cls(pattern, coeffs, use_self_loops)

    @classmethod
    def from_matrices(cls, graph, matrices, use_self_loops=True):
        """Build from dense ``N x N`` matrices; entries outside the support must be zero."""
        pattern = cls.support_for(graph, use_self_loops)
        allowed = pattern.to_dense() != 0
        coeffs = []
        for k, m in enumerate(matrices, start=1):
            m = np.asarray(m, dtype=float)
            if np.any(m[~allowed] != 0):
                raise InvalidArgument(f"Phi^({k}) has nonzeros outside the filter support")
            coeffs.append(m[pattern.row_ids, pattern.indices])
        return cls(pattern, np.array(coeffs), use_self_loops)

    def matrices(self, out_feature=0, in_feature=0):
        return [self.pattern.to_dense(c[:, out_feature, in_feature]) for c in self.coeffs]

    def _flat(self, k):
        return self.coeffs[k].reshape(self.pattern.nnz, -1)

    def forward(self, z, graph=None, spectrum=None):
        if z.shape[0] != self.pattern.shape[1]:
            raise InvalidArgument(f"signal has {z.shape[0]} rows, filter support has {self.pattern.shape[1]}")
        n, fi, b = z.shape
        fo = self.out_features
        # one block per (out, in) feature pair, each carrying an (N, B) state
        w = broadcast_blocks(np.transpose(z, (1, 0, 2))[None], fo, fi)
        x0 = w
        states = []
        for k in range(self.order):
            w = self.pattern.block_matmul(self._flat(k), w)
            states.append(w)
        y = sum_blocks(np.sum(states, axis=0), fo, fi)
        return y, (x0, states, y.shape)

    def backward(self, cache, grad, graph=None, spectrum=None):
        x0, states, y_shape = cache
        grad = check_grad_shape(grad, y_shape)
        fo, fi = self.feature_shape
        g = broadcast_blocks(np.transpose(grad, (1, 0, 2))[:, None], fo, fi)
        d_coeffs = np.empty_like(self.coeffs)
        adj = g
        for k in range(self.order - 1, -1, -1):
            prev = states[k - 1] if k > 0 else x0
            d_coeffs[k] = self.pattern.block_edge_products(adj, prev).reshape(self.coeffs[k].shape)
            back = self.pattern.block_rmatmul(self._flat(k), adj)
            adj = g + back if k > 0 else back
        dz = adj.reshape((fo, fi) + adj.shape[1:]).sum(axis=0)
        return {"coeffs": d_coeffs}, np.transpose(dz, (1, 0, 2))


def broadcast_blocks(arr, fo, fi):
    """Broadcast ``(fo|1, fi|1, N, B)`` to a contiguous ``(fo * fi, N, B)`` block stack."""
    full = np.broadcast_to(arr, (fo, fi) + arr.shape[2:])
    return np.ascontiguousarray(full).reshape((fo * fi,) + arr.shape[2:])


def sum_blocks(blocks, fo, fi):
    """``(fo * fi, N, B)`` -> ``(N, fo, B)`` summing over input features."""
    out = blocks.reshape((fo, fi) + blocks.shape[1:]).sum(axis=1)
    return np.transpose(out, (1, 0, 2))


def ev_from_poly(poly, graph, tol=1e-10):
    """Edge-variant realization of a polynomial filter.

    ``Phi^(1) = phi_0 I + phi_1 S`` and ``Phi^(k) = (phi_k / phi_{k-1}) S``
    for ``k > 1`` so that ``Phi^(k:1) = phi_k S^k``. A nonzero ``phi_0`` would
    leak through the ratio form of ``Phi^(2)``; in that case ``Phi^(2)`` is
    instead solved row by row on the support so that
    ``Phi^(2) Phi^(1) = phi_2 S^2``, and construction fails if no
    support-respecting solution exists.
    """
    taps = poly.taps
    order = poly.order
    if order < 1:
        raise InvalidArgument("ev_from_poly needs a polynomial of order K >= 1")
    for k in range(2, order + 1):
        if np.any((taps[k - 1] == 0) & (taps[k] != 0)):
            raise InvalidArgument(f"infeasible tap ratio at k={k}: phi_{k - 1} = 0 while phi_{k} != 0")
    pattern = graph.support_with_diag
    shift_vals = _values_on(pattern, graph.shift)
    diag = (pattern.row_ids == pattern.indices).astype(float)
    coeffs = [diag[:, None, None] * taps[0] + shift_vals[:, None, None] * taps[1]]
    for k in range(2, order + 1):
        prev, cur = taps[k - 1], taps[k]
        ratio = np.divide(cur, prev, out=np.zeros_like(cur), where=prev != 0)
        coeffs.append(shift_vals[:, None, None] * ratio)
    if order > 1 and np.any(taps[0] != 0):
        coeffs[1] = _solve_second(pattern, graph.shift.to_dense(), taps, tol)
    return EVParams(pattern, np.array(coeffs), use_self_loops=True)


def _solve_second(pattern, s, taps, tol):
    """Values of ``Phi^(2)`` on ``pattern`` with ``Phi^(2) (phi_0 I + phi_1 S) = phi_2 S^2`` per feature pair."""
    n = s.shape[0]
    s2 = s @ s
    out = np.zeros((pattern.nnz,) + taps.shape[1:])
    for o, i in np.ndindex(*taps.shape[1:]):
        first = taps[0, o, i] * np.eye(n) + taps[1, o, i] * s
        target = taps[2, o, i] * s2
        scale = max(1.0, float(np.abs(target).max()))
        for row in range(n):
            lo, hi = pattern.indptr[row], pattern.indptr[row + 1]
            cols = pattern.indices[lo:hi]
            sol = np.linalg.lstsq(first[cols].T, target[row], rcond=None)[0]
            if np.abs(sol @ first[cols] - target[row]).max() > tol * scale:
                raise InvalidArgument(
                    f"infeasible at k=2: no Phi^(2) on the support of S + I gives phi_2 S^2 (row {row})")
            out[lo:hi, o, i] = sol
    return out


def _values_on(pattern, matrix):
    """Values of ``matrix`` at each position of the (super-)pattern ``pattern``."""
    lookup = dict(zip(zip(matrix.row_ids.tolist(), matrix.indices.tolist()), matrix.data.tolist()))
    return np.array([lookup.get(pos, 0.0) for pos in zip(pattern.row_ids.tolist(), pattern.indices.tolist())])
