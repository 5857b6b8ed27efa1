from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument, UnsupportedGraph
from evgraph.filters.base import FilterBank, promote, uniform_init
from evgraph.filters.spectral import spectral_apply, spectral_apply_grad

NULLSPACE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectralEVBasis:
    """Orthonormal basis (columns) of eigenvalue vectors whose ``U diag(c) U^T`` respects the support.

    ``zero_index_set`` lists the ``(i, j)`` positions where ``S + I`` is zero.
    """

    basis: np.ndarray
    zero_index_set: np.ndarray

    @property
    def rank(self):
        return self.basis.shape[1]


def spectral_ev_basis(spectrum, graph) -> SpectralEVBasis:
    """Nullspace of the Khatri-Rao support constraint ``C_I (U * U) lambda = 0``."""
    if not graph.is_symmetric:
        raise UnsupportedGraph("spectral edge-variant basis needs a symmetric shift operator")
    n = graph.num_nodes
    allowed = graph.support_with_diag.to_dense() != 0
    rows, cols = np.nonzero(~allowed)
    zero_set = np.stack((rows, cols), axis=1)
    u = spectrum.eigenvectors
    if len(rows) == 0:
        return SpectralEVBasis(np.eye(n), zero_set)
    # row (i, j) of the Khatri-Rao product: U[i, :] * U[j, :]
    constraint = u[rows] * u[cols]
    _, sigma, vt = np.linalg.svd(constraint, full_matrices=True)
    cutoff = NULLSPACE_RTOL * (sigma[0] if len(sigma) else 0.0)
    rank = int(np.count_nonzero(sigma > cutoff))
    return SpectralEVBasis(vt[rank:].T.copy(), zero_set)


@dataclass(frozen=True, eq=False)
class SpectralEVParams(FilterBank):
    """Shift-invariant EV subclass: ``h = sum_k prod_{kappa<=k} diag(B mu^(kappa))``.

    ``mu`` has shape ``(K, rank, F_out, F_in)``.
    """

    basis: SpectralEVBasis
    mu: np.ndarray

    family = "spectral-ev"
    _learnable = ("mu",)

    def __post_init__(self):
        mu = promote(self.mu, 2, "mu")
        if mu.shape[0] < 1:
            raise InvalidArgument("spectral edge-variant filter needs order K >= 1")
        if mu.shape[1] != self.basis.rank:
            raise InvalidArgument(f"mu vectors have length {mu.shape[1]}, basis rank is {self.basis.rank}")
        object.__setattr__(self, "mu", mu)

    @property
    def order(self):
        return self.mu.shape[0]

    @classmethod
    def init(cls, basis, order, out_features, in_features, rng):
        shape = (order, basis.rank, out_features, in_features)
        return cls(basis, uniform_init(rng, shape, max(basis.rank, 1) * in_features))

    def eigen_factors(self):
        """``lambda^(k) = B mu^(k)``, shape ``(K, N, F_out, F_in)``."""
        return np.einsum("nr,kroi->knoi", self.basis.basis, self.mu)

    def response(self):
        lam = self.eigen_factors()
        return np.cumprod(lam, axis=0).sum(axis=0)

    def forward(self, z, graph=None, spectrum=None):
        lam = self.eigen_factors()
        y, inner = spectral_apply(np.cumprod(lam, axis=0).sum(axis=0), spectrum, z)
        return y, (lam, inner)

    def backward(self, cache, grad, graph=None, spectrum=None):
        lam, inner = cache
        d_h, dz = spectral_apply_grad(inner, grad, spectrum)
        order = lam.shape[0]
        prefix = np.ones_like(lam)
        prefix[1:] = np.cumprod(lam, axis=0)[:-1]
        # suffix[k] = 1 + lam[k+1] * suffix[k+1], suffix[K-1] = 1
        suffix = np.ones_like(lam)
        for k in range(order - 2, -1, -1):
            suffix[k] = 1.0 + lam[k + 1] * suffix[k + 1]
        d_lam = d_h[None] * prefix * suffix
        return {"mu": np.einsum("nr,knoi->kroi", self.basis.basis, d_lam)}, dz
