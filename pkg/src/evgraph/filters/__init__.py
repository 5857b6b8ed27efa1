"""Graph-filter families as parameterized linear operators.

Each family is a frozen dataclass with ``forward``/``backward`` methods working
on ``(N, F_in, B)`` arrays. The module-level functions below accept
user-facing signals: a vector, an ``N x F`` matrix of independent signals for a
single filter, or an ``N x F_in`` matrix for a bank.
"""

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.filters.archive import filter_from_dict, filter_to_dict
from evgraph.filters.base import FilterBank, to_bank_input
from evgraph.filters.edge_variant import EVParams, ev_from_poly
from evgraph.filters.hybrid import HEVParams, privileged_support
from evgraph.filters.node_variant import NVParams
from evgraph.filters.polynomial import PolyParams
from evgraph.filters.selection import PrivilegedSet, select_privileged
from evgraph.filters.spectral import SpectralParams, cubic_spline_kernel
from evgraph.filters.spectral_ev import SpectralEVBasis, SpectralEVParams, spectral_ev_basis

FAMILIES = {
    cls.family: cls
    for cls in (PolyParams, SpectralParams, NVParams, EVParams, HEVParams, SpectralEVParams)
}

__all__ = [
    "EVParams",
    "FAMILIES",
    "FilterBank",
    "HEVParams",
    "NVParams",
    "PolyParams",
    "PrivilegedSet",
    "SpectralEVBasis",
    "SpectralEVParams",
    "SpectralParams",
    "cubic_spline_kernel",
    "dense_operator",
    "ev_forward",
    "ev_from_poly",
    "filter_backward",
    "filter_forward",
    "filter_from_dict",
    "filter_to_dict",
    "hev_forward",
    "nv_forward",
    "param_count",
    "poly_forward",
    "privileged_support",
    "select_privileged",
    "spectral_ev_basis",
    "spectral_ev_forward",
    "spectral_forward",
]


def _num_nodes(params, graph, spectrum):
    if graph is not None:
        return graph.num_nodes
    if spectrum is not None:
        return spectrum.num_nodes
    if isinstance(params, EVParams):
        return params.pattern.shape[0]
    raise InvalidArgument(f"{params.family} filter needs a graph or a spectrum")


def filter_forward(params, x, graph=None, spectrum=None):
    z, undo = to_bank_input(x, params.in_features, _num_nodes(params, graph, spectrum))
    y, _ = params.forward(z, graph=graph, spectrum=spectrum)
    return undo(y)


def filter_backward(params, x, upstream_grad, graph=None, spectrum=None):
    """Gradients of ``<upstream_grad, H x>`` w.r.t. every learnable array and ``x``."""
    z, undo = to_bank_input(x, params.in_features, _num_nodes(params, graph, spectrum))
    y, cache = params.forward(z, graph=graph, spectrum=spectrum)
    upstream = np.asarray(upstream_grad, dtype=float)
    expected = undo(y).shape
    if upstream.shape != expected:
        raise InvalidArgument(f"upstream gradient has shape {upstream.shape}, output has {expected}")
    grads, dz = params.backward(cache, upstream.reshape(y.shape), graph=graph, spectrum=spectrum)
    return grads, dz.reshape(np.shape(x))


def poly_forward(p, g, x):
    return filter_forward(p, x, graph=g)


def ev_forward(p, x):
    return filter_forward(p, x)


def spectral_forward(p, sp, x):
    return filter_forward(p, x, spectrum=sp)


def nv_forward(p, g, x):
    return filter_forward(p, x, graph=g)


def hev_forward(p, g, x):
    return filter_forward(p, x, graph=g)


def spectral_ev_forward(mu, basis, sp, x):
    return filter_forward(SpectralEVParams(basis, mu), x, spectrum=sp)


def param_count(params, num_in_features=None, num_out_features=None):
    """Learnable scalars of an ``F_in -> F_out`` bank of this family.

    Without feature counts the bank's own shape is used; with them, the
    per-pair count of ``params`` is scaled to the requested bank size.
    """
    total = params.param_count()
    if num_in_features is None and num_out_features is None:
        return total
    per_pair = total // (params.out_features * params.in_features)
    return per_pair * (num_in_features or params.in_features) * (num_out_features or params.out_features)


def dense_operator(params, graph=None, spectrum=None):
    """Dense ``H_{f,g}(S)`` for every feature pair, shape ``(F_out, F_in, N, N)``.

    Assembled by pushing the identity through ``forward``; this is for
    reporting (spectral responses), not for checking ``forward`` itself.
    """
    n = _num_nodes(params, graph, spectrum)
    out = np.empty((params.out_features, params.in_features, n, n))
    for g in range(params.in_features):
        z = np.zeros((n, params.in_features, n))
        z[:, g, :] = np.eye(n)
        y, _ = params.forward(z, graph=graph, spectrum=spectrum)
        out[:, g] = np.transpose(y, (1, 0, 2))
    return out
