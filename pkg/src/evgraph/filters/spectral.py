from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from evgraph.errors import InvalidArgument
from evgraph.filters.base import FilterBank, check_grad_shape, promote, uniform_init


def cubic_spline_kernel(eigenvalues, num_knots):
    """Natural cubic spline cardinal basis on ``num_knots`` evenly spaced knots.

    Column ``j`` is the natural cubic spline through the unit vector ``e_j``
    at the knots, evaluated at every eigenvalue. The columns form a partition
    of unity; with two knots the basis is affine in the eigenvalue.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if num_knots < 2:
        raise InvalidArgument(f"num_knots must be >= 2, got {num_knots}")
    if not np.all(np.isfinite(lam)):
        raise InvalidArgument("eigenvalues must be finite")
    lo, hi = lam.min(), lam.max()
    if hi - lo <= 0:
        raise InvalidArgument("all eigenvalues are equal; spline knots would collapse")
    knots = np.linspace(lo, hi, num_knots)
    spline = CubicSpline(knots, np.eye(num_knots), bc_type="natural")
    return spline(np.clip(lam, lo, hi))


@dataclass(frozen=True, eq=False)
class SpectralParams(FilterBank):
    """``H(S) = U diag(B w) U^T`` with fixed kernel ``B`` (``N x b``) and weights ``(b, F_out, F_in)``."""

    kernel: np.ndarray
    weights: np.ndarray

    family = "spectral"
    _learnable = ("weights",)

    def __post_init__(self):
        kernel = np.asarray(self.kernel, dtype=float)
        if kernel.ndim != 2:
            raise InvalidArgument("kernel must be an N x b matrix")
        weights = promote(self.weights, 1, "weights")
        if weights.shape[0] != kernel.shape[1]:
            raise InvalidArgument(f"kernel has {kernel.shape[1]} columns, weights have {weights.shape[0]} rows")
        if kernel.shape[1] > kernel.shape[0]:
            raise InvalidArgument("kernel may not have more columns than rows")
        object.__setattr__(self, "kernel", kernel)
        object.__setattr__(self, "weights", weights)

    @property
    def num_knots(self):
        return self.kernel.shape[1]

    @classmethod
    def init(cls, spectrum, num_knots, out_features, in_features, rng):
        kernel = cubic_spline_kernel(spectrum.eigenvalues, num_knots)
        return cls(kernel, uniform_init(rng, (num_knots, out_features, in_features), num_knots * in_features))

    def response(self):
        """Diagonal frequency response, shape ``(N, F_out, F_in)``."""
        return np.tensordot(self.kernel, self.weights, axes=1)

    def forward(self, z, graph=None, spectrum=None):
        return spectral_apply(self.response(), spectrum, z)

    def backward(self, cache, grad, graph=None, spectrum=None):
        d_h, dz = spectral_apply_grad(cache, grad, spectrum)
        return {"weights": np.tensordot(self.kernel.T, d_h, axes=1)}, dz


def _require(spectrum, n):
    if spectrum is None:
        raise InvalidArgument("spectral filters need the graph spectrum")
    if spectrum.num_nodes != n:
        raise InvalidArgument(f"signal has {n} rows, spectrum has {spectrum.num_nodes}")


def spectral_apply(h, spectrum, z):
    """``U (h * (U^T z))`` summed over input features; shared by the spectral families."""
    _require(spectrum, z.shape[0])
    u = spectrum.eigenvectors
    z_hat = np.tensordot(u.T, z, axes=1)
    y_hat = np.einsum("noi,nib->nob", h, z_hat)
    y = np.tensordot(u, y_hat, axes=1)
    return y, (z_hat, h, y.shape)


def spectral_apply_grad(cache, grad, spectrum):
    z_hat, h, y_shape = cache
    grad = check_grad_shape(grad, y_shape)
    u = spectrum.eigenvectors
    g_hat = np.tensordot(u.T, grad, axes=1)
    d_h = np.einsum("nob,nib->noi", g_hat, z_hat)
    dz = np.tensordot(u, np.einsum("noi,nob->nib", h, g_hat), axes=1)
    return d_h, dz
