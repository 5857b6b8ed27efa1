from dataclasses import dataclass

import numpy as np

from evgraph.filters.base import (
    FilterBank,
    adjoint_powers,
    check_grad_shape,
    power_states,
    promote,
    uniform_init,
)


@dataclass(frozen=True, eq=False)
class PolyParams(FilterBank):
    """Taps ``phi_0..phi_K`` of ``H(S) = sum_k phi_k S^k``; shape ``(K+1, F_out, F_in)``."""

    taps: np.ndarray

    family = "polynomial"
    _learnable = ("taps",)

    def __post_init__(self):
        object.__setattr__(self, "taps", promote(self.taps, 1, "taps"))

    @property
    def order(self):
        return self.taps.shape[0] - 1

    @classmethod
    def init(cls, order, out_features, in_features, rng):
        fan = (order + 1) * in_features
        return cls(uniform_init(rng, (order + 1, out_features, in_features), fan))

    def forward(self, z, graph, spectrum=None):
        states = power_states(graph, z, self.order)
        y = np.einsum("koi,knib->nob", self.taps, states)
        return y, (states, y.shape)

    def backward(self, cache, grad, graph, spectrum=None):
        states, y_shape = cache
        grad = check_grad_shape(grad, y_shape)
        d_taps = np.einsum("nob,knib->koi", grad, states)
        per_order = np.einsum("koi,nob->knib", self.taps, grad)
        return {"taps": d_taps}, adjoint_powers(graph, per_order)
