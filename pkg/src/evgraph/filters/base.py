"""Shared plumbing for filter banks.

Every family stores its learnable arrays with two trailing axes
``(F_out, F_in)`` so a single object describes a whole bank
``H_{f,g}(S)``. A plain single-input single-output filter is the
``(1, 1)`` case. Internally signals are laid out ``(N, F_in, B)``
(node, feature, batch column) and outputs ``(N, F_out, B)``.
"""

import dataclasses

import numpy as np

from evgraph.errors import InvalidArgument


def promote(array, lead_ndim, name):
    """Append ``(1, 1)`` feature axes to SISO arrays and validate finiteness."""
    array = np.asarray(array, dtype=float)
    if array.ndim == lead_ndim:
        array = array.reshape(array.shape + (1, 1))
    if array.ndim != lead_ndim + 2:
        raise InvalidArgument(f"{name} must have {lead_ndim} or {lead_ndim + 2} dimensions, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidArgument(f"{name} contains non-finite values")
    return array


def uniform_init(rng, shape, fan):
    bound = 1.0 / np.sqrt(max(fan, 1))
    return rng.uniform(-bound, bound, size=shape)


class FilterBank:
    """Mixin giving every family the same array-swapping interface."""

    family = None
    _learnable = ()

    def arrays(self):
        return {name: getattr(self, name) for name in self._learnable}

    def with_arrays(self, **arrays):
        return dataclasses.replace(self, **arrays)

    @property
    def feature_shape(self):
        first = getattr(self, self._learnable[0])
        return first.shape[-2:]

    @property
    def out_features(self):
        return self.feature_shape[0]

    @property
    def in_features(self):
        return self.feature_shape[1]

    def param_count(self):
        return int(sum(a.size for a in self.arrays().values()))


def to_bank_input(x, in_features, num_nodes):
    """Reshape a user-facing signal to ``(N, F_in, B)``; return it with an undo function."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[0] != num_nodes:
        raise InvalidArgument(f"signal has shape {x.shape}, expected {num_nodes} rows")
    if not np.all(np.isfinite(x)):
        raise InvalidArgument("signal contains non-finite values")
    if x.ndim == 1:
        if in_features != 1:
            raise InvalidArgument(f"bank expects {in_features} input features, got a single vector")
        return x.reshape(num_nodes, 1, 1), lambda y: y[:, 0, 0] if y.shape[1] == 1 else y[:, :, 0]
    if x.ndim == 2:
        if in_features == 1:
            # columns are independent signals through the same filter
            return x[:, None, :], lambda y: y[:, 0, :] if y.shape[1] == 1 else y
        if x.shape[1] != in_features:
            raise InvalidArgument(f"bank expects {in_features} input features, signal has {x.shape[1]}")
        return x[:, :, None], lambda y: y[:, :, 0]
    if x.ndim == 3:
        if x.shape[1] != in_features:
            raise InvalidArgument(f"bank expects {in_features} input features, signal has {x.shape[1]}")
        return x, lambda y: y
    raise InvalidArgument(f"signal must have 1 to 3 dimensions, got {x.ndim}")


def power_states(graph, z, order):
    """``[z, S z, ..., S^order z]`` stacked on a new leading axis."""
    states = [z]
    for _ in range(order):
        states.append(graph.shift.matmul(states[-1]))
    return np.stack(states)


def adjoint_powers(graph, per_order):
    """``sum_k (S^T)^k per_order[k]`` by reverse Horner."""
    acc = per_order[-1]
    for k in range(len(per_order) - 2, -1, -1):
        acc = graph.shift.rmatmul(acc) + per_order[k]
    return acc


def check_grad_shape(grad, cache_y_shape):
    grad = np.asarray(grad, dtype=float)
    if grad.shape != cache_y_shape:
        raise InvalidArgument(f"upstream gradient has shape {grad.shape}, forward output was {cache_y_shape}")
    return grad
