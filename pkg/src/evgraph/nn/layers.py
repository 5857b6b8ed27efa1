from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.filters import (
    EVParams,
    HEVParams,
    NVParams,
    PolyParams,
    SpectralEVParams,
    SpectralParams,
    select_privileged,
    spectral_ev_basis,
)

FAMILY_NAMES = ("polynomial", "spectral", "node-variant", "edge-variant", "hybrid-ev", "spectral-ev")
NONLINEARITIES = ("relu", "none")


@dataclass(frozen=True)
class LayerSpec:
    """One graph-filter layer ``z_f = sigma(sum_g H_{f,g}(S) z_g)``.

    ``order`` is K, ``num_knots`` is b (spectral only), ``privileged_size`` and
    ``strategy`` pick the privileged set of the node-variant/hybrid families.
    """

    in_features: int
    out_features: int
    family: str
    order: int = 1
    num_knots: int = 5
    privileged_size: int = 1
    strategy: str = "max-degree"
    nonlinearity: str = "relu"
    use_self_loops: bool = True

    def __post_init__(self):
        if self.in_features < 1 or self.out_features < 1:
            raise InvalidArgument("feature counts must be >= 1")
        if self.family not in FAMILY_NAMES:
            raise InvalidArgument(f"unknown filter family {self.family!r}")
        if self.nonlinearity not in NONLINEARITIES:
            raise InvalidArgument(f"unknown nonlinearity {self.nonlinearity!r}")
        min_order = 1 if self.family in ("edge-variant", "spectral-ev") else 0
        if self.order < min_order:
            raise InvalidArgument(f"{self.family} needs order >= {min_order}")
        if self.family == "spectral" and self.num_knots < 2:
            raise InvalidArgument("spectral family needs num_knots >= 2")
        if self.family in ("node-variant", "hybrid-ev") and self.privileged_size < 1:
            raise InvalidArgument("privileged_size must be >= 1")


def init_filter(spec: LayerSpec, graph, spectrum, rng, selection_seed=0):
    """Draw a filter bank for ``spec`` on ``graph`` with uniform fan-in scaling."""
    shape = (spec.out_features, spec.in_features)
    if spec.family in ("spectral", "spectral-ev") and spectrum is None:
        raise InvalidArgument(f"{spec.family} layer needs the graph spectrum")
    if spec.family == "polynomial":
        return PolyParams.init(spec.order, *shape, rng)
    if spec.family == "edge-variant":
        return EVParams.init(graph, spec.order, *shape, rng, use_self_loops=spec.use_self_loops)
    if spec.family == "spectral":
        if spec.num_knots > graph.num_nodes:
            raise InvalidArgument("num_knots may not exceed the number of nodes")
        return SpectralParams.init(spectrum, spec.num_knots, *shape, rng)
    if spec.family == "spectral-ev":
        return SpectralEVParams.init(spectral_ev_basis(spectrum, graph), spec.order, *shape, rng)
    privileged = select_privileged(graph, spec.strategy, spec.privileged_size, seed=selection_seed)
    if spec.family == "node-variant":
        return NVParams.init(privileged, spec.order, *shape, rng)
    return HEVParams.init(graph, privileged, spec.order, *shape, rng)


def relu(x):
    return np.maximum(x, 0.0)


def layer_forward(spec: LayerSpec, params, z, graph=None, spectrum=None):
    """Apply one layer to ``z`` of shape ``(N, F_in, B)``; returns output and cache."""
    if z.shape[1] != spec.in_features:
        raise InvalidArgument(f"layer expects {spec.in_features} input features, got {z.shape[1]}")
    pre, cache = params.forward(z, graph=graph, spectrum=spectrum)
    out = relu(pre) if spec.nonlinearity == "relu" else pre
    return out, (cache, pre)


def layer_backward(spec: LayerSpec, params, cache, grad, graph=None, spectrum=None):
    inner, pre = cache
    if spec.nonlinearity == "relu":
        grad = grad * (pre > 0)
    return params.backward(inner, grad, graph=graph, spectrum=spectrum)
