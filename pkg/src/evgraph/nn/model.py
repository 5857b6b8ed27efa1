"""Layered graph-filter model with a dense softmax readout."""

from dataclasses import dataclass, field, replace

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.filters import filter_from_dict, filter_to_dict
from evgraph.filters.base import uniform_init
from evgraph.nn.layers import LayerSpec, init_filter, layer_backward, layer_forward

LOG_EPS = 1e-12


def softmax(logits):
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(probs, label):
    probs = np.asarray(probs, dtype=float)
    if not 0 <= label < probs.shape[-1]:
        raise InvalidArgument(f"label {label} outside 0..{probs.shape[-1] - 1}")
    return float(-np.log(probs[label] + LOG_EPS))


@dataclass(frozen=True, eq=False)
class Model:
    """Filter layers followed by ``softmax(flatten(z_L) @ readout + offset)``.

    ``flatten`` concatenates per-node feature rows, i.e. index ``n * F_L + f``.
    """

    specs: tuple
    filters: tuple
    readout: np.ndarray
    offset: np.ndarray
    num_classes: int = field(default=0)

    def __post_init__(self):
        readout = np.asarray(self.readout, dtype=float)
        offset = np.asarray(self.offset, dtype=float)
        if len(self.specs) != len(self.filters) or not self.specs:
            raise InvalidArgument("model needs one filter bank per layer and at least one layer")
        for a, b in zip(self.specs, self.specs[1:]):
            if a.out_features != b.in_features:
                raise InvalidArgument("adjacent layer feature counts do not chain")
        for spec, f in zip(self.specs, self.filters):
            if tuple(f.feature_shape) != (spec.out_features, spec.in_features):
                raise InvalidArgument(f"{spec.family} bank has shape {f.feature_shape}, spec wants "
                                      f"{(spec.out_features, spec.in_features)}")
        if readout.ndim != 2 or offset.shape != (readout.shape[1],):
            raise InvalidArgument("readout must be (N*F_L, C) with a length-C offset")
        if readout.shape[0] % self.specs[-1].out_features:
            raise InvalidArgument("readout rows are not a multiple of the final feature count")
        object.__setattr__(self, "readout", readout)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "num_classes", readout.shape[1])

    @property
    def num_nodes(self):
        return self.readout.shape[0] // self.specs[-1].out_features

    # -- parameters as a flat name -> array mapping -------------------------
    def parameters(self):
        out = {}
        for i, f in enumerate(self.filters):
            for name, arr in f.arrays().items():
                out[f"layer{i}.{name}"] = arr
        out["readout.weight"] = self.readout
        out["readout.offset"] = self.offset
        return out

    def with_parameters(self, params):
        filters = []
        for i, f in enumerate(self.filters):
            filters.append(f.with_arrays(**{n: params[f"layer{i}.{n}"] for n in f.arrays()}))
        return replace(self, filters=tuple(filters), readout=params["readout.weight"],
                       offset=params["readout.offset"])

    def param_count(self):
        return int(sum(a.size for a in self.parameters().values()))

    # -- computation --------------------------------------------------------
    def _features(self, signals, graph, spectrum):
        x = _as_batch(signals, self.num_nodes, self.specs[0].in_features)
        z = np.transpose(x, (1, 2, 0))
        caches = []
        for spec, f in zip(self.specs, self.filters):
            z, cache = layer_forward(spec, f, z, graph=graph, spectrum=spectrum)
            caches.append(cache)
        flat = np.transpose(z, (2, 0, 1)).reshape(z.shape[2], -1)
        return flat, (caches, z.shape)

    def logits(self, signals, graph=None, spectrum=None):
        flat, _ = self._features(signals, graph, spectrum)
        return flat @ self.readout + self.offset

    def predict_proba(self, signals, graph=None, spectrum=None):
        return softmax(self.logits(signals, graph, spectrum))

    def loss_and_grads(self, signals, labels, graph=None, spectrum=None):
        """Mean cross-entropy over the batch and its gradient for every parameter.

        Returns ``(loss, grads, probs)``.
        """
        labels = np.asarray(labels, dtype=np.int64)
        flat, (caches, z_shape) = self._features(signals, graph, spectrum)
        probs = softmax(flat @ self.readout + self.offset)
        batch = len(labels)
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise InvalidArgument(f"labels must lie in 0..{self.num_classes - 1}")
        picked = probs[np.arange(batch), labels]
        loss = float(np.mean(-np.log(picked + LOG_EPS)))
        onehot = np.zeros_like(probs)
        onehot[np.arange(batch), labels] = 1.0
        # d/dlogits of -log(p_y + eps), averaged over the batch
        d_logits = (picked / (picked + LOG_EPS))[:, None] * (probs - onehot) / batch
        grads = {"readout.weight": flat.T @ d_logits, "readout.offset": d_logits.sum(axis=0)}
        d_flat = d_logits @ self.readout.T
        g = np.transpose(d_flat.reshape(z_shape[2], z_shape[0], z_shape[1]), (1, 2, 0))
        for i in range(len(self.specs) - 1, -1, -1):
            spec, f = self.specs[i], self.filters[i]
            layer_grads, g = layer_backward(spec, f, caches[i], g, graph=graph, spectrum=spectrum)
            for name, arr in layer_grads.items():
                grads[f"layer{i}.{name}"] = arr
        return loss, grads, probs

    # -- archive ------------------------------------------------------------
    def to_dict(self):
        return {
            "format": "evgraph-model",
            "version": 1,
            "layers": [
                {"spec": spec.__dict__.copy(), "filter": filter_to_dict(f)}
                for spec, f in zip(self.specs, self.filters)
            ],
            "readout": {"shape": list(self.readout.shape), "data": self.readout.ravel().tolist()},
            "offset": self.offset.tolist(),
        }

    @classmethod
    def from_dict(cls, blob):
        if blob.get("format") != "evgraph-model":
            raise InvalidArgument("not an evgraph model archive")
        specs = tuple(LayerSpec(**layer["spec"]) for layer in blob["layers"])
        filters = tuple(filter_from_dict(layer["filter"]) for layer in blob["layers"])
        readout = np.array(blob["readout"]["data"], dtype=float).reshape(blob["readout"]["shape"])
        return cls(specs, filters, readout, np.array(blob["offset"], dtype=float))


def _as_batch(signals, num_nodes, in_features):
    """Accept ``(B, N)`` (single feature) or ``(B, N, F)``."""
    x = np.asarray(signals, dtype=float)
    if x.ndim == 2:
        x = x[..., None]
    if x.ndim != 3 or x.shape[1:] != (num_nodes, in_features):
        raise InvalidArgument(f"signals must be (batch, {num_nodes}, {in_features}), got {np.shape(signals)}")
    return x


def build_model(specs, num_classes, graph, spectrum=None, seed=0):
    """Initialize every layer and the readout from independent substreams of ``seed``."""
    specs = tuple(specs)
    root = np.random.SeedSequence(seed)
    streams = root.spawn(len(specs) + 1)
    filters = []
    for spec, stream in zip(specs, streams):
        rng = np.random.default_rng(stream)
        filters.append(init_filter(spec, graph, spectrum, rng, selection_seed=int(stream.generate_state(1)[0])))
    rng = np.random.default_rng(streams[-1])
    fan = graph.num_nodes * specs[-1].out_features
    readout = uniform_init(rng, (fan, num_classes), fan)
    offset = np.zeros(num_classes)
    return Model(specs, tuple(filters), readout, offset)


def model_forward(m: Model, g, x, spectrum=None):
    """Class probabilities for one signal ``x`` of shape ``(N,)`` or ``(N, F)``."""
    x = np.asarray(x, dtype=float)
    batch = x[None, :, None] if x.ndim == 1 else x[None]
    return m.predict_proba(batch, graph=g, spectrum=spectrum)[0]
