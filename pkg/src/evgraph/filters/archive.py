"""JSON (de)serialization of filter banks.

Every filter becomes ``{"family": ..., "arrays": {...}, "structure": {...}}``
where each array is ``{"shape": [...], "data": [row-major floats]}``. Python's
float repr is the shortest round-trip decimal, so a dump/load cycle is exact.
"""

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.filters.edge_variant import EVParams
from evgraph.filters.hybrid import HEVParams
from evgraph.filters.node_variant import NVParams
from evgraph.filters.polynomial import PolyParams
from evgraph.filters.selection import PrivilegedSet
from evgraph.filters.spectral import SpectralParams
from evgraph.filters.spectral_ev import SpectralEVBasis, SpectralEVParams
from evgraph.sparse import CSR


def pack(array):
    array = np.asarray(array)
    return {"shape": list(array.shape), "data": [float(v) if array.dtype.kind == "f" else int(v) for v in array.ravel()]}


def unpack(blob, dtype=float):
    return np.array(blob["data"], dtype=dtype).reshape(blob["shape"])


def _pattern(p: CSR):
    return {"shape": list(p.shape), "indptr": pack(p.indptr), "indices": pack(p.indices)}


def _unpattern(blob):
    indptr = unpack(blob["indptr"], np.int64)
    indices = unpack(blob["indices"], np.int64)
    return CSR(indptr, indices, np.ones(len(indices)), tuple(blob["shape"]))


def _privileged(p: PrivilegedSet):
    return {"nodes": pack(p.nodes), "assignment": pack(p.assignment)}


def _unprivileged(blob):
    return PrivilegedSet(unpack(blob["nodes"], np.int64), unpack(blob["assignment"], np.int64))


def filter_to_dict(params):
    out = {"family": params.family, "feature_shape": list(params.feature_shape)}
    out["arrays"] = {name: pack(arr) for name, arr in params.arrays().items()}
    if isinstance(params, EVParams):
        out["structure"] = {"pattern": _pattern(params.pattern), "use_self_loops": params.use_self_loops}
    elif isinstance(params, SpectralParams):
        out["structure"] = {"kernel": pack(params.kernel)}
    elif isinstance(params, NVParams):
        out["structure"] = {"privileged": _privileged(params.privileged)}
    elif isinstance(params, HEVParams):
        out["structure"] = {
            "privileged": _privileged(params.privileged),
            "edge_pattern": _pattern(params.edge_pattern),
        }
    elif isinstance(params, SpectralEVParams):
        out["structure"] = {
            "basis": pack(params.basis.basis),
            "zero_index_set": pack(params.basis.zero_index_set),
        }
    else:
        out["structure"] = {}
    return out


def filter_from_dict(blob):
    family = blob.get("family")
    arrays = {name: unpack(a) for name, a in blob["arrays"].items()}
    st = blob.get("structure", {})
    if family == "polynomial":
        return PolyParams(arrays["taps"])
    if family == "edge-variant":
        return EVParams(_unpattern(st["pattern"]), arrays["coeffs"], bool(st["use_self_loops"]))
    if family == "spectral":
        return SpectralParams(unpack(st["kernel"]), arrays["weights"])
    if family == "node-variant":
        return NVParams(_unprivileged(st["privileged"]), arrays["taps"])
    if family == "hybrid-ev":
        return HEVParams(
            _unprivileged(st["privileged"]),
            _unpattern(st["edge_pattern"]),
            arrays["diag0"],
            arrays["edge_coeffs"],
            arrays["global_taps"],
        )
    if family == "spectral-ev":
        basis = SpectralEVBasis(unpack(st["basis"]), unpack(st["zero_index_set"], np.int64))
        return SpectralEVParams(basis, arrays["mu"])
    raise InvalidArgument(f"unknown filter family {family!r}")
