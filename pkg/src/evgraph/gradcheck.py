"""Finite-difference checks of the hand-written gradients, one model per family."""

import numpy as np

from evgraph.graph import build_sbm
from evgraph.nn import LayerSpec, build_model
from evgraph.spectral import eigendecompose

FAMILIES = ("polynomial", "spectral", "node-variant", "edge-variant", "hybrid-ev", "spectral-ev")
STEP = 1e-5
ABS_FLOOR = 1e-8
REL_TOL = 1e-5


def relative_error(numeric, analytic, floor=ABS_FLOOR / REL_TOL):
    """``|numeric - analytic| / max(|numeric|, |analytic|, floor)``.

    With the default floor a value below ``1e-5`` means the pair agrees to a
    relative ``1e-5`` or to an absolute ``1e-8``, whichever is looser.
    """
    numeric, analytic = np.asarray(numeric, dtype=float), np.asarray(analytic, dtype=float)
    scale = np.maximum(np.maximum(np.abs(numeric), np.abs(analytic)), floor)
    return np.abs(numeric - analytic) / scale


def check_model(family, seed=0, num_checks=20, step=STEP, num_nodes=8):
    """Max relative error over ``num_checks`` random scalars of a small two-layer model.

    The model is ``family`` (2 -> 3 features) then a polynomial layer (3 -> 2)
    and a 3-class readout, evaluated on a batch of 4 random signals.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, FAMILIES.index(family)]))
    g = build_sbm(num_nodes, 2, 0.8, 0.3, int(rng.integers(2**31)))
    spectrum = eigendecompose(g)
    specs = [
        LayerSpec(2, 3, family, order=2, num_knots=3, privileged_size=3),
        LayerSpec(3, 2, "polynomial", order=1),
    ]
    model = build_model(specs, 3, g, spectrum, seed=int(rng.integers(2**31)))
    x = rng.standard_normal((4, num_nodes, 2))
    y = rng.integers(3, size=4)
    _, grads, _ = model.loss_and_grads(x, y, g, spectrum)
    params = model.parameters()
    names = sorted(params)
    sizes = np.array([params[n].size for n in names])
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    # half of the checks land on the family layer itself, the rest anywhere else
    own = np.concatenate([np.arange(offsets[b], offsets[b + 1]) for b, n in enumerate(names)
                          if n.startswith("layer0.")])
    rest = np.setdiff1d(np.arange(offsets[-1]), own)
    n_own = min((num_checks + 1) // 2, own.size)
    picks = np.concatenate([rng.choice(own, size=n_own, replace=False),
                            rng.choice(rest, size=min(num_checks - n_own, rest.size), replace=False)])
    worst = 0.0
    for flat in np.sort(picks):
        b = int(np.searchsorted(offsets, flat, side="right") - 1)
        name, idx = names[b], int(flat - offsets[b])
        losses = []
        for sign in (1.0, -1.0):
            arr = params[name].copy()
            arr.flat[idx] += sign * step
            losses.append(model.with_parameters({**params, name: arr}).loss_and_grads(x, y, g, spectrum)[0])
        numeric = (losses[0] - losses[1]) / (2 * step)
        worst = max(worst, float(relative_error(numeric, grads[name].flat[idx])))
    return worst


def run_suite(seed=0, families=FAMILIES, num_checks=20):
    """``{family: max relative error}`` in the given family order."""
    return {fam: check_model(fam, seed=seed, num_checks=num_checks) for fam in families}
