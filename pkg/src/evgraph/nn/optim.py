from dataclasses import dataclass, field

import numpy as np

from evgraph.errors import InvalidArgument, NumericFailure


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 20
    batch_size: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidArgument("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidArgument("beta1 and beta2 must lie in [0, 1)")
        if not self.epsilon > 0:
            raise InvalidArgument("epsilon must be positive")
        if self.batch_size < 1 or self.epochs < 0:
            raise InvalidArgument("batch_size must be >= 1 and epochs >= 0")


@dataclass
class AdamState:
    step: int = 0
    first: dict = field(default_factory=dict)
    second: dict = field(default_factory=dict)


def adam_step(params, grads, state, config):
    """One bias-corrected ADAM update; returns ``(new_params, new_state)``.

    Blocks are processed in sorted-name order so the update is reproducible.
    """
    for name in sorted(grads):
        if name not in params:
            raise InvalidArgument(f"gradient for unknown parameter block {name!r}")
        if not np.all(np.isfinite(grads[name])):
            raise NumericFailure(f"non-finite gradient in parameter block {name!r}", block=name)
    t = state.step + 1
    b1, b2 = config.beta1, config.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    new_params, first, second = dict(params), {}, {}
    for name in sorted(params):
        if name not in grads:
            first[name] = state.first.get(name)
            second[name] = state.second.get(name)
            continue
        g = grads[name]
        m = b1 * state.first.get(name, np.zeros_like(g)) + (1.0 - b1) * g
        v = b2 * state.second.get(name, np.zeros_like(g)) + (1.0 - b2) * g * g
        new_params[name] = params[name] - config.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + config.epsilon)
        first[name], second[name] = m, v
    return new_params, AdamState(t, first, second)
