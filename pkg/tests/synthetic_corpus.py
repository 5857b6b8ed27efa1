"""Generator of a two-author corpus with planted function-word transition statistics."""

import numpy as np

WORDS = ("the", "of", "and", "to", "in", "that", "it", "with", "but", "for")
FILLER = ("house", "river", "night", "stone", "light", "voice", "garden", "window")


def author_chain(rng, size, sharpness):
    """Row-stochastic transition matrix over ``size`` function words."""
    return rng.dirichlet(np.full(size, sharpness), size=size)


def excerpt(rng, chain, length, filler_rate=0.4):
    """Markov walk over function words with filler tokens sprinkled between them."""
    state = rng.integers(len(WORDS))
    out = []
    while len(out) < length:
        out.append(WORDS[state])
        while rng.random() < filler_rate and len(out) < length:
            out.append(FILLER[rng.integers(len(FILLER))])
        state = rng.choice(len(WORDS), p=chain[state])
    return " ".join(out[:length])


def make_corpus(seed=0, per_author=200, length=120, sharpness=0.5):
    """``{author: [text, ...]}`` for authors ``alpha`` and ``beta`` with distinct chains."""
    rng = np.random.default_rng(seed)
    chains = {a: author_chain(rng, len(WORDS), sharpness) for a in ("alpha", "beta")}
    return {a: [excerpt(rng, chains[a], length) for _ in range(per_author)] for a in chains}


def write_corpus(root, **kwargs):
    """Materialize :func:`make_corpus` as ``root/<author>/<k>.txt``; returns ``root``."""
    for author, texts in make_corpus(**kwargs).items():
        d = root / author
        d.mkdir(parents=True, exist_ok=True)
        for k, text in enumerate(texts):
            (d / f"{k:04d}.txt").write_text(text + "\n")
    return root
