"""Word adjacency networks (WANs) for authorship attribution.

Function words are the nodes. A WAN counts how often function word ``u`` is
followed, within a window of ``D`` tokens, by function word ``v``; the weight
of a pair at offset ``d`` is discounted by ``alpha ** (d - 1)``.

WAN graphs store the adjacency ``A[u, v] = weight(u -> v)`` as their shift, so
row ``u`` holds the outgoing transitions of ``u``. The signature graph built
from them is symmetric, so the orientation only matters for raw WANs.
"""

import csv
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.graph import Graph, normalize_by_spectral_radius, write_edge_list
from evgraph.nn.data import Dataset
from evgraph.sparse import CSR

_WORD = re.compile(r"[a-z]+")


def tokenize(text):
    """Lowercase and split on anything that is not an ASCII letter."""
    return _WORD.findall(text.lower())


def load_function_words(path=None):
    """Read a function-word list (one per line, ``#`` comments); defaults to the packaged English list."""
    if path is None:
        text = resources.files("evgraph").joinpath("data/function_words.txt").read_text()
    else:
        text = Path(path).read_text()
    words = [ln.strip().lower() for ln in text.splitlines()]
    words = [w for w in words if w and not w.startswith("#")]
    return check_vocab(words)


def check_vocab(vocab):
    vocab = list(vocab)
    if not vocab:
        raise InvalidArgument("function-word vocabulary is empty")
    if len(set(vocab)) != len(vocab):
        dup = sorted({w for w in vocab if vocab.count(w) > 1})
        raise InvalidArgument(f"duplicate function words: {dup}")
    return tuple(vocab)


@dataclass(frozen=True)
class WanConfig:
    window: int = 10
    decay: float = 0.8
    normalize: bool = True

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 1:
            raise InvalidArgument(f"window must be a positive integer, got {self.window}")
        if not 0 < self.decay < 1:
            raise InvalidArgument(f"decay must lie in (0, 1), got {self.decay}")


@dataclass(frozen=True)
class Corpus:
    """Tokenized excerpts with their author tags over a fixed function-word vocabulary."""

    excerpts: tuple
    vocab: tuple

    def __post_init__(self):
        object.__setattr__(self, "vocab", check_vocab(self.vocab))
        excerpts = tuple((tuple(tokens), str(author)) for tokens, author in self.excerpts)
        for k, (tokens, _) in enumerate(excerpts):
            if not tokens:
                raise InvalidArgument(f"excerpt {k} has no tokens")
        object.__setattr__(self, "excerpts", excerpts)

    @property
    def authors(self):
        return sorted({a for _, a in self.excerpts})

    def by_author(self, author):
        return [tokens for tokens, a in self.excerpts if a == author]


def read_corpus(root, vocab=None):
    """Load ``root/<author>/<excerpt>.txt``; authors and files are taken in sorted order."""
    root = Path(root)
    if not root.is_dir():
        raise InvalidArgument(f"corpus directory not found: {root}")
    vocab = load_function_words() if vocab is None else check_vocab(vocab)
    excerpts = []
    for author_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for path in sorted(author_dir.glob("*.txt")):
            tokens = tokenize(path.read_text(encoding="utf-8", errors="replace"))
            if tokens:
                excerpts.append((tokens, author_dir.name))
    if not excerpts:
        raise InvalidArgument(f"corpus directory {root} holds no non-empty <author>/*.txt excerpts")
    return Corpus(tuple(excerpts), vocab)


def _word_ids(tokens, vocab):
    index = {w: i for i, w in enumerate(vocab)}
    return np.array([index.get(t, -1) for t in tokens], dtype=np.int64)


def wan_matrix(tokens, vocab, cfg=WanConfig()):
    """Dense WAN adjacency ``(V, V)``; see :func:`build_wan`."""
    vocab = check_vocab(vocab)
    ids = _word_ids(tokens, vocab)
    n = len(vocab)
    w = np.zeros((n, n))
    for d in range(1, cfg.window + 1):
        if d >= len(ids):
            break
        u, v = ids[:-d], ids[d:]
        hit = (u >= 0) & (v >= 0)
        np.add.at(w, (u[hit], v[hit]), cfg.decay ** (d - 1))
    if cfg.normalize:
        rows = w.sum(axis=1, keepdims=True)
        w = np.divide(w, rows, out=np.zeros_like(w), where=rows > 0)
    return w


def build_wan(tokens, vocab, cfg=WanConfig()):
    """Directed WAN on ``vocab`` as a :class:`Graph` (row ``u`` = transitions out of ``u``)."""
    return Graph(CSR.from_dense(wan_matrix(tokens, vocab, cfg)), directed=True)


def signature_graph(training_wans):
    """Sum the WANs, symmetrize as ``(A + A^T) / 2`` and normalize by the spectral radius."""
    wans = list(training_wans)
    if not wans:
        raise InvalidArgument("signature graph needs at least one WAN")
    n = wans[0].num_nodes
    total = np.zeros((n, n))
    for k, g in enumerate(wans):
        if g.num_nodes != n:
            raise InvalidArgument(f"WAN {k} has {g.num_nodes} nodes, expected {n} (vocabulary mismatch)")
        total += g.shift.to_dense()
    sym = 0.5 * (total + total.T)
    return normalize_by_spectral_radius(Graph.from_dense(sym, directed=False))


def frequency_signal(tokens, vocab):
    """Occurrence count of every function word, in vocabulary order."""
    ids = _word_ids(tokens, check_vocab(vocab))
    return np.bincount(ids[ids >= 0], minlength=len(vocab)).astype(float)


def assemble_author_dataset(corpus: Corpus, target_author, split_sizes, seed, cfg=WanConfig()):
    """Binary target-vs-rest dataset plus the target author's signature graph.

    ``split_sizes = (train, val, test)`` counts target excerpts per split; the
    same number of excerpts by other authors joins each split. Label 1 marks
    the target author. Only target training excerpts feed the signature graph.
    """
    sizes = tuple(int(s) for s in split_sizes)
    if len(sizes) != 3 or min(sizes) < 0:
        raise InvalidArgument(f"split_sizes must be three non-negative counts, got {split_sizes}")
    if sizes[0] < 1:
        raise InvalidArgument("the training split needs at least one target excerpt")
    own = corpus.by_author(target_author)
    other = [tokens for tokens, a in corpus.excerpts if a != target_author]
    need = sum(sizes)
    if len(own) < need or len(other) < need:
        raise InvalidArgument(
            f"need {need} excerpts per class, found {len(own)} by {target_author!r} and {len(other)} by others")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA17]))
    own_order = rng.permutation(len(own))
    other_order = rng.permutation(len(other))
    vocab = corpus.vocab
    parts, start = {}, 0
    train_own = None
    for split, size in zip(("train", "val", "test"), sizes):
        pick_own = [own[i] for i in own_order[start:start + size]]
        pick_other = [other[i] for i in other_order[start:start + size]]
        start += size
        if split == "train":
            train_own = pick_own
        texts = pick_own + pick_other
        x = np.array([frequency_signal(t, vocab) for t in texts]).reshape(len(texts), len(vocab))
        y = np.array([1] * size + [0] * size, dtype=np.int64)
        parts[split] = (x, y)
    graph = signature_graph(build_wan(t, vocab, cfg) for t in train_own)
    return Dataset.from_splits(2, **parts), graph


def export_dataset(dataset: Dataset, graph, vocab, out_dir):
    """Write ``signature.edges`` and ``signals.csv`` (vocab counts, split, label) under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(graph, out / "signature.edges")
    with open(out / "signals.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*vocab, "split", "label"])
        for x, split, label in zip(dataset.signals[..., 0], dataset.splits, dataset.labels):
            w.writerow([*(repr(float(v)) for v in x), split, int(label)])
