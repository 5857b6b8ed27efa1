from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument

SPLITS = ("train", "val", "test")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Graph signals ``(S, N, F)`` with 0-indexed class labels and a split tag per sample."""

    signals: np.ndarray
    labels: np.ndarray
    splits: np.ndarray
    num_classes: int

    def __post_init__(self):
        signals = np.asarray(self.signals, dtype=float)
        if signals.ndim == 2:
            signals = signals[..., None]
        labels = np.asarray(self.labels, dtype=np.int64)
        splits = np.asarray(self.splits, dtype=object)
        if signals.ndim != 3 or len(signals) != len(labels) or len(labels) != len(splits):
            raise InvalidArgument("signals, labels and splits must have matching lengths")
        if len(labels) and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise InvalidArgument(f"labels must lie in 0..{self.num_classes - 1}")
        bad = set(splits.tolist()) - set(SPLITS)
        if bad:
            raise InvalidArgument(f"unknown split tags {sorted(bad)}")
        object.__setattr__(self, "signals", signals)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "splits", splits)

    def subset(self, split):
        mask = self.splits == split
        return self.signals[mask], self.labels[mask]

    def size(self, split):
        return int(np.count_nonzero(self.splits == split))

    @classmethod
    def from_splits(cls, num_classes, **parts):
        """``Dataset.from_splits(C, train=(X, y), test=(X, y), ...)``."""
        signals, labels, tags = [], [], []
        for split in SPLITS:
            if split not in parts:
                continue
            x, y = parts[split]
            x = np.asarray(x, dtype=float)
            if x.ndim == 2:
                x = x[..., None]
            signals.append(x)
            labels.append(np.asarray(y, dtype=np.int64))
            tags += [split] * len(y)
        return cls(np.concatenate(signals), np.concatenate(labels), np.array(tags, dtype=object), num_classes)
