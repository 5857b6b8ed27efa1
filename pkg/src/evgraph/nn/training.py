import csv
from dataclasses import dataclass

import numpy as np

from evgraph.errors import InvalidArgument
from evgraph.nn.optim import AdamState, adam_step


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    mean_train_loss: float
    train_accuracy: float
    val_accuracy: float | None = None


def _shuffle_rng(seed):
    # dedicated substream so shuffling never shares draws with initialization
    return np.random.default_rng(np.random.SeedSequence([seed, 0x5F1E]))


def train(model, dataset, config, graph=None, spectrum=None):
    """Mini-batch ADAM on the mean batch cross-entropy.

    Each epoch draws one permutation of the training split; the last short
    batch is kept. ``train_accuracy`` counts the predictions made on each batch
    just before its update. Returns ``(trained_model, trace)``.
    """
    x_train, y_train = dataset.subset("train")
    if len(y_train) == 0:
        raise InvalidArgument("training split is empty")
    has_val = dataset.size("val") > 0
    rng = _shuffle_rng(config.seed)
    params = model.parameters()
    state = AdamState()
    trace = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(y_train))
        total_loss, correct, batches = 0.0, 0, 0
        for start in range(0, len(order), config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads, probs = model.loss_and_grads(x_train[idx], y_train[idx], graph, spectrum)
            correct += int(np.sum(np.argmax(probs, axis=1) == y_train[idx]))
            total_loss += loss
            batches += 1
            params, state = adam_step(params, grads, state, config)
            model = model.with_parameters(params)
        val = evaluate(model, dataset, "val", graph, spectrum) if has_val else None
        trace.append(EpochRecord(epoch, total_loss / batches, correct / len(y_train), val))
    return model, trace


def predict(model, signals, graph=None, spectrum=None, chunk=500):
    """Argmax class per signal, ties to the lowest class index."""
    out = []
    for start in range(0, len(signals), chunk):
        probs = model.predict_proba(signals[start:start + chunk], graph, spectrum)
        out.append(np.argmax(probs, axis=1))
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def evaluate(model, dataset, split, graph=None, spectrum=None):
    x, y = dataset.subset(split)
    if len(y) == 0:
        raise InvalidArgument(f"{split} split is empty")
    return float(np.mean(predict(model, x, graph, spectrum) == y))


def write_trace(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "mean_train_loss", "train_accuracy", "val_accuracy"])
        for r in trace:
            w.writerow([r.epoch, repr(r.mean_train_loss), repr(r.train_accuracy),
                        "" if r.val_accuracy is None else repr(r.val_accuracy)])
