"""Source localization on stochastic block models.

A diffused Kronecker delta ``x = S^t delta_i`` is classified by the community
of its source node ``i``. Every architecture sees the same graphs and data
inside a run; only its initialization differs.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from evgraph.errors import ExperimentFailure, InvalidArgument
from evgraph.filters.base import power_states
from evgraph.graph import build_sbm, normalize_by_spectral_radius
from evgraph.nn import AdamConfig, Dataset, LayerSpec, build_model, evaluate, train
from evgraph.spectral import eigendecompose

MAX_GRAPH_RETRIES = 100
SOURCE_POLICIES = ("uniform", "max-degree")
NORMALIZED_TOL = 1e-8


def label_of_node(i, num_nodes, num_communities):
    """Community of 1-indexed node ``i`` under contiguous blocks: ``ceil(i * C / N)`` (1-indexed)."""
    if not 1 <= i <= num_nodes:
        raise InvalidArgument(f"node {i} outside 1..{num_nodes}")
    return math.ceil(i * num_communities / num_nodes)


def benchmark_architectures(order=4, num_knots=5, privileged_size=5, features=16):
    """The seven single-layer architectures compared in the benchmark, as ``(name, LayerSpec)``."""
    base = dict(in_features=1, out_features=features, order=order)
    return [
        ("Spectral", LayerSpec(in_features=1, out_features=features, family="spectral", num_knots=num_knots)),
        ("Polynomial", LayerSpec(family="polynomial", **base)),
        ("NV Degree", LayerSpec(family="node-variant", privileged_size=privileged_size, strategy="max-degree", **base)),
        ("NV S. Proxies", LayerSpec(family="node-variant", privileged_size=privileged_size,
                                    strategy="spectral-proxies", **base)),
        ("EV", LayerSpec(family="edge-variant", **base)),
        ("HEV Degree", LayerSpec(family="hybrid-ev", privileged_size=privileged_size, strategy="max-degree", **base)),
        ("HEV S. Proxies", LayerSpec(family="hybrid-ev", privileged_size=privileged_size,
                                     strategy="spectral-proxies", **base)),
    ]


@dataclass(frozen=True)
class SourceLocConfig:
    num_nodes: int = 50
    num_communities: int = 5
    p_intra: float = 0.8
    p_inter: float = 0.2
    num_train: int = 2000
    num_test: int = 200
    max_diffusion_time: int | None = None
    architectures: tuple = field(default_factory=lambda: tuple(benchmark_architectures()))
    adam: AdamConfig = field(default_factory=AdamConfig)
    num_graph_realizations: int = 2
    num_data_realizations: int = 5
    master_seed: int = 0
    workers: int = 1
    source_policy: str = "uniform"

    def __post_init__(self):
        if self.num_train < 1 or self.num_test < 1:
            raise InvalidArgument("num_train and num_test must be positive")
        if self.num_graph_realizations < 1 or self.num_data_realizations < 1:
            raise InvalidArgument("realization counts must be positive")
        if self.num_nodes % self.num_communities:
            raise InvalidArgument("num_nodes must be divisible by num_communities")
        t_max = self.time_horizon
        if not 0 <= t_max <= self.num_nodes:
            raise InvalidArgument(f"diffusion time range must lie within [0, {self.num_nodes}]")
        if self.source_policy not in SOURCE_POLICIES:
            raise InvalidArgument(f"source_policy must be one of {SOURCE_POLICIES}")
        if not self.architectures:
            raise InvalidArgument("at least one architecture is required")

    @property
    def time_horizon(self):
        return self.num_nodes if self.max_diffusion_time is None else self.max_diffusion_time

    @classmethod
    def full_scale(cls, **overrides):
        """Full benchmark scale: 10000 training samples, 10 graphs x 10 data sets."""
        base = dict(num_train=10000, num_graph_realizations=10, num_data_realizations=10)
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class RunRecord:
    run_id: int
    graph_seed: int
    data_seed: int
    architecture: str
    test_accuracy: float


@dataclass(frozen=True)
class ResultRow:
    architecture: str
    mean: float
    std: float
    runs: int


def _seed(*words):
    return int(np.random.SeedSequence(list(words)).generate_state(1, dtype=np.uint64)[0] >> 1)


def check_normalized(g):
    lam_max = g.spectral_radius
    if abs(lam_max - 1.0) > NORMALIZED_TOL:
        raise InvalidArgument(f"graph is not normalized (lambda_max = {lam_max:.6g})")


def diffusion_table(g, horizon):
    """``table[t][:, i] = S^t delta_i`` for ``t = 0..horizon`` by repeated sparse shifts."""
    return power_states(g, np.eye(g.num_nodes), horizon)


def community_sources(g, num_communities):
    """Representative source node of each community: its highest-degree member, ties to the lowest index."""
    block = g.num_nodes // num_communities
    degree = g.degrees
    return np.array([c * block + int(np.argmax(degree[c * block:(c + 1) * block])) for c in range(num_communities)])


def gen_source_samples(g, count, rng, num_communities, horizon=None, table=None, policy="uniform"):
    """Draw ``count`` diffused deltas and their 0-indexed source communities.

    Per sample: community uniform, ``t`` uniform in ``0..horizon``, signal
    ``S^t delta_i``. With ``policy="uniform"`` the source ``i`` is a uniform
    member of the community; with ``"max-degree"`` it is always the
    community's representative from :func:`community_sources`.
    """
    n = g.num_nodes
    horizon = n if horizon is None else horizon
    if table is None:
        check_normalized(g)
        table = diffusion_table(g, horizon)
    if policy not in SOURCE_POLICIES:
        raise InvalidArgument(f"unknown source policy {policy!r}")
    communities = rng.integers(num_communities, size=count)
    times = rng.integers(horizon + 1, size=count)
    if policy == "uniform":
        block = n // num_communities
        nodes = communities * block + rng.integers(block, size=count)
    else:
        nodes = community_sources(g, num_communities)[communities]
    signals = table[times, :, nodes]
    return signals, communities


def gen_source_sample(g, rng, num_communities, horizon=None, policy="uniform"):
    """One ``(signal, community)`` pair; see :func:`gen_source_samples`."""
    signals, labels = gen_source_samples(g, 1, rng, num_communities, horizon, policy=policy)
    return signals[0], int(labels[0])


def sample_connected_sbm(cfg, seed):
    """Draw SBMs until one is connected (bounded retries), then normalize it."""
    root = np.random.SeedSequence([seed])
    for attempt, child in enumerate(root.spawn(MAX_GRAPH_RETRIES)):
        g = build_sbm(cfg.num_nodes, cfg.num_communities, cfg.p_intra, cfg.p_inter, child)
        if g.num_directed_edges and g.is_connected():
            return normalize_by_spectral_radius(g)
    raise ExperimentFailure(f"no connected SBM after {MAX_GRAPH_RETRIES} draws (seed {seed})")


def _run_one(cfg, graph_index, data_index):
    run_id = graph_index * cfg.num_data_realizations + data_index
    graph_seed = _seed(cfg.master_seed, 1, graph_index)
    data_seed = _seed(cfg.master_seed, 2, graph_index, data_index)
    g = sample_connected_sbm(cfg, graph_seed)
    needs_spectrum = any(spec.family in ("spectral", "spectral-ev") for _, spec in cfg.architectures)
    spectrum = eigendecompose(g) if needs_spectrum else None
    table = diffusion_table(g, cfg.time_horizon)
    train_rng = np.random.default_rng(np.random.SeedSequence([data_seed, 0]))
    test_rng = np.random.default_rng(np.random.SeedSequence([data_seed, 1]))
    x_tr, y_tr = gen_source_samples(g, cfg.num_train, train_rng, cfg.num_communities, cfg.time_horizon, table,
                                    cfg.source_policy)
    x_te, y_te = gen_source_samples(g, cfg.num_test, test_rng, cfg.num_communities, cfg.time_horizon, table,
                                    cfg.source_policy)
    data = Dataset.from_splits(cfg.num_communities, train=(x_tr, y_tr), test=(x_te, y_te))
    records = []
    for arch_index, (name, spec) in enumerate(cfg.architectures):
        model_seed = _seed(cfg.master_seed, 3, arch_index, run_id)
        model = build_model([spec], cfg.num_communities, g, spectrum, seed=model_seed)
        model, _ = train(model, data, replace(cfg.adam, seed=model_seed), g, spectrum)
        acc = evaluate(model, data, "test", g, spectrum)
        records.append(RunRecord(run_id, graph_seed, data_seed, name, acc))
    return records


def run_source_localization(cfg: SourceLocConfig):
    """Train and test every architecture on every (graph, data) realization.

    Returns ``(results_table, run_records)``; records are ordered by run id then
    architecture, independent of ``cfg.workers``.
    """
    jobs = [(gi, di) for gi in range(cfg.num_graph_realizations) for di in range(cfg.num_data_realizations)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_one, cfg, gi, di) for gi, di in jobs]
            per_run = [f.result() for f in futures]
    else:
        per_run = [_run_one(cfg, gi, di) for gi, di in jobs]
    records = [r for run in per_run for r in run]
    return aggregate(records, [name for name, _ in cfg.architectures]), records


def aggregate(records, names):
    rows = []
    for name in names:
        acc = np.array([r.test_accuracy for r in records if r.architecture == name])
        rows.append(ResultRow(name, float(acc.mean()), float(acc.std()), len(acc)))
    return rows


def write_runs_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run_id", "graph_seed", "data_seed", "architecture", "test_accuracy"])
        for r in records:
            w.writerow([r.run_id, r.graph_seed, r.data_seed, r.architecture, repr(r.test_accuracy)])


def write_results_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["architecture", "mean_accuracy", "std_accuracy", "runs"])
        for r in rows:
            w.writerow([r.architecture, repr(r.mean), repr(r.std), r.runs])


def format_table(rows, title="Average performance (and std. dev.) for source localization"):
    width = max(len("Model"), *(len(r.architecture) for r in rows))
    lines = [title, f"{'Model':<{width}}  Accuracy", "-" * (width + 22)]
    for r in rows:
        lines.append(f"{r.architecture:<{width}}  {100 * r.mean:6.2f}(+- {100 * r.std:5.2f})%")
    return "\n".join(lines) + "\n"
