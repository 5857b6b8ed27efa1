"""``evgraph`` command-line entry point.

Exit status: 0 success, 1 runtime failure, 2 configuration or usage error.
Every output goes under ``--out`` with a fixed file name:

* ``source-loc``: ``runs.csv``, ``results.csv``, ``results.txt``
* ``author``: ``accuracy.csv``, ``trace.csv``, ``model.json``, ``signature.edges``, ``signals.csv``
* ``gradcheck``: ``gradcheck.csv`` (only with ``--out``)
* ``spectral-response``: ``response.csv``
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from evgraph import config as cfgmod
from evgraph.config import ConfigError
from evgraph.errors import EvGraphError, InvalidArgument

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2
OFF_DIAGONAL_TOL = 1e-8


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageExit(message)


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--out", help="output directory (created if missing)")
    common.add_argument("--workers", type=int, help="worker processes (overrides the config key)")
    common.add_argument("--dry-run", action="store_true", help="validate and print settings, write nothing")

    p = _Parser(prog="evgraph", description="Edge-variant graph neural network experiments.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("source-loc", parents=[common], help="source localization benchmark on SBM graphs")
    a = sub.add_parser("author", parents=[common], help="authorship attribution on word adjacency networks")
    a.add_argument("corpus", help="directory laid out as <author>/<excerpt>.txt")
    gc = sub.add_parser("gradcheck", parents=[common], help="finite-difference check of every filter family")
    gc.add_argument("--seed", type=int, help="overrides master_seed")
    gc.add_argument("--tolerance", type=float, help="overrides the tolerance key")
    sr = sub.add_parser("spectral-response", parents=[common], help="frequency response of an archived filter")
    sr.add_argument("graph", help="graph in edge-list format")
    sr.add_argument("filter", help="filter archive (JSON)")
    return p


def _out_dir(args, required=True):
    if args.out is None:
        if required:
            raise ConfigError("--out is required for this command")
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dry_run(settings):
    sys.stdout.write(cfgmod.format_settings(settings))
    return EXIT_OK


# -- source localization --------------------------------------------------------
def _source_loc_config(settings):
    from evgraph.experiments import SourceLocConfig, benchmark_architectures
    from evgraph.nn import AdamConfig

    archs = benchmark_architectures(settings["order"], settings["num_knots"], settings["privileged_size"],
                                settings["features"])
    if settings["architectures"]:
        known = dict(archs)
        missing = [name for name in settings["architectures"] if name not in known]
        if missing:
            raise ConfigError(f"unknown architectures {missing}; choose from {sorted(known)}")
        archs = [(name, known[name]) for name in settings["architectures"]]
    full = settings["scale"] == "full"
    adam = AdamConfig(settings["learning_rate"], settings["beta1"], settings["beta2"], settings["epsilon"],
                      settings["epochs"], settings["batch_size"], settings["master_seed"])

    def pick(key, desk, big):
        return settings[key] if settings[key] is not None else (big if full else desk)

    return SourceLocConfig(
        num_nodes=settings["num_nodes"], num_communities=settings["num_communities"],
        p_intra=settings["p_intra"], p_inter=settings["p_inter"],
        num_train=pick("num_train", 2000, 10000), num_test=settings["num_test"],
        max_diffusion_time=settings["max_diffusion_time"], architectures=tuple(archs), adam=adam,
        num_graph_realizations=pick("num_graph_realizations", 2, 10),
        num_data_realizations=pick("num_data_realizations", 5, 10),
        master_seed=settings["master_seed"], workers=settings["workers"],
        source_policy=settings["source_policy"],
    )


def cmd_source_loc(args, settings):
    from evgraph.experiments import format_table, run_source_localization, write_results_csv, write_runs_csv

    try:
        cfg = _source_loc_config(settings)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from None
    if args.dry_run:
        return _dry_run(settings)
    out = _out_dir(args)
    rows, records = run_source_localization(cfg)
    write_runs_csv(records, out / "runs.csv")
    write_results_csv(rows, out / "results.csv")
    table = format_table(rows)
    (out / "results.txt").write_text(table)
    sys.stdout.write(table)
    return EXIT_OK


# -- authorship attribution ---------------------------------------------------------
def cmd_author(args, settings):
    from evgraph import wan
    from evgraph.nn import AdamConfig, LayerSpec, build_model, evaluate, train, write_trace
    from evgraph.spectral import eigendecompose

    try:
        vocab = wan.load_function_words(settings["function_words"])
        wcfg = wan.WanConfig(settings["window"], settings["decay"], settings["normalize"])
        spec = LayerSpec(1, settings["features"], settings["family"], order=settings["order"],
                         num_knots=settings["num_knots"], privileged_size=settings["privileged_size"],
                         strategy=settings["strategy"])
        adam = AdamConfig(settings["learning_rate"], settings["beta1"], settings["beta2"], settings["epsilon"],
                          settings["epochs"], settings["batch_size"], settings["master_seed"])
        corpus = wan.read_corpus(args.corpus, vocab)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from None
    authors = corpus.authors
    target = settings["target_author"] or authors[0]
    if target not in authors:
        raise ConfigError(f"target_author {target!r} not found; corpus has {authors}")
    if len(authors) < 2:
        raise ConfigError(f"corpus needs at least two authors, found {authors}")
    sizes = (settings["split_train"], settings["split_val"], settings["split_test"])
    try:
        data, graph = wan.assemble_author_dataset(corpus, target, sizes, settings["master_seed"], wcfg)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from None
    if args.dry_run:
        return _dry_run(settings)
    out = _out_dir(args)
    spectrum = eigendecompose(graph)
    seeds = np.random.SeedSequence([settings["master_seed"], 0xA7]).generate_state(2)
    model = build_model([spec], 2, graph, spectrum, seed=int(seeds[0]))
    model, trace = train(model, data, adam, graph, spectrum)
    wan.export_dataset(data, graph, vocab, out)
    write_trace(trace, out / "trace.csv")
    (out / "model.json").write_text(json.dumps(model.to_dict(), sort_keys=True) + "\n")
    with open(out / "accuracy.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["split", "samples", "accuracy"])
        for split in ("train", "val", "test"):
            n = data.size(split)
            acc = evaluate(model, data, split, graph, spectrum) if n else float("nan")
            w.writerow([split, n, repr(float(acc))])
            print(f"{split:5s} {n:5d} samples  accuracy {acc:.4f}")
    return EXIT_OK


# -- gradient check -----------------------------------------------------------------
def cmd_gradcheck(args, settings):
    from evgraph.gradcheck import run_suite

    seed = settings["master_seed"] if args.seed is None else args.seed
    tol = settings["tolerance"] if args.tolerance is None else args.tolerance
    if tol < 0 or not np.isfinite(tol):
        raise ConfigError(f"tolerance must be a non-negative number, got {tol}")
    if args.dry_run:
        return _dry_run(settings)
    errors = run_suite(seed=seed, num_checks=settings["num_checks"])
    ok = True
    for fam, err in errors.items():
        passed = err < tol
        ok &= passed
        print(f"{fam:13s} max relative error {err:.3e}  {'ok' if passed else 'FAIL'}")
    out = _out_dir(args, required=False)
    if out is not None:
        with open(out / "gradcheck.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["family", "max_relative_error", "tolerance", "passed"])
            for fam, err in errors.items():
                w.writerow([fam, repr(err), repr(tol), int(err < tol)])
    return EXIT_OK if ok else EXIT_RUNTIME


# -- spectral response ----------------------------------------------------------------
def spectral_response(params, graph, spectrum):
    """``(eigenvalues, responses (N, O*I), off_diagonal_energy)`` of a filter bank.

    Shift-invariant families use their closed-form transfer function; the
    others report the diagonal of ``U^T H U`` and its off-diagonal energy.
    """
    from evgraph.filters import dense_operator

    lam, u = spectrum.eigenvalues, spectrum.eigenvectors
    fo, fi = params.feature_shape
    h = np.empty((len(lam), fo * fi))
    energy = 0.0
    if params.family == "polynomial":
        powers = lam[:, None] ** np.arange(params.taps.shape[0])[None, :]
        h[:] = np.einsum("nk,koi->noi", powers, params.taps).reshape(len(lam), -1)
    elif params.family in ("spectral", "spectral-ev"):
        h[:] = params.response().reshape(len(lam), -1)
    else:
        ops = dense_operator(params, graph, spectrum)
        for o in range(fo):
            for i in range(fi):
                m = u.T @ ops[o, i] @ u
                h[:, o * fi + i] = np.diag(m)
                energy += float(np.sum(m**2) - np.sum(np.diag(m) ** 2))
    return lam, h, energy


def cmd_spectral_response(args, settings):
    from evgraph.filters import filter_from_dict
    from evgraph.graph import read_edge_list
    from evgraph.spectral import eigendecompose

    for path in (args.graph, args.filter):
        if not Path(path).is_file():
            raise ConfigError(f"file not found: {path}")
    try:
        graph = read_edge_list(args.graph)
        params = filter_from_dict(json.loads(Path(args.filter).read_text()))
    except (InvalidArgument, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load inputs: {exc}") from None
    if graph.directed:
        raise ConfigError("spectral response needs an undirected (symmetric) graph")
    if args.dry_run:
        return _dry_run(settings)
    out = _out_dir(args)
    spectrum = eigendecompose(graph)
    lam, h, energy = spectral_response(params, graph, spectrum)
    fo, fi = params.feature_shape
    flag = "non-diagonal" if energy > OFF_DIAGONAL_TOL else "diagonal"
    cols = ["h"] if fo * fi == 1 else [f"h_{o + 1}_{i + 1}" for o in range(fo) for i in range(fi)]
    with open(out / "response.csv", "w", newline="") as fh:
        fh.write(f"# response: {flag}; off_diagonal_energy = {energy!r}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", *cols])
        for n in range(len(lam)):
            w.writerow([repr(float(lam[n])), *(repr(float(v)) for v in h[n])])
    print(f"wrote {len(lam)} rows ({flag}) to {out / 'response.csv'}")
    return EXIT_OK


COMMANDS = {
    "source-loc": cmd_source_loc,
    "author": cmd_author,
    "gradcheck": cmd_gradcheck,
    "spectral-response": cmd_spectral_response,
}


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit as exc:
        print(f"evgraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        settings = cfgmod.load(args.command, args.config)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError(f"--workers must be >= 1, got {args.workers}")
            settings["workers"] = args.workers
        return COMMANDS[args.command](args, settings)
    except ConfigError as exc:
        print(f"evgraph: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EvGraphError as exc:
        print(f"evgraph: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"evgraph: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
