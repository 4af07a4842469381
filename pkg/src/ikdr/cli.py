"""Command-line interface: fit projections, transform data, evaluate tasks.

Reports are line-oriented `key=value` text grouped under `[section]` headers.
All numbers carry 17 significant digits so repeated runs with the same seed
diff byte-for-byte; wall-clock timing lives in its own trailing section and
is the only nondeterministic content.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import kernels as kn
from .baseline import stiefel_ascent
from .coupling import supervised_coupling
from .data_io import (
    DataError,
    ModelFile,
    MODEL_FORMAT,
    apply_standardization,
    load_csv,
    load_model,
    save_model,
    standardize,
)
from .metrics import MetricsError, cross_validate, nmi
from .paradigms import (
    ClusteringResult,
    ParadigmConfig,
    ParadigmError,
    alternative_clustering,
    semisupervised_dr,
    supervised_dr,
    unsupervised_dr,
)
from .solver import SolverError, ism_solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2

TASKS = ("supervised", "unsupervised", "semisup", "altclust")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x):
    return format(float(x), ".17g")


def _threads():
    raw = os.environ.get("ISM_THREADS")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise UsageError("ISM_THREADS must be an integer, got %r" % raw) from None
    if value < 1:
        raise UsageError("ISM_THREADS must be at least 1")
    return value


def _build_parser():
    parser = _Parser(prog="ikdr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="learn a projection and save the model")
    fit.add_argument("--data", required=True)
    fit.add_argument("--task", required=True, choices=TASKS)
    fit.add_argument("--kernel", required=True)
    fit.add_argument("--q", required=True, type=int)
    fit.add_argument("--labels-col")
    fit.add_argument("--scores")
    fit.add_argument("--clusters", type=int)
    fit.add_argument("--mu", type=float, default=1.0)
    fit.add_argument("--delta", type=float, default=0.01)
    fit.add_argument("--max-iter", type=int, default=50)
    fit.add_argument("--outer-iters", type=int, default=10)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--out-model", required=True)
    fit.add_argument("--report")

    tr = sub.add_parser("transform", help="project data through a saved model")
    tr.add_argument("--model", required=True)
    tr.add_argument("--data", required=True)
    tr.add_argument("--out", required=True)

    ev = sub.add_parser("eval", help="evaluate a task (cross-validation or NMI)")
    ev.add_argument("--data", required=True)
    ev.add_argument("--task", required=True, choices=TASKS)
    ev.add_argument("--kernel", required=True)
    ev.add_argument("--q", required=True, type=int)
    ev.add_argument("--labels-col", required=True)
    ev.add_argument("--scores")
    ev.add_argument("--clusters", type=int)
    ev.add_argument("--folds", type=int, default=10)
    ev.add_argument("--mu", type=float, default=1.0)
    ev.add_argument("--delta", type=float, default=0.01)
    ev.add_argument("--max-iter", type=int, default=50)
    ev.add_argument("--outer-iters", type=int, default=10)
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--baseline", action="store_true")
    ev.add_argument("--report")
    return parser


def _write_report(path, sections):
    lines = []
    for name, entries in sections:
        lines.append("[%s]" % name)
        for key, value in entries:
            lines.append("%s=%s" % (key, value))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _label_column(args):
    if args.labels_col is None:
        return None
    try:
        return int(args.labels_col)
    except ValueError:
        return args.labels_col


def _history_entries(history):
    return [
        ("iter_%d" % (i + 1), "%s,%s,%s" % (_fmt(r.cost), _fmt(r.eig_change), _fmt(r.angle)))
        for i, r in enumerate(history)
    ]


def _outer_entries(history):
    return [
        ("outer_%d" % (i + 1),
         "%s,%s,%s,%d" % (_fmt(r.objective), _fmt(r.cluster_term),
                          _fmt(r.dependence_term), r.distinct_labels))
        for i, r in enumerate(history)
    ]


def _run_paradigm(args, ds, spec):
    config = ParadigmConfig(
        q=args.q,
        clusters=args.clusters if args.clusters is not None else max(args.q, 2),
        mu=args.mu,
        delta=args.delta,
        outer_iters=args.outer_iters,
        max_iter=args.max_iter,
        seed=args.seed,
    )
    if args.task == "supervised":
        if ds.labels is None:
            raise UsageError("--task supervised requires --labels-col")
        res = supervised_dr(ds.X, ds.labels, spec, args.q,
                            delta=args.delta, max_iter=args.max_iter)
        return res, None
    if args.task == "unsupervised":
        return None, unsupervised_dr(ds.X, spec, config)
    if args.task == "semisup":
        if args.scores is None:
            raise UsageError("--task semisup requires --scores")
        scores = load_csv(args.scores).X
        return None, semisupervised_dr(ds.X, scores, spec, config)
    if ds.labels is None:
        raise UsageError("--task altclust requires --labels-col")
    return None, alternative_clustering(ds.X, ds.labels, spec, config)


def cmd_fit(args):
    t0 = time.perf_counter()
    kn.set_default_threads(_threads())
    if args.task == "unsupervised" and args.labels_col is not None:
        raise UsageError("--labels-col conflicts with --task unsupervised")
    if args.task == "semisup" and args.labels_col is not None:
        raise UsageError("--labels-col conflicts with --task semisup (use --scores)")
    ds = load_csv(args.data, label_column=_label_column(args))
    ds = standardize(ds)
    spec = kn.resolve(kn.parse_kernel_token(args.kernel), ds.X)
    proj, cluster = _run_paradigm(args, ds, spec)

    W = proj.W if proj is not None else cluster.W
    converged = proj.converged if proj is not None else cluster.converged
    model = ModelFile(MODEL_FORMAT, kn.kernel_token(spec), args.q,
                      ds.X.shape[1], ds.mean, ds.std, W)
    save_model(model, args.out_model)

    run_entries = [
        ("task", args.task),
        ("kernel", kn.kernel_token(spec)),
        ("q", str(args.q)),
        ("delta", _fmt(args.delta)),
        ("seed", str(args.seed)),
        ("n", str(ds.X.shape[0])),
        ("d", str(ds.X.shape[1])),
    ]
    sections = [("run", run_entries)]
    if proj is not None:
        sections.append(("result", [
            ("iterations", str(proj.iterations)),
            ("converged", "true" if proj.converged else "false"),
            ("cost", _fmt(proj.cost)),
            ("eigenvalues", ",".join(_fmt(v) for v in proj.eigenvalues)),
            ("eigengap", _fmt(proj.eigengap)),
        ]))
        sections.append(("history", _history_entries(proj.history)))
    else:
        entries = [
            ("converged", "true" if cluster.converged else "false"),
            ("clusters", str(len(np.unique(cluster.labels)))),
            ("objective", _fmt(cluster.history[-1].objective)),
        ]
        if cluster.nmi_vs_reference is not None:
            entries.append(("nmi_vs_original", _fmt(cluster.nmi_vs_reference)))
        sections.append(("result", entries))
        sections.append(("history", _outer_entries(cluster.history)))
    sections.append(("timing", [("wall_time_ms", _fmt((time.perf_counter() - t0) * 1e3))]))
    _write_report(args.report, sections)
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def cmd_transform(args):
    model = load_model(args.model)
    ds = load_csv(args.data)
    if ds.X.shape[1] != model.d:
        raise UsageError(
            "dimension mismatch: model expects d=%d, data has d=%d"
            % (model.d, ds.X.shape[1])
        )
    Z = apply_standardization(ds.X, model.mean, model.std) @ model.W
    header = ",".join("w%d" % (j + 1) for j in range(Z.shape[1]))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in Z:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return EXIT_OK


def cmd_eval(args):
    t0 = time.perf_counter()
    kn.set_default_threads(_threads())
    ds = load_csv(args.data, label_column=_label_column(args))
    if ds.labels is None:
        raise UsageError("eval requires a label column as ground truth")
    spec = kn.parse_kernel_token(args.kernel)
    if args.baseline and args.task != "supervised":
        raise UsageError("--baseline applies to --task supervised only")

    run_entries = [
        ("task", args.task),
        ("kernel", args.kernel),
        ("q", str(args.q)),
        ("delta", _fmt(args.delta)),
        ("seed", str(args.seed)),
        ("folds", str(args.folds)),
        ("n", str(ds.X.shape[0])),
        ("d", str(ds.X.shape[1])),
    ]
    sections = [("run", run_entries)]
    exit_code = EXIT_OK

    if args.task == "supervised":
        cv = cross_validate(ds.X, ds.labels, spec, args.q, folds=args.folds,
                            seed=args.seed, delta=args.delta, max_iter=args.max_iter)
        metrics = [
            ("accuracy_mean", _fmt(cv.mean_accuracy)),
            ("accuracy_std", _fmt(cv.std_accuracy)),
            ("cost_mean", _fmt(cv.mean_cost)),
            ("fold_iterations", ",".join(str(t) for t in cv.fold_iterations)),
        ]
        if args.baseline:
            std_ds = standardize(ds)
            rspec = kn.resolve(spec, std_ds.X)
            gamma = supervised_coupling(std_ds.labels)
            ism = ism_solve(std_ds.X, gamma, rspec, args.q,
                            delta=args.delta, max_iter=args.max_iter)
            base = stiefel_ascent(std_ds.X, gamma, rspec, args.q, seed=args.seed)
            metrics.append(("ism_cost", _fmt(ism.cost)))
            metrics.append(("baseline_cost", _fmt(base.cost)))
        sections.append(("metrics", metrics))
        if not cv.all_converged:
            exit_code = EXIT_NOT_CONVERGED
        timing = [("mean_fit_time_s", _fmt(cv.mean_time_s))]
    else:
        if args.task == "semisup" and args.scores is None:
            raise UsageError("--task semisup requires --scores")
        config = ParadigmConfig(
            q=args.q,
            clusters=args.clusters if args.clusters is not None else max(args.q, 2),
            mu=args.mu,
            delta=args.delta,
            outer_iters=args.outer_iters,
            max_iter=args.max_iter,
            seed=args.seed,
        )
        if args.task == "unsupervised":
            result = unsupervised_dr(standardize(ds).X, spec, config)
        elif args.task == "semisup":
            scores = load_csv(args.scores).X
            result = semisupervised_dr(standardize(ds).X, scores, spec, config)
        else:
            result = alternative_clustering(standardize(ds).X, ds.labels, spec, config)
        metrics = [("nmi_vs_truth", _fmt(nmi(result.labels, ds.labels)))]
        if result.nmi_vs_reference is not None:
            metrics.append(("nmi_vs_original", _fmt(result.nmi_vs_reference)))
        sections.append(("metrics", metrics))
        sections.append(("history", _outer_entries(result.history)))
        if not result.converged:
            exit_code = EXIT_NOT_CONVERGED
        timing = []
    timing.append(("wall_time_ms", _fmt((time.perf_counter() - t0) * 1e3)))
    sections.append(("timing", timing))
    _write_report(args.report, sections)
    return exit_code


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fit":
            return cmd_fit(args)
        if args.command == "transform":
            return cmd_transform(args)
        return cmd_eval(args)
    except UsageError as exc:
        sys.stderr.write("error: %s\n" % exc)
        sys.stderr.write("run 'ikdr --help' for usage\n")
        return EXIT_USAGE
    except (kn.KernelError, DataError, MetricsError, ParadigmError, SolverError,
            OSError, ValueError) as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
