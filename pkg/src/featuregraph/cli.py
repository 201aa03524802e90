"""Command-line front end.

Subcommands reproduce the benchmark experiments end to end: `train` tunes a
shallow SVM and trains a feature graph, `bound` checks the generalisation
bound for a saved model pair, `stability` runs the leave-one-out harness,
`permute` searches permutations and reports correlation statistics, `bench`
compares the linear-regression, SVM and graph models on the synthetic task.

Every command is deterministic under a fixed --seed. Reports are written as
documents plus CSV tables; report figures are rendered as PNG files next to
the CSVs unless --no-plots is given. Exit codes: 0 success, 1 configuration
error, 2 data error, 3 numeric failure. The FGA_THREADS environment variable
caps the worker count for independent trials (0 = one worker per CPU).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, permutation, persistence, plots, training
from .dataset import Dataset, SplitSpec, apply_standardizer, fit_standardizer, gen_synthetic, load_csv, load_libsvm, split
from .errors import ConfigError, DataError, FeatureGraphError, NumericError
from .graph import build_layout, evaluate_batch
from .svr import DEFAULT_C_GRID, WIDE_C_GRID, SvrConfig, auto_tol, svr_train, tune_c
from .training import TrainConfig, sse, svm_baseline, train_layer_based, train_loss_optimized


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; config errors are 1
        raise ConfigError(message)


def _add_dataset_args(p: _Parser) -> None:
    p.add_argument("--data", help="path to a dataset file")
    p.add_argument("--format", choices=["libsvm", "csv"], help="dataset file format (default: by extension)")
    p.add_argument("--target", help="target column name for csv files")
    p.add_argument("--synthetic", metavar="SPEC", help="generate data instead, e.g. D=25,p=2,m=400")
    p.add_argument("--n-train", type=int, help="training rows; the rest become the test set")
    p.add_argument("--no-scale", action="store_true", help="skip feature standardization")
    p.add_argument(
        "--scale-y", action="store_true",
        help="standardize the target on training statistics; errors are then reported in scaled units",
    )


def _add_common_args(p: _Parser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="fga-out", help="output directory for reports and figures")
    p.add_argument("--no-plots", action="store_true", help="skip PNG rendering")
    p.add_argument("--timestamp", default=None, help="fixed timestamp for reproducible report files")


def _add_model_args(p: _Parser) -> None:
    p.add_argument("--group-size", "-M", type=int, default=4, help="features per node (default 4)")
    p.add_argument("--epsilon", type=float, default=0.1, help="SVR tube half-width (default 0.1)")
    p.add_argument("--c-grid", default="auto", help="'auto' (2^-2..2^5), 'wide' (10^-10..10^10) or comma list")
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds (default 5)")
    p.add_argument("--epsilon-stop", type=float, default=1e-4, help="relative sweep-improvement stop")
    p.add_argument("--max-sweeps", type=int, default=10)


def build_parser() -> _Parser:
    parser = _Parser(prog="featuregraph", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="tune a shallow SVM and train a feature graph")
    _add_dataset_args(p_train)
    _add_common_args(p_train)
    _add_model_args(p_train)
    p_train.add_argument("--strategy", choices=["layer", "loss-opt", "perm-search"], default="loss-opt")
    p_train.add_argument("--perms", type=int, default=50, help="permutations for perm-search")
    p_train.add_argument(
        "--grouping", choices=["correlated", "decorrelated", "identity"], default="correlated",
        help="leaf grouping heuristic for loss-opt",
    )

    p_bound = sub.add_parser("bound", help="verify the generalisation bound for a saved svm/fga pair")
    _add_dataset_args(p_bound)
    _add_common_args(p_bound)
    p_bound.add_argument("--svm", required=True, help="saved svm model document")
    p_bound.add_argument("--fga", required=True, help="saved fga model document")
    p_bound.add_argument("--delta", type=float, default=0.05)
    p_bound.add_argument("--eps-loss", type=float, default=0.1)
    p_bound.add_argument("--nodes", type=int, default=None, help="override the node count |V|")

    p_stab = sub.add_parser("stability", help="leave-one-out stability of SVM vs feature graph")
    _add_dataset_args(p_stab)
    _add_common_args(p_stab)
    _add_model_args(p_stab)
    p_stab.add_argument("--group-sizes", default=None, help="comma list of M values to sweep (default: just -M)")

    p_perm = sub.add_parser("permute", help="random permutation search with correlation statistics")
    _add_dataset_args(p_perm)
    _add_common_args(p_perm)
    _add_model_args(p_perm)
    p_perm.add_argument("--perms", type=int, default=50)
    p_perm.add_argument("--alpha", type=float, default=0.05, help="significance level for pair counts")

    p_bench = sub.add_parser("bench", help="LR / SVM / FGA comparison on the synthetic task")
    _add_dataset_args(p_bench)
    _add_common_args(p_bench)
    _add_model_args(p_bench)
    p_bench.add_argument("--perms", type=int, default=50)

    return parser


def _parse_synthetic(spec: str, seed: int) -> Dataset:
    fields = {}
    for part in spec.split(","):
        key, _, value = part.partition("=")
        if not value:
            raise ConfigError(f"bad synthetic spec element {part!r}; expected key=value")
        fields[key.strip()] = value.strip()
    try:
        D = int(fields.pop("D"))
        m = int(fields.pop("m"))
        p = int(fields.pop("p", "2"))
    except KeyError as exc:
        raise ConfigError(f"synthetic spec needs {exc.args[0]}=...") from exc
    except ValueError as exc:
        raise ConfigError(f"bad synthetic spec: {exc}") from exc
    if fields:
        raise ConfigError(f"unknown synthetic spec keys: {sorted(fields)}")
    return gen_synthetic(D, m, p, seed)


def _load_dataset(args) -> Dataset:
    if args.synthetic and args.data:
        raise ConfigError("give either --data or --synthetic, not both")
    if args.synthetic:
        return _parse_synthetic(args.synthetic, args.seed)
    if not args.data:
        raise ConfigError("no dataset: use --data PATH or --synthetic SPEC")
    path = Path(args.data)
    if not path.exists():
        raise DataError(f"dataset file not found: {path}")
    fmt = args.format
    if fmt is None:
        fmt = "csv" if path.suffix.lower() == ".csv" else "libsvm"
    if fmt == "csv":
        if not args.target:
            raise ConfigError("csv input needs --target COLUMN")
        return load_csv(path, args.target)
    return load_libsvm(path)


def _scale_targets(train: Dataset, test: Dataset | None) -> tuple[Dataset, Dataset | None]:
    mu = float(train.targets.mean())
    sd = float(train.targets.std(ddof=1)) if train.n_samples > 1 else 1.0
    if sd <= 0.0:
        sd = 1.0

    def rescale(ds: Dataset) -> Dataset:
        return Dataset(ds.features, (ds.targets - mu) / sd, ds.feature_names, name=ds.name)

    return rescale(train), (rescale(test) if test is not None else None)


def _prepare(args) -> tuple[Dataset, Dataset | None]:
    """Load, split, and standardize; returns (train, test-or-None)."""
    ds = _load_dataset(args)
    test = None
    train = ds
    if args.n_train is not None:
        train, test = split(ds, SplitSpec(n_train=args.n_train, seed=args.seed))
    if not args.no_scale:
        std = fit_standardizer(train)
        train = apply_standardizer(std, train)
        if test is not None:
            test = apply_standardizer(std, test)
    if args.scale_y:
        train, test = _scale_targets(train, test)
    return train, test


def _c_grid(args) -> tuple[float, ...]:
    raw = args.c_grid.strip().lower()
    if raw == "auto":
        return DEFAULT_C_GRID
    if raw == "wide":
        return WIDE_C_GRID
    try:
        grid = tuple(float(v) for v in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --c-grid {args.c_grid!r}: {exc}") from exc
    return grid


def _train_config(args, y, C: float) -> TrainConfig:
    svr_cfg = SvrConfig(C=C, epsilon=args.epsilon, tol=auto_tol(y, C), max_passes=10_000)
    return TrainConfig(
        epsilon_stop=args.epsilon_stop, max_sweeps=args.max_sweeps, svr=svr_cfg, seed=args.seed
    )


def _metadata(args, ds_name: str) -> dict:
    config = {
        key: (str(val) if isinstance(val, Path) else val)
        for key, val in sorted(vars(args).items())
        if key not in ("command", "timestamp") and val is not None
    }
    return {
        "dataset": ds_name,
        "seed": args.seed,
        "config": config,
        "timestamp": args.timestamp if args.timestamp is not None else persistence.now_timestamp(),
    }


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_table(headers, rows) -> None:
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    cells = [[fmt(v) for v in row] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(headers)]
    line = "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))
    print(line)
    print("-" * len(line))
    for row in cells:
        print("  ".join(row[i].rjust(widths[i]) for i in range(len(headers))))


def _write_csv(path, headers, rows) -> None:
    def fmt(v):
        if isinstance(v, float):
            return repr(v)
        return str(v)

    text = ",".join(headers) + "\n"
    for row in rows:
        text += ",".join(fmt(v) for v in row) + "\n"
    persistence.write_text_atomic(path, text)


def _report_payload(report: training.TrainReport) -> dict:
    return {
        "initial_error": report.initial_error,
        "final_error": report.final_error,
        "sweeps_run": report.sweeps_run,
        "retrained_count": report.retrained_count,
        "updates": [
            {
                "sweep": u.sweep,
                "node": [u.node[0], u.node[1]],
                "candidate_error": u.candidate_error,
                "accepted": u.accepted,
            }
            for u in report.updates
        ],
    }


def _pick_perm(args, train: Dataset) -> np.ndarray:
    if args.grouping == "identity" or train.n_features < 2:
        return np.arange(train.n_features)
    mode = "correlate" if args.grouping == "correlated" else "decorrelate"
    return permutation.heuristic_permutation(train, args.group_size, mode=mode)


def cmd_train(args) -> int:
    train, test = _prepare(args)
    out = _out_dir(args)
    svm_model, C = svm_baseline(
        train, grid=_c_grid(args), k=args.folds, seed=args.seed, epsilon=args.epsilon
    )
    cfg = _train_config(args, train.targets, C)
    M = args.group_size
    if args.strategy == "layer":
        graph, report = train_layer_based(train, M, cfg)
        method = "fga-layer"
    elif args.strategy == "loss-opt":
        graph, report = train_loss_optimized(train, svm_model, M, _pick_perm(args, train), cfg)
        method = "fga-loss-opt"
    else:
        result = permutation.random_perm_search(
            train, svm_model, M, cfg, n_perms=args.perms, seed=args.seed, test=test
        )
        graph, report = result.best_graph, result.best_report
        method = "fga-perm-search"

    svm_train_sse = sse(svm_model.predict(train.features), train.targets)
    fga_train_sse = sse(evaluate_batch(graph, train.features), train.targets)
    rows = [["tuned-svm", train.n_samples, test.n_samples if test else 0, train.n_features, svm_train_sse]]
    fga_row = [method, train.n_samples, test.n_samples if test else 0, train.n_features, fga_train_sse]
    if test is not None:
        rows[0].append(sse(svm_model.predict(test.features), test.targets))
        fga_row.append(sse(evaluate_batch(graph, test.features), test.targets))
    rows.append(fga_row)
    headers = ["method", "n_train", "n_test", "D", "train_sse"] + (["test_sse"] if test is not None else [])
    print(f"dataset: {train.name}   tuned C: {C:g}   nodes: {graph.n_nodes}   retrained: {report.retrained_count}")
    _print_table(headers, rows)

    meta = _metadata(args, train.name)
    persistence.save(persistence.document_from_model(svm_model, meta), out / "svm_model.json")
    persistence.save(persistence.document_from_graph(graph, meta), out / "fga_model.json")
    persistence.write_document(out / "train_report.json", {"metadata": meta, "tuned_C": C, "report": _report_payload(report)})
    _write_csv(out / "train_summary.csv", ["method"] + headers[1:], rows)
    if test is not None:
        svm_pred = svm_model.predict(test.features)
        fga_pred = evaluate_batch(graph, test.features)
        _write_csv(
            out / "pred_vs_actual.csv",
            ["actual", "svm_pred", "fga_pred"],
            list(zip(test.targets.tolist(), svm_pred.tolist(), fga_pred.tolist())),
        )
        if not args.no_plots:
            plots.save_pred_vs_actual(out / "pred_vs_actual.png", test.targets, svm_pred, fga_pred)
    print(f"wrote {out}/svm_model.json, fga_model.json, train_report.json, train_summary.csv")
    return 0


def cmd_bound(args) -> int:
    if not (0.0 < args.delta < 1.0):
        raise ConfigError(f"--delta must be in (0, 1), got {args.delta}")
    train, test = _prepare(args)
    if test is None:
        raise ConfigError("bound verification needs a test split; pass --n-train")
    svm_model = persistence.model_from_document(persistence.load(args.svm))
    graph = persistence.graph_from_document(persistence.load(args.fga))
    report = analysis.verify_bound(train, test, svm_model, graph, delta=args.delta, eps_loss=args.eps_loss)
    inputs = report.inputs
    if args.nodes is not None:
        if args.nodes < 0:
            raise ConfigError("--nodes must be >= 0")
        inputs = analysis.BoundInputs(
            r=report.inputs.r, Lambda=report.inputs.Lambda, m=report.inputs.m,
            delta=args.delta, eps_loss=args.eps_loss, V=args.nodes,
        )
        rhs = analysis.bound_rhs_diff(inputs, report.train_loss_fga, report.train_loss_svm)
        report = analysis.BoundReport(
            rhs_diff=rhs,
            rhs_abs=analysis.bound_rhs_abs(inputs, report.train_loss_fga),
            lhs_diff=report.lhs_diff,
            satisfied=bool(report.lhs_diff <= rhs),
            confidence_diff=1.0 - inputs.V * args.delta,
            confidence_abs=1.0 - (inputs.V + 1) * args.delta,
            inputs=inputs,
            train_loss_svm=report.train_loss_svm,
            train_loss_fga=report.train_loss_fga,
            test_loss_svm=report.test_loss_svm,
            test_loss_fga=report.test_loss_fga,
            train_sse_svm=report.train_sse_svm,
            train_sse_fga=report.train_sse_fga,
            test_sse_svm=report.test_sse_svm,
            test_sse_fga=report.test_sse_fga,
            degenerate=report.degenerate,
        )
    _print_table(
        ["quantity", "value"],
        [
            ["|V|", inputs.V],
            ["r", inputs.r],
            ["Lambda", inputs.Lambda],
            ["train loss svm (mean eps-ins.)", report.train_loss_svm],
            ["train loss fga (mean eps-ins.)", report.train_loss_fga],
            ["test loss diff (lhs)", report.lhs_diff],
            ["bound rhs (diff)", report.rhs_diff],
            ["bound rhs (absolute)", report.rhs_abs],
            ["confidence (diff)", report.confidence_diff],
            ["satisfied", str(report.satisfied)],
        ],
    )
    if report.degenerate:
        print("warning: r = 0 (all-zero node inputs); the bound is vacuous", file=sys.stderr)
    if not report.satisfied:
        print("warning: observed test-loss difference exceeds the bound", file=sys.stderr)
    out = _out_dir(args)
    persistence.write_document(
        out / "bound_report.json",
        {
            "metadata": _metadata(args, train.name),
            "inputs": {
                "r": inputs.r, "Lambda": inputs.Lambda, "m": inputs.m,
                "delta": inputs.delta, "eps_loss": inputs.eps_loss, "V": inputs.V,
            },
            "rhs_diff": report.rhs_diff,
            "rhs_abs": report.rhs_abs,
            "lhs_diff": report.lhs_diff,
            "satisfied": report.satisfied,
            "confidence_diff": report.confidence_diff,
            "confidence_abs": report.confidence_abs,
            "train_loss_svm": report.train_loss_svm,
            "train_loss_fga": report.train_loss_fga,
            "test_loss_svm": report.test_loss_svm,
            "test_loss_fga": report.test_loss_fga,
            "train_sse_svm": report.train_sse_svm,
            "train_sse_fga": report.train_sse_fga,
            "test_sse_svm": report.test_sse_svm,
            "test_sse_fga": report.test_sse_fga,
        },
    )
    print(f"wrote {out}/bound_report.json")
    return 0


def _make_trainers(args, train: Dataset, C: float, M: int):
    cfg = _train_config(args, train.targets, C)

    def svm_trainer(d: Dataset):
        model = svr_train(d.features, d.targets, cfg.svr).model
        return model.predict

    def fga_trainer(d: Dataset):
        svm_model = svr_train(d.features, d.targets, cfg.svr).model
        perm = np.arange(d.n_features)
        graph, _ = train_loss_optimized(d, svm_model, M, perm, cfg)
        return lambda X: evaluate_batch(graph, X)

    return cfg, svm_trainer, fga_trainer


def cmd_stability(args) -> int:
    train, probe = _prepare(args)
    if probe is None:
        raise ConfigError("stability needs a probe split; pass --n-train")
    if train.n_samples < 2:
        raise ConfigError("stability needs at least two training rows")
    group_sizes = [args.group_size]
    if args.group_sizes:
        try:
            group_sizes = [int(v) for v in args.group_sizes.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --group-sizes: {exc}") from exc
    C, _ = tune_c(
        train.features, train.targets, grid=_c_grid(args),
        k=min(args.folds, train.n_samples), seed=args.seed, epsilon=args.epsilon,
    )
    out = _out_dir(args)
    rows = []
    per_removal_rows = []
    for M in group_sizes:
        cfg, svm_trainer, fga_trainer = _make_trainers(args, train, C, M)
        layout = build_layout(train.n_features, M)
        graph, _ = train_loss_optimized(
            train, svr_train(train.features, train.targets, cfg.svr).model, M,
            np.arange(train.n_features), cfg,
        )
        report = analysis.stability_report(train, svm_trainer, fga_trainer, probe, graph=graph)
        rows.append(
            [layout.n_layers, M, report.svm.mean_norm, report.fga.mean_norm, report.ratio, report.predicted_beta]
        )
        for i, (sn, fn) in enumerate(zip(report.svm.per_removal_norms, report.fga.per_removal_norms)):
            per_removal_rows.append([M, i, float(sn), float(fn)])
        if not args.no_plots:
            plots.save_stability_hist(
                out / f"stability_hist_M{M}.png", report.svm.per_removal_norms, report.fga.per_removal_norms
            )
    headers = ["L", "M", "svm_mean_norm", "fga_mean_norm", "ratio", "predicted_beta"]
    print(f"dataset: {train.name}   tuned C: {C:g}   removals: {train.n_samples}")
    _print_table(headers, rows)
    _write_csv(out / "stability.csv", headers, rows)
    _write_csv(out / "stability_removals.csv", ["M", "removed_index", "svm_norm", "fga_norm"], per_removal_rows)
    persistence.write_document(
        out / "stability_report.json",
        {
            "metadata": _metadata(args, train.name),
            "tuned_C": C,
            "rows": [dict(zip(headers, row)) for row in rows],
        },
    )
    print(f"wrote {out}/stability.csv, stability_removals.csv, stability_report.json")
    return 0


def cmd_permute(args) -> int:
    train, test = _prepare(args)
    svm_model, C = svm_baseline(
        train, grid=_c_grid(args), k=args.folds, seed=args.seed, epsilon=args.epsilon
    )
    cfg = _train_config(args, train.targets, C)
    M = args.group_size
    result = permutation.random_perm_search(
        train, svm_model, M, cfg, n_perms=args.perms, seed=args.seed, test=test
    )
    # rebuild each trial's permutation to attach correlation statistics
    D = train.n_features
    trace_rows = []
    best = float("inf")
    improvement = 0
    for trial in result.trials:
        if trial.train_sse >= best:
            continue
        best = trial.train_sse
        improvement += 1
        if trial.seed is None:
            perm = permutation.heuristic_permutation(train, M) if D >= 2 else np.arange(D)
        else:
            perm = np.random.default_rng(trial.seed).permutation(D)
        stats = permutation.adjacent_sig_stats(train, perm, M, alpha=args.alpha)
        trace_rows.append(
            [improvement, trial.index, best, stats.sig_count, stats.sig_p_sum, stats.sig_r_mean]
        )
    headers = ["improvement", "trial", "best_train_sse", "sig_pairs", "sig_p_sum", "sig_r_mean"]
    print(f"dataset: {train.name}   tuned C: {C:g}   trials: {len(result.trials)}")
    _print_table(headers, trace_rows)
    # which grouping heuristic wins on this dataset
    if D >= 2:
        decor = permutation.heuristic_permutation(train, M, mode="decorrelate")
        _, rep_decor = train_loss_optimized(train, svm_model, M, decor, cfg)
        corr_sse = result.trials[0].train_sse
        winner = "correlated" if corr_sse <= rep_decor.final_error else "decorrelated"
        print(
            f"heuristic comparison: correlated-groups sse {corr_sse:.6g}, "
            f"decorrelated-groups sse {rep_decor.final_error:.6g} -> {winner} wins"
        )
    out = _out_dir(args)
    _write_csv(out / "perm_trace.csv", headers, trace_rows)
    persistence.write_document(
        out / "perm_report.json",
        {
            "metadata": _metadata(args, train.name),
            "tuned_C": C,
            "best_train_sse": result.best_train_sse,
            "best_test_sse": result.best_test_sse,
            "best_perm": [int(v) for v in result.best_perm],
            "trials": [
                {"index": t.index, "seed": t.seed, "train_sse": t.train_sse} for t in result.trials
            ],
        },
    )
    if trace_rows and not args.no_plots:
        plots.save_perm_trace(
            out / "perm_trace.png",
            [r[0] for r in trace_rows],
            [r[2] for r in trace_rows],
            [r[3] for r in trace_rows],
        )
    print(f"wrote {out}/perm_trace.csv, perm_report.json")
    return 0


def cmd_bench(args) -> int:
    if not args.synthetic and not args.data:
        args.synthetic = "D=25,p=2,m=400"
    if args.n_train is None:
        args.n_train = 200 if args.synthetic else None
    train, test = _prepare(args)
    if test is None:
        raise ConfigError("bench needs a test split; pass --n-train")
    out = _out_dir(args)
    lr_model = training.linreg_baseline(train)
    svm_model, C = svm_baseline(
        train, grid=_c_grid(args), k=args.folds, seed=args.seed, epsilon=args.epsilon
    )
    cfg = _train_config(args, train.targets, C)
    M = args.group_size
    perm0 = (
        permutation.heuristic_permutation(train, M)
        if train.n_features >= 2
        else np.arange(train.n_features)
    )
    graph_one, _ = train_loss_optimized(train, svm_model, M, perm0, cfg)
    search = permutation.random_perm_search(
        train, svm_model, M, cfg, n_perms=args.perms, seed=args.seed, test=test
    )
    models = [
        ("lr", lr_model.predict),
        ("tuned-svm", svm_model.predict),
        ("fga-loss-opt", lambda X: evaluate_batch(graph_one, X)),
        ("fga-perm-search", lambda X: evaluate_batch(search.best_graph, X)),
    ]
    rows = []
    for name, predict in models:
        rows.append(
            [
                name,
                train.n_samples,
                test.n_samples,
                train.n_features,
                sse(predict(train.features), train.targets),
                sse(predict(test.features), test.targets),
            ]
        )
    headers = ["model", "n_train", "n_test", "D", "train_sse", "test_sse"]
    print(f"dataset: {train.name}   tuned C: {C:g}")
    _print_table(headers, rows)
    _write_csv(out / "bench.csv", headers, rows)
    svm_pred = svm_model.predict(test.features)
    fga_pred = evaluate_batch(search.best_graph, test.features)
    _write_csv(
        out / "pred_vs_actual.csv",
        ["actual", "svm_pred", "fga_pred"],
        list(zip(test.targets.tolist(), svm_pred.tolist(), fga_pred.tolist())),
    )
    persistence.write_document(
        out / "bench_report.json",
        {
            "metadata": _metadata(args, train.name),
            "tuned_C": C,
            "rows": [dict(zip(headers, row)) for row in rows],
        },
    )
    if not args.no_plots:
        plots.save_pred_vs_actual(out / "pred_vs_actual.png", test.targets, svm_pred, fga_pred)
    print(f"wrote {out}/bench.csv, pred_vs_actual.csv, bench_report.json")
    return 0


_COMMANDS = {
    "train": cmd_train,
    "bound": cmd_bound,
    "stability": cmd_stability,
    "permute": cmd_permute,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help and friends
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FeatureGraphError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
