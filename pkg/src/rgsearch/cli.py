"""Command-line front end: split, search, report, explain, render."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import engine, explain, plots
from .data import (Dataset, encode, load_dataset, load_feature_list, load_folds, load_schema,
                   make_folds, save_schema, stratified_holdout, subset_features, write_dataset,
                   write_folds)
from .errors import DataError, RGSError, UsageError
from .learners import dump_model, encoding_for, load_model
from .metrics import RocCurve, write_roc
from .space import builtin_space, check_method, load_space_file

SPLIT_FILES = ("schema.json", "train_test.csv", "validation.csv", "folds.csv")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError("USAGE", message)


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise UsageError("PATH", f"{path} does not exist")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults; command-line flags win")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", default="out")

    p = _Parser(prog="rgsearch", description="Randomized grid search for binary outcome prediction.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("split", parents=[common], help="stratified train-test/validation split and fold plan")
    s.add_argument("--data", required=True)
    s.add_argument("--schema", required=True)
    s.add_argument("--ratio", type=float, default=0.8, help="train-test fraction per class")
    s.add_argument("--k", type=int, default=5)

    s = sub.add_parser("search", parents=[common], help="grid search one method")
    s.add_argument("--split", required=True, help="directory written by 'split'")
    s.add_argument("--method", required=True)
    s.add_argument("--n-hypes", type=int, default=50)
    s.add_argument("--scale", choices=("full", "desk"), default="desk")
    s.add_argument("--space", help="JSON space file overriding the built-in space")
    s.add_argument("--features", help="file listing the predictors to keep, one per line")
    s.add_argument("--label", default="", help="horizon label, e.g. 15year")
    s.add_argument("--sampling-seed", type=int)
    s.add_argument("--training-seed", type=int)

    s = sub.add_parser("report", parents=[common], help="compare searches; ranking and ROC plots")
    s.add_argument("inputs", nargs="+", help="search directories or summary.json files")
    s.add_argument("--top", type=int, default=20)

    s = sub.add_parser("explain", parents=[common], help="Shapley values for the refit best model")
    s.add_argument("--search", required=True, help="directory written by 'search'")
    s.add_argument("--clusters", type=int, default=explain.DEFAULT_CLUSTERS)
    s.add_argument("--mode", choices=("auto", "exact", "sampled"), default="auto")
    s.add_argument("--permutations", type=int, default=2000)
    s.add_argument("--max-cases", type=int)

    s = sub.add_parser("render", parents=[common], help="render a plot spec to SVG")
    s.add_argument("spec")
    return p


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    path = pre.parse_known_args(argv)[0].config
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if path and command:
        try:
            cfg = json.loads(_existing(path).read_text())
        except json.JSONDecodeError as e:
            raise UsageError("CONFIG", f"{path}: invalid JSON ({e.msg})") from e
        if not isinstance(cfg, dict):
            raise UsageError("CONFIG", f"{path}: expected a JSON object of options")
        sub = choices[command]
        known = {a.dest for a in sub._actions}
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        unknown = [k for k in cfg if k not in known or k == "config"]
        if unknown:
            raise UsageError("CONFIG", f"{path}: unknown option {unknown[0]!r}")
        for a in sub._actions:
            if a.dest in cfg:
                a.required = False
        sub.set_defaults(**cfg)
    return parser.parse_args(argv)


# --- split --------------------------------------------------------------------------------

def cmd_split(args) -> int:
    if not 0.0 < args.ratio < 1.0:
        raise UsageError("RATIO", f"--ratio must lie in (0, 1), got {args.ratio}")
    if args.k < 2:
        raise UsageError("FOLDS", f"--k must be >= 2, got {args.k}")
    schema = load_schema(_existing(args.schema))
    d = load_dataset(_existing(args.data), schema)
    tt, va = stratified_holdout(d, args.ratio, args.seed)
    folds = make_folds(tt, args.k, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_schema(schema, out / "schema.json")
    write_dataset(tt, out / "train_test.csv")
    write_dataset(va, out / "validation.csv")
    write_folds(folds, tt, out / "folds.csv")
    info = {"seed": args.seed, "ratio": args.ratio, "k": args.k,
            "train_test": {"cases": tt.n_cases, "positive": tt.n_positive, "negative": tt.n_negative},
            "validation": {"cases": va.n_cases, "positive": va.n_positive, "negative": va.n_negative}}
    (out / "split.json").write_text(json.dumps(info, indent=2) + "\n")
    print(f"train-test: {tt.n_cases} cases ({tt.n_positive} positive, {tt.n_negative} negative)")
    print(f"validation: {va.n_cases} cases ({va.n_positive} positive, {va.n_negative} negative)")
    return 0


def load_split(directory, features=None):
    directory = _existing(directory)
    for name in SPLIT_FILES:
        if not (directory / name).exists():
            raise DataError("SPLIT", f"{directory / name} is missing; run 'split' first")
    schema = load_schema(directory / "schema.json")
    tt = load_dataset(directory / "train_test.csv", schema)
    va = load_dataset(directory / "validation.csv", schema)
    folds = load_folds(directory / "folds.csv", tt)
    if features:
        tt, va = subset_features(tt, features), subset_features(va, features)
    return tt, va, folds


# --- search -------------------------------------------------------------------------------

def cmd_search(args) -> int:
    method = check_method(args.method)
    if args.n_hypes < 1:
        raise UsageError("N_HYPES", "--n-hypes must be >= 1")
    if args.workers < 1:
        raise UsageError("WORKERS", "--workers must be >= 1")
    features = load_feature_list(_existing(args.features)) if args.features else None
    tt, va, folds = load_split(args.split, features)
    if args.space:
        space = load_space_file(_existing(args.space), tt.n_cases)
        if space.method != method:
            raise DataError("SPACE", f"space file is for {space.method}, not {method}")
    else:
        space = builtin_space(method, tt.n_cases, args.scale)
    seed = args.seed
    config = engine.SearchConfig(
        method, space, args.n_hypes, folds.k,
        sampling_seed=seed if args.sampling_seed is None else args.sampling_seed,
        fold_seed=seed,
        training_seed=seed if args.training_seed is None else args.training_seed,
        workers=args.workers, label=args.label)
    report = engine.run_search(config, tt, va, folds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    # relative to the search directory so the output tree can be moved as a unit
    split_ref = os.path.relpath(Path(args.split).resolve(), out.resolve())
    echo = {"command": "search", "split": Path(split_ref).as_posix(), "method": method,
            "n_hypes": args.n_hypes, "k": folds.k, "scale": args.scale, "label": args.label,
            "feature_set": "subset" if features else "all", "features": tt.schema.names,
            "space": space.to_dict(),
            "seeds": {"sampling": config.sampling_seed, "folding": config.fold_seed,
                      "training": config.training_seed}}
    (out / "config.json").write_text(json.dumps(echo, indent=2, sort_keys=True) + "\n")
    engine.write_results(report, out / "results.csv")
    engine.write_timing(report, out / "timing.csv")
    summary = engine.summary_dict(report)
    summary["feature_set"] = echo["feature_set"]
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    engine.write_timing_summary(report, out / "timing.json")
    if report.model is not None:
        (out / "model.json").write_text(dump_model(report.model))
        write_roc(report.validation_roc, out / "roc.csv")
        plots.render_plot(plots.roc_spec([(_display_name(summary), report.validation_roc)],
                                         "Validation ROC"), out / "roc.svg")
    n_failed = summary["n_failed"]
    print(f"{method}: {report.models_trained} models trained, best index {report.best_index}, "
          f"mean-test AUC {summary['best_mean_test_auc']:.3f}, validation AUC "
          + ("n/a" if summary["validation_auc"] is None else f"{summary['validation_auc']:.3f}")
          + f", {report.total_minutes:.2f} minutes")
    if n_failed:
        print(f"warning: {n_failed} of {args.n_hypes} settings failed to fit; see results.csv", file=sys.stderr)
    if report.refit_error:
        print(f"warning: refit failed: {report.refit_error}", file=sys.stderr)
    return 0


# --- report -------------------------------------------------------------------------------

def _display_name(summary: dict) -> str:
    name = summary["method"] + ("_RF" if summary.get("feature_set") == "subset" else "")
    return f"{name}-{summary['label']}" if summary.get("label") else name


def _load_summary(path) -> dict:
    p = _existing(path)
    if p.is_dir():
        p = p / "summary.json"
        if not p.exists():
            raise DataError("REPORT", f"{p} is missing; run 'search' first")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise DataError("REPORT", f"{p}: not a summary file") from e


def comparison_rows(summaries: list[dict]) -> list[dict]:
    """Table rows: a paired all-feature/subset comparison per method, else one row per summary."""
    by_method: dict[str, dict] = {}
    for s in summaries:
        by_method.setdefault(s["method"], {})[s.get("feature_set", "all")] = s
    rows = []
    for method, group in by_method.items():
        if "all" in group and "subset" in group:
            rows.append(engine.compare_reports(group["all"], group["subset"]))
        for s in group.values():
            if not ("all" in group and "subset" in group):
                rows.append({"method": _display_name(s), "best": s["best_mean_test_auc"],
                             "average": s["average_mean_test_auc"],
                             "best_vs_average_pct": engine.percent_difference(
                                 s["average_mean_test_auc"], s["best_mean_test_auc"])})
    return rows


def _cell(key, v) -> str:
    if v is None:
        return ""
    return f"{v:.2f}" if key.endswith("_pct") else (f"{v:.3f}" if isinstance(v, float) else str(v))


def cmd_report(args) -> int:
    summaries = [_load_summary(p) for p in args.inputs]
    labels = {s.get("label", "") for s in summaries}
    if len(labels) > 1:
        raise DataError("HORIZON", f"summaries mix horizon labels: {', '.join(sorted(labels))}")
    rows = comparison_rows(summaries)
    columns = []
    for r in rows:
        columns += [c for c in r if c not in columns]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "table.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(c, r.get(c)) for c in columns])
    print(",".join(columns))
    for r in rows:
        print(",".join(_cell(c, r.get(c)) for c in columns))
    ranking = plots.ranking_spec([(_display_name(s), s["best_mean_test_auc"]) for s in summaries])
    ranking = plots.PlotSpec(ranking.kind, ranking.series[: args.top], ranking.title, ranking.x_label)
    plots.save_spec(ranking, out / "ranking.json")
    plots.render_plot(ranking, out / "ranking.svg")
    curves = [(_display_name(s), _roc_from_summary(s)) for s in summaries if s.get("validation_roc")]
    if curves:
        panel = plots.roc_spec(curves, "ROC curves of the best models")
        plots.save_spec(panel, out / "roc_panel.json")
        plots.render_plot(panel, out / "roc_panel.svg")
    return 0


def _roc_from_summary(s: dict) -> RocCurve:
    r = s["validation_roc"]
    return RocCurve(np.array(r["fpr"]), np.array(r["tpr"]), np.zeros(0), s["validation_auc"])


# --- explain ------------------------------------------------------------------------------

def cmd_explain(args) -> int:
    d = _existing(args.search)
    for name in ("config.json", "model.json"):
        if not (d / name).exists():
            raise DataError("EXPLAIN", f"{d / name} is missing; run 'search' with a validation set first")
    echo = json.loads((d / "config.json").read_text())
    model = load_model((d / "model.json").read_text())
    tt, va, _ = load_split(d / echo["split"], echo["features"] if echo["feature_set"] == "subset" else None)
    bg_rows = encode(tt, "onehot")
    width = bg_rows.width
    if encoding_for(model.method) == "onehot" and model.n_inputs != width:
        raise DataError("ENCODING", f"model expects {model.n_inputs} inputs; the data encodes to {width}")
    if encoding_for(model.method) == "ordinal" and model.n_inputs != tt.n_predictors:
        raise DataError("ENCODING", f"model expects {model.n_inputs} columns; the data has {tt.n_predictors}")
    try:
        cent = explain.kmeans(bg_rows.values, args.clusters, args.seed)
    except UsageError as e:
        raise UsageError(e.code, f"{e} (train-test set has {tt.n_cases} rows)") from e
    bg = explain.background(cent)
    cases = va if args.max_cases is None else va.take(np.arange(min(args.max_cases, va.n_cases)))
    X = encode(cases, "onehot").values
    rep = explain.explain_cases(model, X, bg, tt.schema.names, bg_rows.blocks, args.mode,
                                args.permutations, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    raw = [[c.categories[v] for c, v in zip(cases.schema.columns, row)] for row in cases.X]
    explain.write_shap(rep, out / "shap.csv", [int(c) for c in cases.case_ids], raw)
    cards = [c.cardinality for c in cases.schema.columns]
    bar, summary = explain.aggregate(rep.phi, cases.X, rep.features, cards)
    explain.write_bar(bar, out / "shap_bar.csv")
    explain.write_summary_points(summary, out / "shap_summary.csv")
    bar_spec = plots.PlotSpec("shap-bar", [{"label": k, "value": v} for k, v in bar],
                              "Mean absolute SHAP value", "mean |SHAP value|")
    sum_spec = plots.PlotSpec("shap-summary", [{"label": k, "phi": v, "level": l} for k, v, l in summary],
                              "SHAP value distributions", "SHAP value")
    for name, spec in (("shap_bar", bar_spec), ("shap_summary", sum_spec)):
        plots.save_spec(spec, out / f"{name}.json")
        plots.render_plot(spec, out / f"{name}.svg")
    (out / "explain.json").write_text(json.dumps(
        {"mode": rep.mode, "clusters": args.clusters, "base_value": rep.base_value,
         "background": bg.tolist(), "cases": cases.n_cases}, indent=2) + "\n")
    print(f"explained {cases.n_cases} cases ({rep.mode}); top feature {bar[0][0]} ({bar[0][1]:.3f})")
    return 0


def cmd_render(args) -> int:
    try:
        spec = plots.load_spec(_existing(args.spec))
    except (json.JSONDecodeError, KeyError) as e:
        raise DataError("SPEC", f"{args.spec}: not a plot spec") from e
    out = Path(args.out)
    if out.suffix != ".svg":
        out.mkdir(parents=True, exist_ok=True)
        out = out / (Path(args.spec).stem + ".svg")
    plots.render_plot(spec, out)
    return 0


COMMANDS = {"split": cmd_split, "search": cmd_search, "report": cmd_report,
            "explain": cmd_explain, "render": cmd_render}


def main(argv=None) -> int:
    try:
        args = parse_args(sys.argv[1:] if argv is None else argv)
        return COMMANDS[args.command](args)
    except RGSError as e:
        print(e.line(), file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error[IO]: {e}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
