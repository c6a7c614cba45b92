"""Command-line entry point: ``zscan {simulate,select,train,evaluate,report}``.

Exit codes: 0 success, 2 configuration/data errors, 3 I/O errors,
4 classifier non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

from .classify.model import MODEL_TAGS, TrainedClassifier
from .errors import ConfigError, NonConvergence, ZscanError
from .freqselect import POLICIES, FrequencySelection, verify_selection
from .io import atomic_write, load_touchstone_dir, read_dataset_csv, write_dataset_csv
from .pipeline import PipelineConfig, evaluate_bundle, run_selection, train_pipeline
from .rf import REPRESENTATIONS, feature_matrix
from .synth import SimulatorConfig, synthesize_dataset

EXIT_CONFIG, EXIT_IO, EXIT_CONVERGENCE = 2, 3, 4

TABLE_COLUMNS = ("F1 Score (Train)", "F1 Score (Test)", "Precision", "Recall",
                 "Specificity", "Accuracy")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _say(args, *msg):
    if not args.quiet:
        print(*msg)


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def _read_json(path, code_on_decode=EXIT_CONFIG):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}", code_on_decode) from None


def load_dataset(path, classes=None):
    """A dataset CSV, or a directory of .s1p files with a ``manifest.csv``."""
    p = Path(path)
    if p.is_dir():
        manifest = p / "manifest.csv"
        if not manifest.exists():
            raise CliError(f"{p} has no manifest.csv (filename,label)", EXIT_IO)
        return load_touchstone_dir(p, manifest, classes)
    return read_dataset_csv(_read_text(p), classes)


def _write(path, text):
    try:
        atomic_write(path, text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


# -- simulate -------------------------------------------------------------------

def cmd_simulate(args):
    cfg = SimulatorConfig.from_json(_read_text(args.config)) if args.config else SimulatorConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    cfg.validate()
    ds = synthesize_dataset(cfg)
    out = Path(args.out or "dataset.csv")
    _write(out, write_dataset_csv(ds))
    _write(out.with_name(out.name + ".config.json"), cfg.to_json() + "\n")
    _say(args, f"wrote {len(ds)} traces x {ds.n_frequencies} points to {out}")
    return 0


# -- select ---------------------------------------------------------------------

def _pipeline_config(args, **over):
    base = {}
    if getattr(args, "config", None):
        base = _read_json(args.config)
        if not isinstance(base, dict):
            raise ConfigError("pipeline config must be a JSON object")
    for key in ("representation", "policy", "top_fraction", "rel_threshold", "max_corr",
                "aggregate", "variance_target", "model", "test_fraction", "folds", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    base.update(over)
    try:
        return PipelineConfig(**base).validate()
    except TypeError as exc:
        raise ConfigError(f"bad pipeline config: {exc}") from None


def cmd_select(args):
    cfg = _pipeline_config(args, select_on="all" if args.whole_dataset else "train")
    ds = load_dataset(args.dataset)
    X = feature_matrix(ds, cfg.representation)
    sel = run_selection(ds, cfg, X)
    _write(args.out or "selection.json", sel.to_json() + "\n")
    _say(args, sel.summary())
    if args.verify:
        worst = verify_selection(X, sel.kept_indices, sel.max_corr)
        ok = worst < sel.max_corr or sel.max_corr > 1
        _say(args, f"verify: max |r| over kept pairs = {worst:.6f} "
                   f"({'OK' if ok else 'FAIL'}, threshold {sel.max_corr})")
        if not ok:
            return EXIT_CONFIG
    return 0


# -- train ----------------------------------------------------------------------

def _parse_hyper(pairs):
    hyper = {}
    for item in pairs or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--hyper expects key=value, got {item!r}")
        try:
            hyper[key] = json.loads(val)
        except json.JSONDecodeError:
            hyper[key] = val
    return hyper


def summary_row(name, f1_train, test):
    vals = [f1_train, test["f1"], test["precision"], test["recall"], test["specificity"],
            test["accuracy_overall"]]
    return [name] + ["" if v is None else f"{100 * v:.1f}%" for v in vals]


def format_table(rows):
    header = ["Classifier", *TABLE_COLUMNS]
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    fmt = lambda r: "  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    return "\n".join([fmt(header), fmt(["-" * w for w in widths]), *map(fmt, rows)])


def cmd_train(args):
    over = {"standardize": not args.no_standardize}
    if args.hyper:
        over["hyper"] = _parse_hyper(args.hyper)
    cfg = _pipeline_config(args, **over)
    ds = load_dataset(args.dataset)
    selection = None
    if args.selection:
        selection = FrequencySelection.from_dict(_read_json(args.selection))
        if selection.representation != cfg.representation:
            raise ConfigError(f"selection used {selection.representation}, "
                              f"training uses {cfg.representation}")
    result = train_pipeline(ds, cfg, selection)
    out = Path(args.out or "run")
    _write(out / "model.json", result.classifier.to_json() + "\n")
    _write(out / "report.json", result.report_json() + "\n")
    _write(out / "test_report.json", result.test.to_json() + "\n")
    _say(args, format_table([summary_row(cfg.model, result.cv.aggregate["f1"],
                                         result.test.metrics())]))
    return 0


# -- evaluate -------------------------------------------------------------------

def cmd_evaluate(args):
    try:
        clf = TrainedClassifier.from_dict(_read_json(args.bundle))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ZscanError):
            raise
        raise ConfigError(f"malformed model bundle: {exc}") from None
    ds = load_dataset(args.dataset, classes=clf.classes)
    report = evaluate_bundle(clf, ds, args.subset)
    text = report.to_json() + "\n"
    if args.out:
        _write(args.out, text)
    if not args.quiet:
        sys.stdout.write(text)
    return 0


# -- report ---------------------------------------------------------------------

def _report_row(path, doc):
    if "test" in doc and "cv" in doc:
        test, f1_train = doc["test"], doc["cv"]["aggregate"]["f1"]
        name = doc.get("model", Path(path).stem)
    elif "metrics" in doc:
        test, f1_train = doc, None
        name = doc.get("metadata", {}).get("model", Path(path).stem)
    else:
        raise CliError(f"{path} is not an evaluation or training report", EXIT_IO)
    return name, f1_train, test["metrics"], tuple(test["classes"])


def cmd_report(args):
    rows, roster = [], None
    for path in args.reports:
        doc = _read_json(path, code_on_decode=EXIT_IO)
        if not isinstance(doc, dict):
            raise CliError(f"{path} is not a report object", EXIT_IO)
        name, f1_train, metrics, classes = _report_row(path, doc)
        if roster is None:
            roster = classes
        elif classes != roster:
            raise CliError(f"{path}: class roster {classes} differs from {roster}", EXIT_CONFIG)
        rows.append((name, f1_train, metrics))
    _say(args, format_table([summary_row(*r) for r in rows]))
    if args.out:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["classifier", "f1_train", "f1_test", "precision", "recall",
                    "specificity", "accuracy"])
        for name, f1_train, m in rows:
            w.writerow([name, "" if f1_train is None else repr(f1_train), repr(m["f1"]),
                        repr(m["precision"]), repr(m["recall"]), repr(m["specificity"]),
                        repr(m["accuracy_overall"])])
        _write(args.out, buf.getvalue())
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="root seed (overrides config files)")
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--quiet", action="store_true", help="suppress summaries on stdout")

    p = argparse.ArgumentParser(prog="zscan", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="synthesise a labelled sweep corpus")
    s.add_argument("--config", help="simulator config JSON (omitted fields take defaults)")
    s.set_defaults(func=cmd_simulate)

    def selection_flags(sp):
        sp.add_argument("--config", help="pipeline config JSON")
        sp.add_argument("--representation", choices=REPRESENTATIONS)
        sp.add_argument("--policy", choices=POLICIES)
        sp.add_argument("--top-fraction", dest="top_fraction", type=float)
        sp.add_argument("--rel-threshold", dest="rel_threshold", type=float)
        sp.add_argument("--max-corr", dest="max_corr", type=float)
        sp.add_argument("--aggregate", choices=("max", "min"))
        sp.add_argument("--test-fraction", dest="test_fraction", type=float)

    s = sub.add_parser("select", parents=[common], help="select informative frequency points")
    s.add_argument("dataset")
    selection_flags(s)
    s.add_argument("--whole-dataset", action="store_true",
                   help="select on every row instead of the training split")
    s.add_argument("--verify", action="store_true",
                   help="re-check every kept pair with an independent Pearson pass")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("train", parents=[common], help="cross-validate, fit and test a classifier")
    s.add_argument("dataset")
    selection_flags(s)
    s.add_argument("--selection", help="selection JSON from 'zscan select'")
    s.add_argument("--model", choices=MODEL_TAGS)
    s.add_argument("--folds", type=int)
    s.add_argument("--variance-target", dest="variance_target", type=float)
    s.add_argument("--no-standardize", action="store_true")
    s.add_argument("--hyper", action="append", metavar="KEY=VALUE",
                   help="classifier hyperparameter, repeatable (e.g. C=10)")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("evaluate", parents=[common], help="score a model bundle on a dataset")
    s.add_argument("bundle")
    s.add_argument("dataset")
    s.add_argument("--subset", choices=("all", "train", "test"), default="all",
                   help="'test'/'train' re-derive the bundle's own split")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("report", parents=[common], help="tabulate several reports")
    s.add_argument("reports", nargs="+")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"zscan {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except NonConvergence as exc:
        print(f"zscan {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ZscanError as exc:
        print(f"zscan {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"zscan {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
