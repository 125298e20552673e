"""Command-line interface: ``qsd {generate,train,predict,evaluate,sweep,study}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical-integrity error.
"""
import argparse
import csv
import json
import sys
from dataclasses import replace

import numpy as np

from . import classify
from .encoding import Dataset
from .exceptions import NumericalIntegrityError, QSDError
from .experiments import (
    ExperimentConfig,
    is_number,
    bound_accuracy_study,
    generate_synthetic,
    ingest_csv,
    minmax_apply,
    minmax_fit,
    run_experiment,
    study_to_csv,
    synthetic_study_configs,
    write_atomic,
)
from .hermitian import DEFAULT_MAX_DIM

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_copies(text: str):
    """``"3"`` -> (3, 3); ``"1..4"`` -> (1, 4)."""
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid copy range {text!r}; use N or A..B") from None
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError(f"copy range {text!r} must satisfy 1 <= A <= B")
    return lo, hi


def _label_column(text):
    return int(text) if text.lstrip("-").isdigit() else text


def _add_data_flags(p, label=True):
    p.add_argument("--input", required=True, help="CSV file")
    if label:
        p.add_argument("--label-column", type=_label_column, default=-1,
                       help="label column name or index (default: last)")
    p.add_argument("--delimiter", default=",")


def _add_experiment_flags(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="CSV file")
    src.add_argument("--generate", choices=["blobs", "diagonal2x2"],
                     help="use a synthetic dataset instead of --input")
    p.add_argument("--label-column", type=_label_column, default=-1)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--classifier", choices=["helstrom", "pgm"], default="helstrom")
    p.add_argument("--copies", type=parse_copies, default=(1, 1), help="N or A..B")
    split = p.add_mutually_exclusive_group()
    split.add_argument("--test-fraction", type=float, default=None)
    split.add_argument("--folds", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", choices=["none", "minmax"], default="none")
    p.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    p.add_argument("--output")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    _add_generator_flags(p)


def _add_generator_flags(p):
    p.add_argument("--classes", type=int, default=None)
    p.add_argument("--points-per-class", type=int, default=None)
    p.add_argument("--spread", type=float, default=None)
    p.add_argument("--centers", default=None, help='e.g. "0,0;5,5"')


def _generator_params(args) -> dict:
    params = {}
    if args.classes is not None:
        params["num_classes"] = args.classes
    if args.points_per_class is not None:
        params["points_per_class"] = args.points_per_class
    if args.spread is not None:
        params["spread"] = args.spread
    if args.centers:
        try:
            params["centers"] = [[float(v) for v in c.split(",")] for c in args.centers.split(";")]
        except ValueError:
            raise UsageError(f"cannot parse --centers {args.centers!r}") from None
    return params


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic dataset as CSV")
    p.add_argument("--kind", choices=["blobs", "diagonal2x2"], default="blobs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    _add_generator_flags(p)

    p = sub.add_parser("train", help="fit a classifier and save it as JSON")
    _add_data_flags(p)
    p.add_argument("--classifier", choices=["helstrom", "pgm"], default="helstrom")
    p.add_argument("--copies", type=parse_copies, default=(1, 1))
    p.add_argument("--scale", choices=["none", "minmax"], default="none")
    p.add_argument("--max-dim", type=int, default=DEFAULT_MAX_DIM)
    p.add_argument("--output", required=True)

    p = sub.add_parser("predict", help="label the rows of a CSV with a saved model")
    p.add_argument("--model", required=True)
    _add_data_flags(p, label=False)
    p.add_argument("--label-column", type=_label_column, default=None,
                   help="label column to drop before predicting, if the file has one")
    p.add_argument("--output")
    p.add_argument("--format", choices=["json", "csv"], default="csv")

    p = sub.add_parser("evaluate", help="score a saved model on a labeled CSV")
    p.add_argument("--model", required=True)
    _add_data_flags(p)
    p.add_argument("--output")

    p = sub.add_parser("sweep", help="train/test over a range of copy counts")
    _add_experiment_flags(p)

    p = sub.add_parser("study", help="Helstrom bound vs balanced accuracy across datasets")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", nargs="+", help="binary CSV files (at least 3)")
    src.add_argument("--synthetic", type=int, help="number of synthetic blob datasets")
    p.add_argument("--label-column", type=_label_column, default=-1)
    p.add_argument("--delimiter", default=",")
    p.add_argument("--copies", type=parse_copies, default=(1, 1))
    split = p.add_mutually_exclusive_group()
    split.add_argument("--test-fraction", type=float, default=None)
    split.add_argument("--folds", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", choices=["none", "minmax"], default="none")
    p.add_argument("--output")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    return parser


def _emit(text: str, output) -> None:
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _dataset_csv(ds: Dataset) -> str:
    head = ",".join([f"f{j + 1}" for j in range(ds.num_features)] + ["label"])
    rows = [",".join([repr(float(v)) for v in x] + [str(int(lab))]) for x, lab in zip(ds.X, ds.y)]
    return "\n".join([head] + rows) + "\n"


def _load_model(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    model = classify.model_from_dict(doc)
    scaling = doc.get("preprocessing")
    return model, scaling


def _apply_scaling(X, scaling):
    if scaling:
        return minmax_apply(X, np.asarray(scaling["min"]), np.asarray(scaling["max"]))
    return X


def _read_features(path, delimiter, label_column):
    """Feature matrix of a CSV, dropping ``label_column`` when given."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    if not rows:
        raise QSDError(f"{path} is empty")
    drop = None
    if label_column is not None:
        if isinstance(label_column, str):
            drop = rows[0].index(label_column) if label_column in rows[0] else None
            if drop is None:
                raise QSDError(f"label column {label_column!r} not in header")
        else:
            drop = label_column % len(rows[0])
    if any(not is_number(c) for j, c in enumerate(rows[0]) if j != drop):
        rows = rows[1:]
    try:
        return np.array([[float(c) for j, c in enumerate(r) if j != drop] for r in rows])
    except ValueError as exc:
        raise QSDError(f"unparseable cell in {path}: {exc}") from None


def _experiment_config(args) -> ExperimentConfig:
    generator = None
    if args.generate:
        generator = {"kind": args.generate, **_generator_params(args)}
    test_fraction = args.test_fraction
    if args.folds is None and test_fraction is None:
        test_fraction = 0.3
    return ExperimentConfig(
        input=args.input, generator=generator, label_column=args.label_column,
        delimiter=args.delimiter, classifier=args.classifier,
        copies_min=args.copies[0], copies_max=args.copies[1],
        test_fraction=test_fraction if args.folds is None else None, folds=args.folds,
        seed=args.seed, scaling=args.scale, output=args.output, format=args.format,
        max_dim=args.max_dim)


def cmd_generate(args):
    params = _generator_params(args)
    ds = generate_synthetic(args.kind, params, args.seed)
    write_atomic(args.output, _dataset_csv(ds))


def cmd_train(args):
    if args.copies[0] != args.copies[1]:
        raise UsageError("train takes a single copy count")
    ds = ingest_csv(args.input, args.label_column, args.delimiter)
    scaling = None
    if args.scale == "minmax":
        lo, hi = minmax_fit(ds.X)
        scaling = {"kind": "minmax", "min": lo.tolist(), "max": hi.tolist()}
        ds = Dataset(minmax_apply(ds.X, lo, hi), ds.y, ds.num_classes, ds.class_names)
    model = classify.train(ds, args.classifier, args.copies[0], args.max_dim)
    doc = classify.model_to_dict(model)
    doc["preprocessing"] = scaling
    write_atomic(args.output, json.dumps(doc, indent=1) + "\n")
    print(f"{args.classifier} model, n={model.copies}, bound={model.bound!r}", file=sys.stderr)


def cmd_predict(args):
    model, scaling = _load_model(args.model)
    X = _apply_scaling(_read_features(args.input, args.delimiter, args.label_column), scaling)
    preds = [classify.predict(model, x) for x in X]
    names = model.class_names or tuple(str(i) for i in range(1, model.num_classes + 1))
    if args.format == "json":
        text = json.dumps([{"label": names[p.label - 1], "class_index": p.label,
                            "scores": p.scores.tolist()} for p in preds], indent=1) + "\n"
    else:
        head = "label," + ",".join(f"score_{i}" for i in range(1, model.num_classes + 1))
        text = "\n".join([head] + [names[p.label - 1] + "," + ",".join(repr(float(s)) for s in p.scores)
                                   for p in preds]) + "\n"
    _emit(text, args.output)


def cmd_evaluate(args):
    model, scaling = _load_model(args.model)
    ds = ingest_csv(args.input, args.label_column, args.delimiter)
    # map the file's labels onto the model's class order by name
    if model.class_names:
        index = {name: i + 1 for i, name in enumerate(model.class_names)}
        missing = [c for c in ds.class_names if c not in index]
        if missing:
            raise QSDError(f"labels {missing} were not seen in training")
        y = np.array([index[ds.class_names[k - 1]] for k in ds.y])
    else:
        y = ds.y
    y_pred = classify.predict_many(model, _apply_scaling(ds.X, scaling))
    report = classify.metrics_from_confusion(classify.confusion_matrix(y, y_pred, model.num_classes))
    _emit(json.dumps(report.as_dict(), indent=1) + "\n", args.output)


def cmd_sweep(args):
    cfg = _experiment_config(args)
    try:
        cfg.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = run_experiment(cfg)
    if not args.output:
        sys.stdout.write(result.to_json() if args.format == "json" else result.to_csv())
    if result.truncation:
        print(f"truncated: {result.truncation['reason']}", file=sys.stderr)


def cmd_study(args):
    common = dict(copies_min=args.copies[0], copies_max=args.copies[0], seed=args.seed,
                  scaling=args.scale, folds=args.folds,
                  test_fraction=None if args.folds else (args.test_fraction or 0.3))
    if args.synthetic is not None:
        cfgs = [replace(c, **{**common, "seed": c.seed})
                for c in synthetic_study_configs(args.synthetic, args.seed)]
    else:
        cfgs = [ExperimentConfig(input=path, label_column=args.label_column,
                                 delimiter=args.delimiter, **common) for path in args.input]
    if len(cfgs) < 3:
        raise UsageError("study needs at least 3 datasets")
    report = bound_accuracy_study(cfgs)
    if report["pearson"] is not None:
        sign = "positive" if report["pearson"] > 0 else "non-positive"
        print(f"pearson(H_b, balanced accuracy) = {report['pearson']:.4f} ({sign})", file=sys.stderr)
    else:
        print("pearson undefined: zero variance", file=sys.stderr)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n" if args.format == "json" \
        else study_to_csv(report)
    _emit(text, args.output)


COMMANDS = {"generate": cmd_generate, "train": cmd_train, "predict": cmd_predict,
            "evaluate": cmd_evaluate, "sweep": cmd_sweep, "study": cmd_study}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"qsd: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalIntegrityError as exc:
        print(f"qsd: numerical integrity error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (QSDError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"qsd: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
