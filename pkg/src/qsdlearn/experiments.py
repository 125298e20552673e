"""Dataset ingestion, synthetic generators, splits and copy-sweep experiments."""
import csv
import json
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .classify import confusion_matrix, metrics_from_confusion, pearson, predict_many, train
from .encoding import Dataset
from .exceptions import CapacityError, DataError, DegenerateClassError, NumericalIntegrityError
from .hermitian import DEFAULT_MAX_DIM

RESULT_FORMAT = "qsd-result/1"
MONOTONE_SLACK = 1e-9
CSV_METRICS = ("bound", "balanced_accuracy", "f1_macro", "cohen_kappa")


def is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def ingest_csv(path, label_column: Union[int, str] = -1, delimiter: str = ",",
               header: Optional[bool] = None) -> Dataset:
    """Read a CSV file into a :class:`Dataset`.

    Labels are mapped to ``1..l`` in order of first appearance; the original
    label strings are kept in ``class_names``. ``header=None`` detects a header
    row from non-numeric feature cells, or from a named ``label_column``.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh, delimiter=delimiter) if r]
    if not rows:
        raise DataError(f"{path} is empty")

    width = len(rows[0])
    names = None
    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if label_column not in rows[0]:
            raise DataError(f"label column {label_column!r} not found in header {rows[0]}")
        header = True
        col = rows[0].index(label_column)
    else:
        col = int(label_column)
        if not -width <= col < width:
            raise DataError(f"label column {col} out of range for {width} columns")
        col %= width
    if header is None:
        header = any(not is_number(c) for j, c in enumerate(rows[0]) if j != col)
    if header:
        names, rows = rows[0], rows[1:]
    if not rows:
        raise DataError(f"{path} has no data rows")

    X, labels = [], []
    first_line = 2 if header else 1
    for i, row in enumerate(rows):
        line = first_line + i
        if len(row) != width:
            raise DataError(f"row {line}: expected {width} cells, found {len(row)}")
        feats = []
        for j, cell in enumerate(row):
            if j == col:
                continue
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"row {line}, column {j + 1}: cannot parse {cell!r}") from None
            if not math.isfinite(v):
                raise DataError(f"row {line}, column {j + 1}: non-finite value {cell!r}")
            feats.append(v)
        X.append(feats)
        labels.append(row[col].strip())
    if width < 2:
        raise DataError("need at least one feature column besides the label")

    mapping = {}
    for lab in labels:
        mapping.setdefault(lab, len(mapping) + 1)
    if len(mapping) < 2:
        raise DegenerateClassError(f"{path} contains a single class {labels[0]!r}")
    y = np.array([mapping[lab] for lab in labels])
    meta = {"source": str(path), "label_mapping": mapping,
            "feature_names": [n for j, n in enumerate(names) if j != col] if names else None}
    return Dataset(np.array(X, dtype=float), y, len(mapping), tuple(mapping), meta)


def _blobs(rng, num_classes=2, points_per_class=50, centers=None, spread=0.5, num_features=2):
    if centers is None:
        centers = [[5.0 * k] * num_features for k in range(num_classes)]
    centers = np.asarray(centers, dtype=float)
    if centers.ndim != 2 or centers.shape[0] != num_classes:
        raise DataError(f"need {num_classes} centers, got array of shape {centers.shape}")
    if points_per_class < 1 or spread < 0:
        raise DataError("points_per_class must be >= 1 and spread >= 0")
    X = np.concatenate([c + spread * rng.standard_normal((points_per_class, centers.shape[1]))
                        for c in centers])
    y = np.repeat(np.arange(1, num_classes + 1), points_per_class)
    return X, y


def generate_synthetic(kind: str, params: Optional[dict] = None, seed: int = 0) -> Dataset:
    """Seeded synthetic dataset.

    ``blobs``: isotropic Gaussian clusters; params ``num_classes`` (2),
    ``points_per_class`` (50), ``centers`` (``[5k, 5k, ...]``), ``spread`` (0.5),
    ``num_features`` (2, ignored when ``centers`` is given).

    ``diagonal2x2``: two classes of ``points_per_class`` (2) one-feature points
    with values uniform in ``(0, 1)``, read as populations ``r`` of the
    diagonal qubit states ``diag(1 - r, r)``.
    """
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    if kind == "blobs":
        num_classes = int(params.pop("num_classes", 2))
        if num_classes < 2:
            raise DataError("blobs needs at least 2 classes")
        X, y = _blobs(rng, num_classes, **params)
    elif kind == "diagonal2x2":
        k = int(params.pop("points_per_class", 2))
        if params:
            raise DataError(f"unknown diagonal2x2 parameters: {sorted(params)}")
        if k < 1:
            raise DataError("points_per_class must be >= 1")
        # open interval (0, 1): numpy draws from [0, 1)
        X = rng.uniform(np.nextafter(0.0, 1.0), 1.0, size=(2 * k, 1))
        y = np.repeat([1, 2], k)
        num_classes = 2
    else:
        raise DataError(f"unknown generator {kind!r}; expected 'blobs' or 'diagonal2x2'")
    meta = {"source": f"synthetic:{kind}", "seed": seed}
    return Dataset(X, y, num_classes, tuple(str(i) for i in range(1, num_classes + 1)), meta)


def stratified_split(ds: Dataset, test_fraction: float, seed=0) -> Tuple[np.ndarray, np.ndarray]:
    """Shuffle each class and move ``round(fraction * size)`` points to the test set.

    Every class keeps at least one training point and, when it has two or more
    points, contributes at least one test point.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for i in range(1, ds.num_classes + 1):
        members = rng.permutation(np.flatnonzero(ds.y == i))
        size = members.size
        n_test = min(max(int(round(test_fraction * size)), 1 if size >= 2 else 0), size - 1)
        test_idx.extend(members[:n_test])
        train_idx.extend(members[n_test:])
    return np.sort(np.array(train_idx, dtype=int)), np.sort(np.array(test_idx, dtype=int))


def stratified_folds(ds: Dataset, folds: int, seed=0) -> List[Tuple[np.ndarray, np.ndarray]]:
    """``folds`` stratified (train, test) index pairs covering every point once."""
    if folds < 2:
        raise DataError(f"need at least 2 folds, got {folds}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(ds.num_points, dtype=int)
    offset = 0
    for i in range(1, ds.num_classes + 1):
        members = rng.permutation(np.flatnonzero(ds.y == i))
        assignment[members] = (np.arange(members.size) + offset) % folds
        offset += members.size
    everything = np.arange(ds.num_points)
    return [(everything[assignment != f], everything[assignment == f]) for f in range(folds)]


def minmax_fit(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return X.min(axis=0), X.max(axis=0)


def minmax_apply(X: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Scale to ``[0, 1]`` by the fitted range; constant features map to 0."""
    span = np.where(hi > lo, hi - lo, 1.0)
    return (np.asarray(X, dtype=float) - lo) / span


@dataclass
class ExperimentConfig:
    input: Optional[str] = None
    generator: Optional[dict] = None
    label_column: Union[int, str] = -1
    delimiter: str = ","
    classifier: str = "helstrom"
    copies_min: int = 1
    copies_max: int = 1
    test_fraction: Optional[float] = 0.3
    folds: Optional[int] = None
    seed: int = 0
    scaling: str = "none"
    output: Optional[str] = None
    format: str = "json"
    max_dim: int = DEFAULT_MAX_DIM
    name: Optional[str] = None

    def validate(self) -> None:
        if (self.input is None) == (self.generator is None):
            raise ValueError("exactly one of input and generator must be given")
        if self.classifier not in ("helstrom", "pgm"):
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if not 1 <= self.copies_min <= self.copies_max:
            raise ValueError("copies must satisfy 1 <= copies_min <= copies_max")
        if self.folds is None and self.test_fraction is None:
            raise ValueError("either a test fraction or a fold count is required")
        if self.folds is None and not 0 < self.test_fraction < 1:
            raise ValueError(f"test fraction must lie in (0, 1), got {self.test_fraction}")
        if self.folds is not None and self.folds < 2:
            raise ValueError(f"fold count must be >= 2, got {self.folds}")
        if self.scaling not in ("none", "minmax"):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")

    def load(self) -> Dataset:
        if self.input is not None:
            return ingest_csv(self.input, self.label_column, self.delimiter)
        gen = dict(self.generator)
        kind = gen.pop("kind")
        return generate_synthetic(kind, gen, self.seed)


@dataclass
class ExperimentResult:
    records: List[dict]
    metadata: dict
    truncation: Optional[dict] = None
    wall_time_ms: dict = field(default_factory=dict)

    @property
    def bound_key(self) -> str:
        return self.metadata["bound_name"]

    def to_json(self) -> str:
        doc = {"schema": RESULT_FORMAT, "metadata": self.metadata,
               "records": self.records, "truncation": self.truncation}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        lines = ["# " + json.dumps({"schema": RESULT_FORMAT, "metadata": self.metadata,
                                    "truncation": self.truncation}, sort_keys=True),
                 "n,metric,value"]
        for rec in self.records:
            for metric in CSV_METRICS:
                key = self.bound_key if metric == "bound" else metric
                lines.append(f"{rec['n']},{key},{rec[key]!r}")
        return "\n".join(lines) + "\n"


def write_atomic(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _splits(cfg: ExperimentConfig, ds: Dataset):
    if cfg.folds is not None:
        return stratified_folds(ds, cfg.folds, cfg.seed)
    return [stratified_split(ds, cfg.test_fraction, cfg.seed)]


def _prepare(cfg, ds, train_idx, test_idx):
    """Training Dataset plus raw test arrays; a test fold may miss a class."""
    tr = ds.subset(train_idx)
    X_te, y_te = ds.X[test_idx], ds.y[test_idx]
    if cfg.scaling == "minmax":
        lo, hi = minmax_fit(tr.X)
        tr = Dataset(minmax_apply(tr.X, lo, hi), tr.y, tr.num_classes, tr.class_names)
        X_te = minmax_apply(X_te, lo, hi)
    return tr, (X_te, y_te)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Train and evaluate for every copy count in ``[copies_min, copies_max]``.

    The split is drawn once from ``cfg.seed`` and reused for every ``n``. With
    folds, metrics come from the pooled out-of-fold predictions and the bound
    is the mean over folds. Helstrom bounds must not decrease with ``n``;
    a decrease raises :class:`NumericalIntegrityError`. If the encoded
    dimension exceeds ``max_dim`` at some ``n``, the records stop at ``n - 1``
    and ``truncation`` says why.
    """
    cfg.validate()
    ds = cfg.load()
    bound_name = f"{cfg.classifier}_bound"
    prepared = [_prepare(cfg, ds, tr, te) for tr, te in _splits(cfg, ds)]
    config_echo = asdict(cfg)
    config_echo.pop("output")
    metadata = {
        "dataset": cfg.name or ds.metadata.get("source", "dataset"),
        "m": ds.num_points, "d": ds.num_features, "num_classes": ds.num_classes,
        "seed": cfg.seed, "bound_name": bound_name,
        "label_mapping": ds.metadata.get("label_mapping"),
        "config": config_echo,
    }
    result = ExperimentResult([], metadata)
    for n in range(cfg.copies_min, cfg.copies_max + 1):
        start = time.perf_counter()
        try:
            bounds, C = [], np.zeros((ds.num_classes, ds.num_classes), dtype=int)
            for tr, (X_te, y_te) in prepared:
                model = train(tr, cfg.classifier, n, cfg.max_dim)
                bounds.append(model.bound)
                C += confusion_matrix(y_te, predict_many(model, X_te), ds.num_classes)
        except CapacityError as exc:
            result.truncation = {"truncated_at": n, "reason": str(exc)}
            break
        report = metrics_from_confusion(C)
        bound = float(np.mean(bounds))
        if cfg.classifier == "helstrom" and result.records:
            prev = result.records[-1][bound_name]
            if bound < prev - MONOTONE_SLACK:
                raise NumericalIntegrityError(
                    f"Helstrom bound decreased from {prev!r} at n={n - 1} to {bound!r} at n={n}")
        result.records.append({
            "n": n, bound_name: bound,
            "balanced_accuracy": report.balanced_accuracy,
            "f1_macro": report.f1_macro,
            "cohen_kappa": report.cohen_kappa,
        })
        result.wall_time_ms[n] = (time.perf_counter() - start) * 1e3
    if cfg.output:
        write_result(result, cfg.output, cfg.format)
    return result


def write_result(result: ExperimentResult, output, fmt: str = "json") -> None:
    """Write the deterministic result file plus a ``.timing.json`` sidecar.

    Wall times live only in the sidecar so the result file is byte-identical
    across runs with the same seed.
    """
    write_atomic(output, result.to_json() if fmt == "json" else result.to_csv())
    timing = {"schema": RESULT_FORMAT + "-timing",
              "wall_time_ms": {str(k): v for k, v in result.wall_time_ms.items()}}
    write_atomic(str(output) + ".timing.json", json.dumps(timing, indent=2) + "\n")


def least_squares_line(xs, ys) -> dict:
    """Fit ``y = slope * x + intercept``; ``r2`` is the coefficient of determination."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else float("nan")
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


def bound_accuracy_study(cfgs: Sequence[ExperimentConfig]) -> dict:
    """Helstrom bound against balanced accuracy across binary experiments.

    Each config runs at ``copies_min`` only. The line regresses the bound on
    balanced accuracy. With zero variance in either column the correlation is
    reported as ``None`` and the line is omitted.
    """
    if len(cfgs) < 3:
        raise ValueError("the study needs at least 3 experiments")
    rows = []
    for k, cfg in enumerate(cfgs):
        if cfg.classifier != "helstrom":
            raise ValueError("the study compares Helstrom bounds; use classifier='helstrom'")
        single = ExperimentConfig(**{**asdict(cfg), "copies_max": cfg.copies_min, "output": None})
        res = run_experiment(single)
        if not res.records:
            raise DataError(f"experiment {k} produced no records: {res.truncation}")
        rec = res.records[0]
        if res.metadata["num_classes"] != 2:
            raise DataError(f"experiment {k} is not a binary problem")
        rows.append({"name": res.metadata["dataset"], "n": rec["n"],
                     "helstrom_bound": rec["helstrom_bound"],
                     "balanced_accuracy": rec["balanced_accuracy"]})
    hb = [r["helstrom_bound"] for r in rows]
    ba = [r["balanced_accuracy"] for r in rows]
    try:
        r = pearson(hb, ba)
    except ZeroDivisionError:
        r = None
    return {
        "schema": RESULT_FORMAT + "-study",
        "rows": rows,
        "pearson": r,
        "line": least_squares_line(ba, hb) if r is not None else None,
        "note": None if r is not None else "zero variance: correlation undefined",
    }


def study_to_csv(report: dict) -> str:
    lines = ["name,n,helstrom_bound,balanced_accuracy"]
    for row in report["rows"]:
        lines.append(f"{row['name']},{row['n']},{row['helstrom_bound']!r},"
                     f"{row['balanced_accuracy']!r}")
    line = report["line"] or {}
    lines.append(f"# pearson={report['pearson']!r} slope={line.get('slope')!r} "
                 f"intercept={line.get('intercept')!r} r2={line.get('r2')!r}")
    return "\n".join(lines) + "\n"


def synthetic_study_configs(count: int = 10, seed: int = 0, points_per_class: int = 30,
                            spread: float = 1.0) -> List[ExperimentConfig]:
    """Binary blob problems with centre separation growing from 0.25 to 3."""
    cfgs = []
    for k, delta in enumerate(np.linspace(0.25, 3.0, count)):
        cfgs.append(ExperimentConfig(
            generator={"kind": "blobs", "points_per_class": points_per_class,
                       "centers": [[0.0, 0.0], [float(delta), float(delta)]],
                       "spread": spread},
            seed=seed + k, name=f"blobs-sep{delta:.3f}"))
    return cfgs
