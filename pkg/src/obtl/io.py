"""File formats: labeled CSV datasets, preprocessing, run configs and model files."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DataError, ObtlError
from .inference import MODES, ClassPriorConfig, TrainedOBC, TrainedOBTL
from .model import ClassHyperparameters, ScalarPriorSpec, build_hyperparameters
from .special import SeriesControl

__all__ = [
    "LabeledDataset",
    "ingest_csv",
    "write_csv",
    "Preprocessor",
    "preprocess",
    "RunConfig",
    "load_json",
    "load_run_config",
    "save_model",
    "load_model",
]

DOMAINS = ("source", "target")


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with 1-based integer labels from one domain."""

    X: np.ndarray
    y: np.ndarray
    domain: str = "target"
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=int).reshape(-1)
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} rows but {y.shape[0]} labels")
        if self.domain not in DOMAINS:
            raise DataError(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain non-finite values")
        if y.size and y.min() < 1:
            raise DataError("labels must be >= 1")
        names = tuple(self.feature_names) or tuple(f"x{i + 1}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise DataError("feature_names does not match the column count")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def by_class(self, L: int) -> list[np.ndarray]:
        """Per-class feature blocks for labels ``1..L`` (possibly empty)."""
        if self.y.size and self.y.max() > L:
            raise DataError(f"label {int(self.y.max())} outside 1..{L}")
        return [self.X[self.y == l] for l in range(1, L + 1)]

    def with_features(self, X: np.ndarray, names: Sequence[str] | None = None) -> "LabeledDataset":
        return LabeledDataset(X, self.y, self.domain, tuple(names) if names is not None else ())


def ingest_csv(
    path,
    label_column: str = "label",
    n_classes: int | None = None,
    feature_columns: Sequence[str] | None = None,
    domain: str = "target",
    d: int | None = None,
) -> LabeledDataset:
    """Read a headed CSV with one label column and numeric feature columns.

    Raises
    ------
    DataError
        On a missing file or column, a non-numeric or empty cell (the message
        names the line), a feature-count mismatch with ``d``, or a label
        outside ``1..n_classes``.
    """
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: no label column {label_column!r} in header {header}")
        features = list(feature_columns) if feature_columns is not None else [h for h in header if h != label_column]
        missing = [f for f in features if f not in header]
        if missing:
            raise DataError(f"{path}: feature columns {missing} not in header")
        if d is not None and len(features) != d:
            raise DataError(f"{path}: expected {d} feature columns, found {len(features)}")
        label_idx = header.index(label_column)
        feat_idx = [header.index(f) for f in features]
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            labels.append(_parse_label(row[label_idx], path, lineno, n_classes))
            rows.append([_parse_float(row[i], path, lineno, header[i]) for i in feat_idx])
    X = np.array(rows, dtype=float).reshape(len(rows), len(features))
    return LabeledDataset(X, np.array(labels, dtype=int), domain, tuple(features))


def _parse_float(cell: str, path, lineno: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"{path}: line {lineno}: non-numeric value {cell!r} in column {column!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}: line {lineno}: non-finite value {cell!r} in column {column!r}")
    return value


def _parse_label(cell: str, path, lineno: int, n_classes: int | None) -> int:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"{path}: line {lineno}: non-numeric label {cell!r}") from None
    if value != int(value):
        raise DataError(f"{path}: line {lineno}: label {cell!r} is not an integer")
    label = int(value)
    upper = n_classes if n_classes is not None else math.inf
    if not 1 <= label <= upper:
        raise DataError(f"{path}: line {lineno}: label {label} outside 1..{n_classes}")
    return label


def write_csv(dataset: LabeledDataset, path, label_column: str = "label") -> None:
    """Write a dataset so that :func:`ingest_csv` reads it back bit-exactly."""
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(dataset.feature_names) + [label_column])
        for row, label in zip(dataset.X, dataset.y):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


# --------------------------------------------------------------------------- #
# Preprocessing
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Preprocessor:
    """Per-feature standardization followed by projection on principal axes."""

    center: np.ndarray
    scale: np.ndarray
    components: np.ndarray  # (d, d_out), orthonormal columns
    explained_variance: np.ndarray
    pooling: str = "pooled"

    def transform(self, X) -> np.ndarray:
        return ((np.asarray(X, dtype=float) - self.center) / self.scale) @ self.components

    def to_dict(self) -> dict:
        return {
            "pooling": self.pooling,
            "d_in": int(self.components.shape[0]),
            "d_out": int(self.components.shape[1]),
            "center": self.center.tolist(),
            "scale": self.scale.tolist(),
            "components": self.components.tolist(),
            "explained_variance": self.explained_variance.tolist(),
        }

    @classmethod
    def fit(cls, training: Sequence[np.ndarray], d_out: int, pooling: str = "pooled", names: Sequence[str] | None = None) -> "Preprocessor":
        """Fit on the stacked rows of ``training``.

        Raises
        ------
        DataError
            On a constant feature (named) or fewer than ``d_out``
            informative directions.
        """
        X = np.vstack([np.atleast_2d(t) for t in training if np.size(t)])
        d = X.shape[1]
        if not 1 <= d_out <= d:
            raise DataError(f"d_out must be in 1..{d}, got {d_out}")
        if X.shape[0] < 2:
            raise DataError("need at least two training rows to standardize")
        center = X.mean(axis=0)
        scale = X.std(axis=0, ddof=1)
        const = np.nonzero(scale <= 1e-12 * np.maximum(1.0, np.abs(center)))[0]
        if const.size:
            label = names[const[0]] if names is not None else f"column {const[0] + 1}"
            raise DataError(f"feature {label} is constant on the training data; cannot standardize")
        Z = (X - center) / scale
        _, s, Vt = np.linalg.svd(Z - Z.mean(axis=0), full_matrices=False)
        var = s**2 / (X.shape[0] - 1)
        rank = int(np.sum(var > 1e-10 * var.max()))
        if rank < d_out:
            raise DataError(f"only {rank} informative directions in the training data, {d_out} requested")
        comps = Vt[:d_out].T.copy()
        # fix the sign ambiguity: largest-magnitude loading positive
        flip = np.sign(comps[np.argmax(np.abs(comps), axis=0), np.arange(d_out)])
        comps *= flip
        return cls(center, scale, comps, var[:d_out], pooling)


def preprocess(
    train_s: LabeledDataset,
    train_t: LabeledDataset,
    test_t: LabeledDataset,
    d_out: int,
    pooling: str = "pooled",
) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset, Preprocessor]:
    """Standardize and project all three datasets with statistics from training data only.

    ``pooling="pooled"`` fits on source and target training rows together;
    ``"target"`` fits on the target training rows alone.
    """
    if pooling not in ("pooled", "target"):
        raise ConfigError(f"pooling must be 'pooled' or 'target', got {pooling!r}")
    if len({train_s.d, train_t.d, test_t.d}) != 1:
        raise DataError("datasets disagree on the feature dimension")
    fit_on = [train_s.X, train_t.X] if pooling == "pooled" else [train_t.X]
    pre = Preprocessor.fit(fit_on, d_out, pooling, names=train_t.feature_names)
    names = [f"pc{i + 1}" for i in range(d_out)]
    return (
        train_s.with_features(pre.transform(train_s.X), names),
        train_t.with_features(pre.transform(train_t.X), names),
        test_t.with_features(pre.transform(test_t.X), names),
        pre,
    )


# --------------------------------------------------------------------------- #
# Configs and model files
# --------------------------------------------------------------------------- #


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


@dataclass(frozen=True)
class RunConfig:
    """Settings for ``train-eval``.

    The prior is either scalar (``prior`` with ``class_means``) or explicit
    per-class blocks (``classes``).  ``class_means="pooled"`` sets every
    class's ``m_t`` and ``m_s`` to the mean of all training rows.
    """

    source: Path
    target: Path
    test: Path
    n_classes: int
    prior: dict | None = None
    classes: tuple[dict, ...] | None = None
    class_means: object = None
    xi: tuple[float, ...] = ()
    mode: str | None = None
    series: SeriesControl | None = None
    seed: int = 0
    label_column: str = "label"
    with_obc: bool = True
    exact_cap: int = 3
    extra: dict = field(default_factory=dict)

    def hyperparameters(self, pooled_mean: np.ndarray | None = None) -> list[ClassHyperparameters]:
        try:
            if self.classes is not None:
                return [ClassHyperparameters.from_dict(c) for c in self.classes]
            spec = dict(self.prior)
            means = self.class_means
            if means == "pooled":
                if pooled_mean is None:
                    raise ConfigError("pooled class means need training data")
                means = [(pooled_mean, pooled_mean)] * self.n_classes
            elif means is None:
                means = [(spec.get("m_t", 0.0), spec.get("m_s", 0.0))] * self.n_classes
            spec.pop("m_t", None)
            spec.pop("m_s", None)
            if len(means) != self.n_classes:
                raise ConfigError(f"class_means needs {self.n_classes} entries")
            return [build_hyperparameters(ScalarPriorSpec(**spec, m_t=m_t, m_s=m_s)) for m_t, m_s in means]
        except (TypeError, KeyError) as exc:
            raise ConfigError(f"bad prior specification: {exc}") from exc

    @property
    def class_prior(self) -> ClassPriorConfig:
        return ClassPriorConfig(self.xi or (1.0,) * self.n_classes)


def load_run_config(path) -> RunConfig:
    """Parse a ``train-eval`` JSON config; data paths resolve against its directory."""
    path = Path(path)
    data = load_json(path)
    base = path.parent
    try:
        files = data["data"]
        L = int(data["n_classes"])
    except KeyError as exc:
        raise ConfigError(f"{path}: missing key {exc}") from None
    if ("prior" in data) == ("classes" in data):
        raise ConfigError(f"{path}: give exactly one of 'prior' or 'classes'")
    xi = data.get("xi", 1.0)
    xi = (float(xi),) * L if np.isscalar(xi) else tuple(float(v) for v in xi)
    if len(xi) != L:
        raise ConfigError(f"{path}: xi needs {L} entries")
    mode = data.get("mode")
    if mode is not None and mode not in MODES:
        raise ConfigError(f"{path}: mode must be one of {MODES}")
    series = data.get("series")
    try:
        series = SeriesControl(**series) if series else None
        return RunConfig(
            source=base / files["source"],
            target=base / files["target"],
            test=base / files["test"],
            n_classes=L,
            prior=data.get("prior"),
            classes=tuple(data["classes"]) if "classes" in data else None,
            class_means=data.get("class_means"),
            xi=xi,
            mode=mode,
            series=series,
            seed=int(data.get("seed", 0)),
            label_column=files.get("label_column", "label"),
            with_obc=bool(data.get("obc", True)),
            exact_cap=int(data.get("exact_cap", 3)),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: data section is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ObtlError):
            raise
        raise ConfigError(f"{path}: {exc}") from exc


def save_model(model: TrainedOBTL | TrainedOBC, path) -> None:
    """Write a trained classifier as JSON (matrices as row-major nested lists)."""
    Path(path).write_text(json.dumps(model.to_dict(), indent=1) + "\n")


def load_model(path) -> TrainedOBTL | TrainedOBC:
    data = load_json(path)
    kind = data.get("kind")
    try:
        if kind == "obtl":
            return TrainedOBTL.from_dict(data)
        if kind == "obc":
            return TrainedOBC.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ObtlError):
            raise
        raise ConfigError(f"{path}: malformed model file: {exc}") from exc
    raise ConfigError(f"{path}: unknown model kind {kind!r}")
