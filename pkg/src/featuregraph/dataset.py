"""Regression dataset handling: loading, synthesis, splitting, standardization.

A Dataset is an immutable dense feature matrix with a target vector and
feature names. Loaders cover the libsvm sparse text format and plain numeric
CSV; the synthetic generator produces the power-of-feature-sums benchmark
task used throughout the test recipes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, ParseError


@dataclass(frozen=True)
class Dataset:
    """Dense regression dataset: features (m, D), targets (m,), D feature names."""

    features: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...]
    name: str = "dataset"

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if X.ndim != 2:
            raise DataError(f"features must be a 2-d matrix, got ndim={X.ndim}")
        m, D = X.shape
        if m < 1 or D < 1:
            raise DataError(f"need at least one row and one feature, got shape {X.shape}")
        if y.shape != (m,):
            raise DataError(f"targets must have shape ({m},), got {y.shape}")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain non-finite values")
        if not np.all(np.isfinite(y)):
            raise DataError("targets contain non-finite values")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != D:
            raise DataError(f"expected {D} feature names, got {len(names)}")
        if len(set(names)) != D:
            raise DataError("feature names must be distinct")
        X = X.copy()
        y = y.copy()
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split request: n_train rows drawn by a seeded shuffle."""

    n_train: int
    seed: int = 0


def _default_names(D: int) -> tuple[str, ...]:
    return tuple(f"x{j}" for j in range(D))


def load_libsvm(path, name: str | None = None) -> Dataset:
    """Load a libsvm-format regression file into a dense Dataset.

    Each line is ``<target> <index>:<value> ...`` with 1-based, strictly
    increasing indices. Absent indices are zero; the feature count is the
    largest index seen anywhere in the file.
    """
    rows = []
    targets = []
    max_index = 0
    try:
        with open(path, "r", encoding="utf-8", newline=None) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        tokens = text.split()
        try:
            target = float(tokens[0])
        except ValueError as exc:
            raise ParseError(f"bad target value {tokens[0]!r}", path, lineno) from exc
        entries = []
        prev_index = 0
        for tok in tokens[1:]:
            idx_str, _, val_str = tok.partition(":")
            if not val_str:
                raise ParseError(f"expected index:value, got {tok!r}", path, lineno)
            try:
                idx = int(idx_str)
                val = float(val_str)
            except ValueError as exc:
                raise ParseError(f"bad index:value pair {tok!r}", path, lineno) from exc
            if idx < 1:
                raise ParseError(f"indices are 1-based, got {idx}", path, lineno)
            if idx <= prev_index:
                raise ParseError(f"indices must be strictly increasing, got {idx} after {prev_index}", path, lineno)
            prev_index = idx
            entries.append((idx, val))
        max_index = max(max_index, prev_index)
        rows.append(entries)
        targets.append(target)
    if not rows:
        raise DataError(f"{path}: no data lines")
    X = np.zeros((len(rows), max_index))
    for i, entries in enumerate(rows):
        for idx, val in entries:
            X[i, idx - 1] = val
    if name is None:
        name = str(path)
    return Dataset(X, np.array(targets), _default_names(max_index), name=name)


def write_libsvm(ds: Dataset, path) -> None:
    """Write a Dataset in libsvm format, omitting zero entries."""
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(ds.n_samples):
            parts = [repr(float(ds.targets[i]))]
            row = ds.features[i]
            for j in np.nonzero(row)[0]:
                parts.append(f"{j + 1}:{float(row[j])!r}")
            fh.write(" ".join(parts) + "\n")


def load_csv(path, target_column: str, name: str | None = None) -> Dataset:
    """Load a plain numeric CSV (header row, no quoting) into a Dataset."""
    try:
        with open(path, "r", encoding="utf-8", newline=None) as fh:
            lines = [ln.rstrip("\r\n") for ln in fh]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if target_column not in header:
        raise DataError(f"{path}: target column {target_column!r} not in header {header}")
    t_col = header.index(target_column)
    feat_cols = [j for j in range(len(header)) if j != t_col]
    X = np.empty((len(lines) - 1, len(feat_cols)))
    y = np.empty(len(lines) - 1)
    for i, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} cells, got {len(cells)}", path, i)
        try:
            values = [float(c) for c in cells]
        except ValueError as exc:
            raise ParseError(f"non-numeric cell in row", path, i) from exc
        X[i - 2] = [values[j] for j in feat_cols]
        y[i - 2] = values[t_col]
    if name is None:
        name = str(path)
    return Dataset(X, y, tuple(header[j] for j in feat_cols), name=name)


def gen_synthetic(D: int, m: int, p: int, seed: int, distribution: str = "uniform") -> Dataset:
    """Generate the synthetic benchmark task y = (sum_j x_j) ** p.

    Features are i.i.d. uniform on [0, 1) from a seeded generator by default;
    ``distribution="normal"`` draws standard normals instead. The same seed
    always yields a bit-identical dataset.
    """
    if D < 1 or m < 1:
        raise ConfigError(f"need D >= 1 and m >= 1, got D={D}, m={m}")
    if p < 1:
        raise ConfigError("power p must be >= 1 (p = 0 gives a constant target)")
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        X = rng.random((m, D))
    elif distribution == "normal":
        X = rng.standard_normal((m, D))
    else:
        raise ConfigError(f"unknown distribution {distribution!r}")
    y = X.sum(axis=1) ** p
    return Dataset(X, y, _default_names(D), name=f"synthetic(D={D},p={p},m={m},seed={seed})")


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Partition rows into (train, test) via a seeded shuffle."""
    m = ds.n_samples
    if not 1 <= spec.n_train < m:
        raise ConfigError(f"n_train must be in [1, {m - 1}], got {spec.n_train}")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(m)
    tr, te = order[: spec.n_train], order[spec.n_train :]
    train = Dataset(ds.features[tr], ds.targets[tr], ds.feature_names, name=f"{ds.name}[train]")
    test = Dataset(ds.features[te], ds.targets[te], ds.feature_names, name=f"{ds.name}[test]")
    return train, test


@dataclass(frozen=True)
class Standardizer:
    """Per-feature affine map (x - mean) / scale fitted on a training set.

    Constant training features get scale 1, so centering maps them to zero.
    """

    mean: np.ndarray
    scale: np.ndarray

    def apply(self, ds: Dataset) -> Dataset:
        if ds.n_features != self.mean.size:
            raise DataError(f"standardizer fitted for {self.mean.size} features, dataset has {ds.n_features}")
        X = (ds.features - self.mean) / self.scale
        return Dataset(X, ds.targets, ds.feature_names, name=ds.name)


def fit_standardizer(train: Dataset) -> Standardizer:
    """Fit zero-mean unit-variance scaling on the training set only.

    Uses the (m - 1)-denominator sample standard deviation; features with
    zero spread keep scale 1 and are therefore centered to exactly 0.
    """
    X = train.features
    mean = X.mean(axis=0)
    if X.shape[0] < 2:
        scale = np.ones(X.shape[1])
    else:
        sd = X.std(axis=0, ddof=1)
        scale = np.where(sd > 0.0, sd, 1.0)
    return Standardizer(mean=mean, scale=scale)


def apply_standardizer(transform: Standardizer, ds: Dataset) -> Dataset:
    return transform.apply(ds)
