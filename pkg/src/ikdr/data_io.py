"""CSV ingestion, standardization, and plain-text model persistence."""

import csv
from dataclasses import dataclass, replace

import numpy as np

MODEL_FORMAT = "ism-model/1"


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    labels: np.ndarray = None            # dense class ids, or None
    label_names: tuple = None            # original label tokens by class id
    feature_names: tuple = None
    mean: np.ndarray = None              # set once standardized
    std: np.ndarray = None
    zero_variance: tuple = None          # feature indices flagged constant


def _is_number(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def load_csv(path, label_column=None):
    """Load a rectangular CSV; header row and label column are optional.

    A header is assumed when any feature cell of the first row is not a
    number.  Label values (any tokens) map to dense class ids in order of
    first appearance.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError("%s: empty file" % path)
    width = len(rows[0])
    for lineno, row in enumerate(rows, start=1):
        if len(row) != width:
            raise DataError("%s: ragged row at line %d" % (path, lineno))

    label_idx = None
    header = None
    if isinstance(label_column, str):
        if label_column not in rows[0]:
            raise DataError("%s: missing label column %r" % (path, label_column))
        header = rows[0]
        label_idx = header.index(label_column)
        body_start = 1
    else:
        if label_column is not None:
            label_idx = int(label_column)
            if not -width <= label_idx < width:
                raise DataError("%s: label column index %d out of range" % (path, label_idx))
            label_idx %= width
        feature_cells = [c for i, c in enumerate(rows[0]) if i != label_idx]
        if any(not _is_number(c) for c in feature_cells):
            header = rows[0]
            body_start = 1
        else:
            body_start = 0
    body = rows[body_start:]
    if not body:
        raise DataError("%s: no data rows" % path)

    feature_cols = [i for i in range(width) if i != label_idx]
    X = np.empty((len(body), len(feature_cols)))
    for r, row in enumerate(body):
        for c, col in enumerate(feature_cols):
            cell = row[col]
            try:
                X[r, c] = float(cell)
            except ValueError:
                raise DataError(
                    "%s: non-numeric cell %r at line %d, column %d"
                    % (path, cell, r + body_start + 1, col + 1)
                ) from None
    if not np.all(np.isfinite(X)):
        raise DataError("%s: non-finite feature values" % path)

    labels = None
    label_names = None
    if label_idx is not None:
        seen = {}
        ids = []
        for row in body:
            tok = row[label_idx]
            if tok not in seen:
                seen[tok] = len(seen)
            ids.append(seen[tok])
        labels = np.asarray(ids, dtype=int)
        label_names = tuple(seen)

    feature_names = None
    if header is not None:
        feature_names = tuple(header[i] for i in feature_cols)
    return Dataset(X=X, labels=labels, label_names=label_names, feature_names=feature_names)


def standardize(ds):
    """Center to zero mean and scale to unit population std, per feature.

    Constant features are centered only; their recorded std is 1 and their
    indices are flagged."""
    X = np.asarray(ds.X, dtype=float)
    if X.shape[0] < 2:
        raise DataError("standardization needs at least two samples")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    flagged = tuple(int(i) for i in np.flatnonzero(std == 0))
    std_safe = np.where(std > 0, std, 1.0)
    return replace(
        ds, X=(X - mean) / std_safe, mean=mean, std=std_safe, zero_variance=flagged
    )


def apply_standardization(X, mean, std):
    """Replay recorded standardization parameters on new rows."""
    return (np.asarray(X, dtype=float) - np.asarray(mean)) / np.asarray(std)


@dataclass(frozen=True)
class ModelFile:
    format_version: str
    kernel: str                 # kernel token
    q: int
    d: int
    mean: np.ndarray
    std: np.ndarray
    W: np.ndarray


def _fmt(x):
    return format(float(x), ".17g")


def _fmt_vec(v):
    return ",".join(_fmt(x) for x in v)


def save_model(model, path):
    lines = [
        "format_version=%s" % model.format_version,
        "kernel=%s" % model.kernel,
        "q=%d" % model.q,
        "d=%d" % model.d,
        "mean=%s" % _fmt_vec(model.mean),
        "std=%s" % _fmt_vec(model.std),
        "W=",
    ]
    for row in np.asarray(model.W):
        lines.append(_fmt_vec(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_floats(text, path, lineno):
    try:
        return np.asarray([float(tok) for tok in text.split(",")], dtype=float)
    except ValueError:
        raise DataError("%s: malformed numeric token at line %d" % (path, lineno)) from None


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    lines = [ln for ln in lines if ln != ""]

    def expect(lineno, key):
        if lineno > len(lines):
            raise DataError("%s: truncated file at line %d (expected %s)" % (path, lineno, key))
        ln = lines[lineno - 1]
        if not ln.startswith(key + "="):
            raise DataError("%s: expected %r at line %d" % (path, key, lineno))
        return ln[len(key) + 1:]

    version = expect(1, "format_version")
    if version != MODEL_FORMAT:
        raise DataError("%s: unsupported format version %r" % (path, version))
    kernel = expect(2, "kernel")
    try:
        q = int(expect(3, "q"))
        d = int(expect(4, "d"))
    except ValueError:
        raise DataError("%s: malformed numeric token at line 3 or 4" % path) from None
    mean = _parse_floats(expect(5, "mean"), path, 5)
    std = _parse_floats(expect(6, "std"), path, 6)
    expect(7, "W")
    w_lines = lines[7:]
    if len(w_lines) != d:
        raise DataError(
            "%s: expected %d projection rows, found %d" % (path, d, len(w_lines))
        )
    W = np.empty((d, q))
    for r, ln in enumerate(w_lines):
        vals = _parse_floats(ln, path, 8 + r)
        if vals.shape[0] != q:
            raise DataError("%s: row at line %d has %d values, expected %d"
                            % (path, 8 + r, vals.shape[0], q))
        W[r] = vals
    if mean.shape[0] != d or std.shape[0] != d:
        raise DataError("%s: standardization vectors do not match d=%d" % (path, d))
    return ModelFile(version, kernel, q, d, mean, std, W)
