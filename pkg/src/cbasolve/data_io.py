"""libsvm reading/writing and seeded instance generation."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    source: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if self.features.ndim != 2 or min(self.features.shape) < 1:
            raise ValueError("features must be a nonempty m x n matrix")
        if self.labels.shape != (self.features.shape[0],):
            raise ValueError("need one label per row")
        if not np.all(np.abs(self.labels) == 1.0):
            raise ValueError("labels must be -1 or +1")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")

    @property
    def shape(self):
        return self.features.shape


class LibsvmError(ValueError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line


class MalformedTokenError(LibsvmError):
    pass


class NonIncreasingIndexError(LibsvmError):
    pass


class TooManyLabelsError(LibsvmError):
    pass


class EmptyFileError(LibsvmError):
    pass


def _number(token, lineno):
    try:
        value = float(token)
    except ValueError:
        raise MalformedTokenError(f"cannot read number from {token!r}", lineno) from None
    if not math.isfinite(value):
        raise MalformedTokenError(f"non-finite value {token!r}", lineno)
    return value


def parse_libsvm(source, n_features: int | None = None, name: str = "<stream>") -> Dataset:
    """Parse libsvm text from a string, a text stream, or any iterable of lines.

    With exactly two distinct raw labels the larger one becomes +1. A single
    raw label is mapped by its sign (positive to +1, otherwise -1).
    ``n_features`` pads the column count beyond the largest index seen.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    raw_labels, rows = [], []
    width = 0
    for lineno, line in enumerate(source, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        label = _number(tokens[0], lineno)
        entries = {}
        last = 0
        for token in tokens[1:]:
            idx, sep, val = token.partition(":")
            if not sep or not idx.isdigit():
                raise MalformedTokenError(f"expected index:value, got {token!r}", lineno)
            idx = int(idx)
            if idx < 1:
                raise MalformedTokenError(f"indices are 1-based, got {idx}", lineno)
            if idx <= last:
                raise NonIncreasingIndexError(f"index {idx} does not exceed {last}", lineno)
            entries[idx - 1] = _number(val, lineno)
            last = idx
        if label not in raw_labels:
            if len(raw_labels) == 2:
                raise TooManyLabelsError(
                    f"third distinct label {tokens[0]!r}; only binary data is supported", lineno)
            raw_labels.append(label)
        rows.append((label, entries))
        width = max(width, last)
    if not rows:
        raise EmptyFileError(f"no data lines in {name}")
    if n_features is not None:
        if n_features < width:
            raise ValueError(f"n_features={n_features} is below the largest index {width}")
        width = n_features
    if width == 0:
        raise EmptyFileError(f"no feature entries in {name}")

    if len(raw_labels) == 2:
        positive = max(raw_labels)
        to_sign = {lab: (1.0 if lab == positive else -1.0) for lab in raw_labels}
    else:
        to_sign = {raw_labels[0]: 1.0 if raw_labels[0] > 0 else -1.0}
    features = np.zeros((len(rows), width))
    labels = np.empty(len(rows))
    for i, (label, entries) in enumerate(rows):
        labels[i] = to_sign[label]
        for j, v in entries.items():
            features[i, j] = v
    return Dataset(features, labels, name)


def load_libsvm(path, n_features: int | None = None) -> Dataset:
    with open(path, encoding="utf-8", newline=None) as fh:
        return parse_libsvm(fh, n_features, name=str(path))


def format_libsvm(data: Dataset) -> str:
    """Serialize with shortest round-trip float formatting; zeros are omitted."""
    out = []
    for label, row in zip(data.labels, data.features):
        parts = ["+1" if label > 0 else "-1"]
        parts += [f"{j + 1}:{float(row[j])!r}" for j in np.flatnonzero(row)]
        out.append(" ".join(parts))
    return "\n".join(out) + "\n"


def save_libsvm(data: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_libsvm(data))


def _streams(seed, count):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def sign_labels(features, direction) -> np.ndarray:
    return np.where(features @ direction >= 0.0, 1.0, -1.0)


def generate_synthetic_dro(n: int, m: int, dist: str = "normal", flip: float = 0.1,
                           seed: int = 0) -> Dataset:
    """Linearly separable labels from a hidden normal direction, then exactly
    ``round(flip * m)`` labels flipped.

    The seed is split into three independent substreams: hidden direction,
    features, and the flipped index set.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    if not 0.0 <= flip <= 1.0:
        raise ValueError(f"flip fraction must be in [0, 1], got {flip}")
    direction_rng, feature_rng, flip_rng = _streams(seed, 3)
    direction = direction_rng.standard_normal(n)
    if dist == "normal":
        features = feature_rng.standard_normal((m, n))
    elif dist == "uniform":
        features = feature_rng.uniform(0.0, 1.0, (m, n))
    else:
        raise ValueError(f"dist must be 'normal' or 'uniform', got {dist!r}")
    labels = sign_labels(features, direction)
    flipped = flip_rng.choice(m, size=int(round(flip * m)), replace=False)
    labels[flipped] *= -1.0
    return Dataset(features, labels, f"synthetic-{dist}(n={n}, m={m}, flip={flip}, seed={seed})")


def generate_matrix(n: int, m: int, dist: str = "uniform01", seed: int = 0) -> np.ndarray:
    if n < 1 or m < 1:
        raise ValueError("n and m must be positive")
    rng = np.random.default_rng(seed)
    if dist == "uniform01":
        return rng.uniform(0.0, 1.0, (n, m))
    if dist == "normal01":
        return rng.standard_normal((n, m))
    raise ValueError(f"dist must be 'uniform01' or 'normal01', got {dist!r}")
