"""Dataset ingestion and synthetic generators."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from ..core import WeightedPointSet
from ..rng import generator

UNIT_BALL_TOL = 1e-12


class Normalization(str, enum.Enum):
    NONE = "none"
    UNIT_BALL = "unit_ball"


class DataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Dataset:
    set: WeightedPointSet
    labels: Optional[np.ndarray] = None
    name: str = "data"
    normalization: Normalization = Normalization.NONE

    def __len__(self) -> int:
        return len(self.set)

    @property
    def points(self) -> np.ndarray:
        return self.set.points

    def normalized(self) -> "Dataset":
        """Divide every point by the largest norm so all points lie in the unit ball."""
        if self.normalization is Normalization.UNIT_BALL:
            return self
        scale = float(self.set.norms.max()) if len(self.set) else 0.0
        pts = self.set.points / scale if scale > 0 else self.set.points
        ws = WeightedPointSet(pts, self.set.weights, dim=self.set.dim)
        return replace(self, set=ws, normalization=Normalization.UNIT_BALL)

    def folded(self) -> "Dataset":
        """Multiply each point by its label mapped to {-1, +1}."""
        if self.labels is None:
            raise DataError("label folding needs labels")
        signs = fold_signs(self.labels)
        ws = WeightedPointSet(self.set.points * signs[:, None], self.set.weights, dim=self.set.dim)
        return replace(self, set=ws)

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        labels = None if self.labels is None else self.labels[idx]
        return replace(self, set=self.set.subset(idx), labels=labels)


def fold_signs(labels) -> np.ndarray:
    """Map labels {0, 1} to {-1, +1}; {-1, +1} pass through."""
    labels = np.asarray(labels, dtype=np.float64)
    values = set(np.unique(labels).tolist())
    if values <= {0.0, 1.0}:
        return np.where(labels == 1.0, 1.0, -1.0)
    if values <= {-1.0, 1.0}:
        return labels.copy()
    raise DataError(f"label folding needs labels in {{0,1}} or {{-1,+1}}, got {sorted(values)[:5]}")


def _parse_float(cell: str) -> Optional[float]:
    try:
        v = float(cell)
    except ValueError:
        return None
    return v


def load_csv(path, label_column: Optional[int] = None, fold_labels: bool = False,
             normalize: Normalization | str = Normalization.NONE) -> Dataset:
    """Read a comma-separated numeric table.

    A first row containing any non-numeric cell is taken as the header.
    ``label_column`` is a 0-based (or negative) column index.
    """
    path = Path(path)
    normalize = Normalization(normalize)
    rows = []
    width = None
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            values = [_parse_float(c.strip()) for c in row]
            if None in values:
                if not rows and width is None:
                    width = len(row)
                    continue
                col = values.index(None)
                raise DataError(f"{path}:{lineno}: non-numeric cell {row[col]!r} in column {col}")
            if width is None:
                width = len(row)
            if len(row) != width:
                raise DataError(f"{path}:{lineno}: expected {width} columns, found {len(row)}")
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no numeric rows")
    table = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(table)):
        raise DataError(f"{path}: non-finite values")
    labels = None
    if label_column is not None:
        col = label_column % table.shape[1]
        labels = table[:, col].copy()
        table = np.delete(table, col, axis=1)
        if table.shape[1] == 0:
            raise DataError(f"{path}: no feature columns besides the label")
    data = Dataset(WeightedPointSet(table), labels, path.stem)
    if fold_labels:
        data = data.folded()
    if normalize is Normalization.UNIT_BALL:
        data = data.normalized()
    return data


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------

SYNTHETIC_MAJORITY = 20_000
SYNTHETIC_MINORITY = 10
SYNTHETIC_MEAN_MAJORITY = (10_000.0, 10_000.0)
SYNTHETIC_MEAN_MINORITY = (-9_998.0, -9_998.0)
SYNTHETIC_VARIANCE = 0.0025


def make_synthetic(seed: int = 0, normalize: Normalization | str = Normalization.NONE) -> Dataset:
    """20,000 points around (10^4, 10^4) and 10 around (-9998, -9998), variance 0.0025."""
    rng = generator(seed)
    sd = math.sqrt(SYNTHETIC_VARIANCE)
    big = rng.normal(SYNTHETIC_MEAN_MAJORITY, sd, size=(SYNTHETIC_MAJORITY, 2))
    small = rng.normal(SYNTHETIC_MEAN_MINORITY, sd, size=(SYNTHETIC_MINORITY, 2))
    data = Dataset(WeightedPointSet(np.vstack([big, small])), None, "synthetic")
    if Normalization(normalize) is Normalization.UNIT_BALL:
        data = data.normalized()
    return data


# Per-class (mean, std) of the twelve numeric wine columns: fixed acidity,
# volatile acidity, citric acid, residual sugar, chlorides, free SO2,
# total SO2, density, pH, sulphates, alcohol, quality.
_WINE_RED = np.array([
    (8.32, 1.74), (0.528, 0.179), (0.271, 0.195), (2.54, 1.41), (0.0875, 0.047),
    (15.9, 10.5), (46.5, 32.9), (0.9967, 0.0019), (3.31, 0.154), (0.658, 0.170),
    (10.42, 1.07), (5.64, 0.81),
])
_WINE_WHITE = np.array([
    (6.85, 0.84), (0.278, 0.101), (0.334, 0.121), (6.39, 5.07), (0.0458, 0.0218),
    (35.3, 17.0), (138.4, 42.5), (0.9940, 0.0030), (3.19, 0.151), (0.490, 0.114),
    (10.51, 1.23), (5.88, 0.89),
])
WINE_RED = 1599
WINE_WHITE = 4898


def _lognormal(rng: np.random.Generator, stats: np.ndarray, count: int) -> np.ndarray:
    mean, sd = stats[:, 0], stats[:, 1]
    s2 = np.log1p((sd / mean) ** 2)
    mu = np.log(mean) - s2 / 2
    return np.exp(mu + np.sqrt(s2) * rng.standard_normal((count, mean.shape[0])))


def make_wine_like(seed: int = 0, normalize: Normalization | str = Normalization.NONE) -> Dataset:
    """Stand-in for the wine-quality table: 1599 red (label 1) and 4898 white (label 0).

    Columns are independent log-normals matching per-class means and
    standard deviations of the public table; quality is rounded.
    """
    rng = generator(seed)
    red = _lognormal(rng, _WINE_RED, WINE_RED)
    white = _lognormal(rng, _WINE_WHITE, WINE_WHITE)
    X = np.vstack([red, white])
    X[:, -1] = np.round(X[:, -1])
    labels = np.concatenate([np.ones(WINE_RED), np.zeros(WINE_WHITE)])
    perm = rng.permutation(X.shape[0])
    data = Dataset(WeightedPointSet(X[perm]), labels[perm], "wine_like")
    if Normalization(normalize) is Normalization.UNIT_BALL:
        data = data.normalized()
    return data


def write_points_csv(path, points: np.ndarray, weights: np.ndarray) -> None:
    """Coreset file: one column per coordinate, then ``weight``, with a header."""
    d = points.shape[1]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(d)] + ["weight"])
        for p, wt in zip(points, weights):
            w.writerow([repr(float(v)) for v in p] + [repr(float(wt))])


def read_points_csv(path) -> WeightedPointSet:
    data = load_csv(path)
    table = data.points
    if table.shape[1] < 2:
        raise DataError(f"{path}: coreset file needs coordinates and a weight column")
    return WeightedPointSet(table[:, :-1], table[:, -1])
