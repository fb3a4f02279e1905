"""Synthetic bimodal regression data and CSV ingestion.

The bimodal design mixes a large uniform cluster on ``[0, 1]^3`` with a small
dense cluster on ``[2, 2.5]^3``.  The dense cluster is drawn with probability
``n^gamma / (n + n^gamma)``; its coordinates are independent with density
``4 (5 - 2x)`` on ``[2, 2.5]``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np


@dataclass(frozen=True)
class BimodalConfig:
    n: int
    gamma: float = 0.6
    dim: int = 3

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")

    @property
    def dense_weight(self) -> float:
        ng = float(self.n) ** self.gamma
        return ng / (self.n + ng)


@dataclass(frozen=True)
class RegressionDataset:
    X: np.ndarray
    Y: np.ndarray
    f_star: Optional[np.ndarray] = None
    noise_sd: Optional[float] = None

    @property
    def n(self) -> int:
        return self.X.shape[0]


def dense_inverse_cdf(u):
    """Inverse of ``F(x) = 4(5x - x^2 - 6)`` on ``[2, 2.5]``."""
    u = np.asarray(u, dtype=float)
    return (5.0 - np.sqrt(1.0 - u)) / 2.0


def dense_cdf(x):
    x = np.clip(np.asarray(x, dtype=float), 2.0, 2.5)
    return 4.0 * (5.0 * x - x * x - 6.0)


def gen_bimodal(cfg: BimodalConfig, rng: np.random.Generator) -> np.ndarray:
    """Draw ``cfg.n`` rows: component labels first, then the uniform block,
    then the inverse-CDF variates for the dense rows."""
    in_dense = rng.random(cfg.n) < cfg.dense_weight
    X = rng.random((cfg.n, cfg.dim))
    k = int(in_dense.sum())
    X[in_dense] = dense_inverse_cdf(rng.random((k, cfg.dim)))
    return X


def g_scalar(t):
    t = np.asarray(t, dtype=float)
    out = 1.6 * np.abs((t - 0.4) * (t - 0.6)) - t * (t - 1.0) * (t - 2.0) - 0.5
    return float(out) if out.ndim == 0 else out


def f_star(x):
    """True regression function ``g(||x|| / 3)``; accepts one point or rows."""
    x = np.asarray(x, dtype=float)
    return g_scalar(np.linalg.norm(x, axis=-1) / 3.0)


def make_dataset(cfg: BimodalConfig, noise_sd: float, rng: np.random.Generator) -> RegressionDataset:
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    X = gen_bimodal(cfg, rng)
    fx = f_star(X)
    Y = fx + noise_sd * rng.standard_normal(cfg.n) if noise_sd > 0 else fx.copy()
    return RegressionDataset(X=X, Y=Y, f_star=fx, noise_sd=noise_sd)


def _read_numeric_csv(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [r for r in reader if r]
    except (OSError, StopIteration, UnicodeDecodeError) as exc:
        raise ValueError(f"cannot read CSV {path}: {exc}") from exc
    header = [h.strip() for h in header]
    data = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: line {i + 2} has {len(row)} cells, expected {len(header)}")
        try:
            data[i] = [float(cell) for cell in row]
        except ValueError as exc:
            raise ValueError(f"{path}: non-numeric cell on line {i + 2}") from exc
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{path}: non-finite values")
    return header, data


def load_csv(
    path: Union[str, Path],
    target_column: Union[str, int],
    test_fraction: float,
    rng: np.random.Generator,
):
    """Random train/test split of a numeric CSV with a header row.

    Features are divided by their training-split standard deviation, and the
    same scaling is applied to the test rows.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    header, data = _read_numeric_csv(path)
    if isinstance(target_column, str) and target_column not in header:
        if target_column.lstrip("-").isdigit():
            target_column = int(target_column)
        else:
            raise ValueError(f"no column named {target_column!r}")
    t = header.index(target_column) if isinstance(target_column, str) else int(target_column)
    if not -len(header) <= t < len(header):
        raise ValueError(f"target column index {t} out of range")
    t %= len(header)
    N = data.shape[0]
    if N < 2:
        raise ValueError("need at least two rows to split")
    n_test = min(max(int(round(test_fraction * N)), 1), N - 1)
    perm = rng.permutation(N)
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    features = np.delete(data, t, axis=1)
    scale = features[train_idx].std(axis=0)
    if np.any(scale == 0):
        bad = [h for h, s in zip(np.delete(np.array(header), t), scale) if s == 0]
        raise ValueError(f"constant feature column(s) in training split: {bad}")
    features = features / scale
    train = RegressionDataset(X=features[train_idx], Y=data[train_idx, t])
    test = RegressionDataset(X=features[test_idx], Y=data[test_idx, t])
    return train, test
