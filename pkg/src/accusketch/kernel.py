"""Stationary kernels and empirical kernel (Gram) matrices.

Two families are supported: the Gaussian kernel ``exp(-r^2 / (2 sigma^2))``
and the Matern kernel with half-integer smoothness 0.5, 1.5 or 2.5, for
which closed forms exist.  Every kernel here equals 1 at ``r = 0`` and
decays monotonically to 0 as ``r`` grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

MATERN_SMOOTHNESS = (0.5, 1.5, 2.5)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and hyperparameters.

    Parameters
    ----------
    family : {"gaussian", "matern"}
    bandwidth : float
        Gaussian bandwidth sigma.  Ignored by the Matern family.
    lengthscale : float
        Matern lengthscale.  Ignored by the Gaussian family.
    smoothness : float
        Matern smoothness nu, one of 0.5, 1.5, 2.5.
    """

    family: str = "gaussian"
    bandwidth: float = 1.0
    lengthscale: float = 1.0
    smoothness: float = 1.5

    def __post_init__(self):
        if self.family not in ("gaussian", "matern"):
            raise ValueError(f"unknown kernel family {self.family!r}")
        for name in ("bandwidth", "lengthscale"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")
        if self.family == "matern" and self.smoothness not in MATERN_SMOOTHNESS:
            raise ValueError(
                f"matern smoothness must be one of {MATERN_SMOOTHNESS}, got {self.smoothness}"
            )

    @classmethod
    def gaussian(cls, bandwidth: float) -> "KernelSpec":
        return cls(family="gaussian", bandwidth=bandwidth)

    @classmethod
    def matern(cls, smoothness: float, lengthscale: float = 1.0) -> "KernelSpec":
        return cls(family="matern", smoothness=smoothness, lengthscale=lengthscale)

    def from_sq_dist(self, sq: np.ndarray) -> np.ndarray:
        """Apply the kernel profile to an array of squared distances."""
        sq = np.asarray(sq, dtype=float)
        if self.family == "gaussian":
            return np.exp(sq * (-0.5 / self.bandwidth**2))
        r = np.sqrt(sq) / self.lengthscale
        if self.smoothness == 0.5:
            return np.exp(-r)
        if self.smoothness == 1.5:
            t = math.sqrt(3.0) * r
            return (1.0 + t) * np.exp(-t)
        t = math.sqrt(5.0) * r
        return (1.0 + t + t * t / 3.0) * np.exp(-t)


def _as_points(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"{name} must be a non-empty (n, d_X) array")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def _as_vector(x, name) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Kernel value k(x, y) for two points of equal dimension."""
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    diff = x - y
    return float(spec.from_sq_dist(diff @ diff))


def gram(spec: KernelSpec, X) -> np.ndarray:
    """Empirical kernel matrix ``K[i, j] = k(x_i, x_j)``.

    The pairwise distances are computed once per unordered pair and mirrored,
    so the result is exactly symmetric with a unit diagonal.
    """
    X = _as_points(X)
    n = X.shape[0]
    if n == 1:
        return np.ones((1, 1))
    sq = pdist(X, "sqeuclidean")
    vals = spec.from_sq_dist(sq)
    del sq
    K = squareform(vals, checks=False)
    np.fill_diagonal(K, 1.0)
    return K


def cross_row(spec: KernelSpec, x, X) -> np.ndarray:
    """Row vector ``[k(x, x_1), ..., k(x, x_n)]``."""
    X = _as_points(X)
    x = _as_vector(x, "x")
    if x.shape[0] != X.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {X.shape[1]}")
    return cross_matrix(spec, x[None, :], X)[0]


def cross_matrix(spec: KernelSpec, Xq, X) -> np.ndarray:
    """Kernel values between query rows ``Xq`` (q, d_X) and ``X`` (n, d_X)."""
    Xq = _as_points(Xq, "Xq")
    X = _as_points(X)
    if Xq.shape[1] != X.shape[1]:
        raise ValueError(f"dimension mismatch: {Xq.shape[1]} vs {X.shape[1]}")
    return spec.from_sq_dist(cdist(Xq, X, "sqeuclidean"))
