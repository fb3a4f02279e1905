"""Exact and sketched kernel ridge regression.

Exact KRR solves ``(K + n lam I) alpha = Y`` and predicts ``k(x, X) alpha``.
The sketched estimator restricts the dual coefficients to the range of a
sketch ``S``: with ``C = K S`` it solves the d x d system

    (C^T C + n lam S^T K S) beta = C^T Y

and predicts ``k(x, X) S beta``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import linalg

from .kernel import KernelSpec, cross_matrix, cross_row
from .sketch import SketchMatrix, sketched_gram

log = logging.getLogger(__name__)

JITTER = 1e-10


class SolverError(RuntimeError):
    """Raised when a regularized system cannot be factorized."""


@dataclass(frozen=True)
class ExactFit:
    alpha: np.ndarray
    lam: float
    K: np.ndarray = field(repr=False)
    spec: Optional[KernelSpec] = None
    X: Optional[np.ndarray] = field(default=None, repr=False)


@dataclass(frozen=True)
class SketchedFit:
    beta: np.ndarray
    S: SketchMatrix = field(repr=False)
    s_beta: np.ndarray = field(repr=False)
    lam: float
    K: np.ndarray = field(repr=False)
    spec: Optional[KernelSpec] = None
    X: Optional[np.ndarray] = field(default=None, repr=False)


Fit = Union[ExactFit, SketchedFit]


def _check_inputs(K, Y, lam):
    K = np.asarray(K, dtype=float)
    Y = np.asarray(Y, dtype=float).ravel()
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("K must be a square matrix")
    if Y.shape[0] != K.shape[0]:
        raise ValueError(f"Y has {Y.shape[0]} entries, K has {K.shape[0]} rows")
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam}")
    if not (np.all(np.isfinite(K)) and np.all(np.isfinite(Y))):
        raise ValueError("non-finite entries in K or Y")
    return K, Y


def spd_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a symmetric positive-definite system by Cholesky.

    On failure, retries once with ``1e-10 * trace(A) / dim`` added to the
    diagonal, then raises :class:`SolverError`.
    """
    try:
        return linalg.cho_solve(linalg.cho_factor(A, lower=True, check_finite=False), b)
    except linalg.LinAlgError:
        pass
    shift = JITTER * np.trace(A) / A.shape[0]
    log.debug("cholesky failed, retrying with diagonal shift %.3e", shift)
    A = A + shift * np.eye(A.shape[0])
    try:
        return linalg.cho_solve(linalg.cho_factor(A, lower=True, check_finite=False), b)
    except linalg.LinAlgError as exc:
        raise SolverError("system is not positive definite after jitter") from exc


def fit_exact(K, Y, lam: float, spec: KernelSpec = None, X=None) -> ExactFit:
    K, Y = _check_inputs(K, Y, lam)
    n = K.shape[0]
    A = K + (n * lam) * np.eye(n)
    alpha = spd_solve(A, Y)
    return ExactFit(alpha=alpha, lam=lam, K=K, spec=spec, X=X)


def fit_sketched(K, Y, lam: float, S: SketchMatrix, spec: KernelSpec = None, X=None) -> SketchedFit:
    K, Y = _check_inputs(K, Y, lam)
    n = K.shape[0]
    if S.n != n:
        raise ValueError(f"sketch has {S.n} rows, expected {n}")
    C, B = sketched_gram(K, S)
    A = C.T @ C + (n * lam) * B
    beta = spd_solve(A, C.T @ Y)
    return SketchedFit(beta=beta, S=S, s_beta=S.apply(beta), lam=lam, K=K, spec=spec, X=X)


def _coefficients(fit: Fit) -> np.ndarray:
    return fit.alpha if isinstance(fit, ExactFit) else fit.s_beta


def predict(fit: Fit, x) -> float:
    if fit.spec is None or fit.X is None:
        raise ValueError("fit has no kernel/input metadata; pass spec and X when fitting")
    return float(cross_row(fit.spec, x, fit.X) @ _coefficients(fit))


def predict_many(fit: Fit, Xq, batch: int = 2048) -> np.ndarray:
    """Predictions at every row of ``Xq``, evaluated in row batches."""
    if fit.spec is None or fit.X is None:
        raise ValueError("fit has no kernel/input metadata; pass spec and X when fitting")
    Xq = np.asarray(Xq, dtype=float)
    if Xq.ndim == 1:
        Xq = Xq[:, None]
    coef = _coefficients(fit)
    out = np.empty(Xq.shape[0])
    for start in range(0, Xq.shape[0], batch):
        stop = start + batch
        out[start:stop] = cross_matrix(fit.spec, Xq[start:stop], fit.X) @ coef
    return out


def in_sample(fit: Fit) -> np.ndarray:
    """Fitted values at the training inputs."""
    return fit.K @ _coefficients(fit)


def empirical_sq_norm(u, v) -> float:
    """Averaged squared difference ``(1/n) sum (u_i - v_i)^2``."""
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {u.shape[0]} vs {v.shape[0]}")
    diff = u - v
    return float(diff @ diff) / diff.shape[0]
