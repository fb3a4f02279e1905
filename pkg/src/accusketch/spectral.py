"""Spectral diagnostics of an empirical kernel matrix.

Everything is expressed through the eigendecomposition ``K/n = U diag(sigma) U^T``
with ``sigma`` sorted in decreasing order.  For a level ``delta > 0`` the
column ``i`` of ``Psi`` has squared norm ``sum_j U[i, j]^2 w_j`` where
``w_j = sigma_j / (sigma_j + delta)``; these are the ridge leverage scores and
they sum to the statistical dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .sketch import SamplingDistribution, SketchMatrix, transpose_apply


@dataclass(frozen=True)
class SpectralProfile:
    n: int
    sigma: np.ndarray
    U: np.ndarray

    def weights(self, delta: float) -> np.ndarray:
        _check_delta(delta)
        return self.sigma / (self.sigma + delta)


@dataclass(frozen=True)
class SatisfiabilityReport:
    cond1_value: float
    cond2_value: float
    delta: float
    c: float
    pass1: bool
    pass2: bool

    @property
    def passed(self) -> bool:
        return self.pass1 and self.pass2


def _check_delta(delta):
    if not (np.isfinite(delta) and delta > 0):
        raise ValueError(f"delta must be positive, got {delta}")


def decompose(K) -> SpectralProfile:
    """Eigendecomposition of ``K/n``; negative round-off eigenvalues become 0."""
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    if K.ndim != 2 or K.shape[1] != n:
        raise ValueError("K must be square")
    try:
        vals, vecs = linalg.eigh(K / n, check_finite=True)
    except linalg.LinAlgError as exc:
        raise RuntimeError("eigensolver did not converge") from exc
    order = np.argsort(vals)[::-1]
    sigma = np.maximum(vals[order], 0.0)
    return SpectralProfile(n=n, sigma=sigma, U=np.ascontiguousarray(vecs[:, order]))


def d_delta(profile: SpectralProfile, delta: float) -> int:
    """Number of leading eigenvalues strictly above ``delta``.

    Returns ``n`` when no eigenvalue is at or below ``delta``.
    """
    _check_delta(delta)
    below = np.flatnonzero(profile.sigma <= delta)
    return int(below[0]) if below.size else profile.n


def leverage_scores(profile: SpectralProfile, lam: float) -> np.ndarray:
    """Diagonal of ``K (K + n lam I)^{-1}`` in spectral form."""
    return (profile.U**2) @ profile.weights(lam)


def statistical_dimension(profile: SpectralProfile, delta: float) -> float:
    return float(profile.weights(delta).sum())


def psi_column_norms(profile: SpectralProfile, delta: float):
    """Squared column norms of ``Psi``: full and restricted to the top ``d_delta`` rows."""
    w = profile.weights(delta)
    sq = profile.U**2
    k = d_delta(profile, delta)
    return sq @ w, sq[:, :k] @ w[:k]


def incoherence(profile: SpectralProfile, delta: float, P: SamplingDistribution) -> float:
    full, head = psi_column_norms(profile, delta)
    if P.n != profile.n:
        raise ValueError("sampling distribution size does not match the profile")
    return float(max(np.max(head / P.p), np.max((full - head) / P.p)))


def check_k_satisfiability(
    S: SketchMatrix, profile: SpectralProfile, delta: float, c: float = 1.0
) -> SatisfiabilityReport:
    """Evaluate both K-satisfiability conditions for a sketch.

    Condition 1 is ``||U1^T S S^T U1 - I||_op <= 1/2`` over the top ``d_delta``
    eigenvectors; condition 2 is ``||S^T U2 Sigma2^{1/2}||_op <= c sqrt(delta)``
    over the rest.  An empty block makes its condition hold with value 0.
    """
    _check_delta(delta)
    if S.n != profile.n:
        raise ValueError(f"sketch has {S.n} rows, profile has {profile.n}")
    k = d_delta(profile, delta)
    cond1 = 0.0
    if k > 0:
        W = transpose_apply(S, profile.U[:, :k])
        G = W.T @ W
        G[np.diag_indices(k)] -= 1.0
        cond1 = float(np.max(np.abs(linalg.eigvalsh(G))))
    cond2 = 0.0
    if k < profile.n:
        T = transpose_apply(S, profile.U[:, k:] * np.sqrt(profile.sigma[k:]))
        cond2 = float(linalg.svdvals(T)[0]) if T.size else 0.0
    return SatisfiabilityReport(
        cond1_value=cond1,
        cond2_value=cond2,
        delta=delta,
        c=c,
        pass1=bool(cond1 <= 0.5),
        pass2=bool(cond2 <= c * np.sqrt(delta)),
    )


@dataclass(frozen=True)
class BlockInstance:
    K: np.ndarray
    delta: float
    dense: np.ndarray


def block_instance(
    n: int = 64,
    dense_size: int = 8,
    hub_mass: float | None = 0.6,
    top: float = 1.0,
    delta: float = 0.05,
) -> BlockInstance:
    """Deterministic two-cluster kernel matrix with high incoherence.

    ``K = blockdiag(A, B)``: ``A`` lives on the first ``dense_size`` samples
    (the dense cluster), ``B = I`` on the rest (an extremely sparse cluster of
    isolated points, whose eigenvalues ``1/n`` sit at or below ``delta``).

    With ``hub_mass`` given, ``A`` has one eigenvalue ``n * top`` above the
    level ``n * delta``, and its eigenvector puts mass ``hub_mass`` on sample 0
    and spreads the rest evenly over the cluster.  With ``hub_mass=None``
    every eigenvalue of ``A`` is above the level (geometrically spaced from
    ``n * top`` down to ``n * 2 * delta``), with coordinate eigenvectors.
    """
    if not 1 <= dense_size < n:
        raise ValueError("dense_size must be in [1, n)")
    if top <= delta:
        raise ValueError("top eigenvalue must exceed delta")
    if delta < 1.0 / n:
        raise ValueError("delta must be at least 1/n so the sparse cluster stays below it")
    c = dense_size
    if hub_mass is None:
        sig = np.geomspace(top, 2 * delta, c) if c > 1 else np.array([top])
        A = n * np.diag(sig)
    else:
        if not 0 < hub_mass <= 1 or c < 2:
            raise ValueError("hub instance needs 0 < hub_mass <= 1 and dense_size >= 2")
        u = np.full(c, np.sqrt((1 - hub_mass) / (c - 1)))
        u[0] = np.sqrt(hub_mass)
        rest = linalg.null_space(u[None, :])
        tail = delta * 0.5 ** np.arange(2, c + 1)
        A = n * (top * np.outer(u, u) + (rest * tail) @ rest.T)
    K = np.zeros((n, n))
    K[:c, :c] = 0.5 * (A + A.T)
    K[np.arange(c, n), np.arange(c, n)] = 1.0
    return BlockInstance(K=K, delta=delta, dense=np.arange(c))
