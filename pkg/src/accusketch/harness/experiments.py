"""Experiment runners.

Each replicate derives two independent streams from the master seed: one
for the data (shared by all methods of that replicate, so methods are
compared on identical samples) and one per method for the sketch.  The
record's ``seed`` column is the sketch seed; the data seed is
``derive_seed(master, tag, n, "data", replicate)``.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from scipy import linalg

from .. import sketch as sk
from ..kernel import gram
from ..solver import (
    SolverError,
    empirical_sq_norm,
    fit_exact,
    fit_sketched,
    in_sample,
    predict_many,
)
from ..spectral import (
    block_instance,
    check_k_satisfiability,
    d_delta,
    decompose,
    incoherence,
    leverage_scores,
    statistical_dimension,
)
from ..synthdata import BimodalConfig, RegressionDataset, load_csv, make_dataset
from .config import ExperimentConfig, MethodSpec
from .records import BenchRecord, DiagnosticRecord, ExperimentRecord, derive_seed

log = logging.getLogger(__name__)

FAILURES = (SolverError, linalg.LinAlgError, ValueError, FloatingPointError)


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1e3


def make_sketch(method: MethodSpec, K, d: int, lam: float, rng) -> sk.SketchMatrix:
    n = K.shape[0]
    if method.name == "identity":
        return sk.identity_sketch(n)
    if method.name == "nystrom":
        return sk.build_accumulation(n, d, 1, sk.uniform_distribution(n), rng)
    if method.name == "accumulation":
        return sk.build_accumulation(n, d, method.m, sk.uniform_distribution(n), rng)
    if method.name == "gaussian":
        return sk.build_gaussian(n, d, rng)
    if method.name == "sparse_projection":
        return sk.build_sparse_projection(n, d, rng)
    if method.name == "leverage_nystrom":
        scores = leverage_scores(decompose(K), lam)
        # ties at round-off zero would make the distribution invalid
        scores = np.maximum(scores, np.finfo(float).tiny)
        return sk.build_accumulation(n, d, 1, sk.leverage_distribution(scores), rng)
    raise ValueError(f"no sketch for method {method.name!r}")


def _map(fn, tasks, threads):
    if threads <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _sorted(records, cfg):
    order = {m.label: i for i, m in enumerate(cfg.methods)}
    return sorted(records, key=lambda r: (r.n, order.get(r.method, -1), r.replicate_index))


def _replicate(cfg: ExperimentConfig, tag: str, dataset_name: str, n: int, rep: int,
               data: RegressionDataset, test: RegressionDataset | None):
    """Fit exact KRR and every configured method on one replicate."""
    spec = cfg.kernel.at(n)
    lam = cfg.lambda_schedule(n)
    d = min(cfg.d_schedule.floor(n), n)
    K = gram(spec, data.X)
    t0 = time.perf_counter()
    exact = fit_exact(K, data.Y, lam, spec=spec, X=data.X)
    exact_fit_ms = _ms(t0)
    reference = in_sample(exact)
    records = []
    for method in cfg.methods:
        seed = derive_seed(cfg.master_seed, tag, n, method.label, rep)
        rec = ExperimentRecord(
            experiment=tag, dataset=dataset_name, n=n, method=method.label, m=method.record_m,
            d=n if method.name in ("exact", "identity") else d, replicate_index=rep, seed=seed,
            approx_error=None, estimation_error=None, test_mse=None,
            sketch_time_ms=0.0, fit_time_ms=0.0, predict_time_ms=0.0,
        )
        try:
            if method.name == "exact":
                fit, fitted = exact, reference
                rec.fit_time_ms = exact_fit_ms
            else:
                t0 = time.perf_counter()
                S = make_sketch(method, K, d, lam, np.random.default_rng(seed))
                rec.sketch_time_ms = _ms(t0)
                t0 = time.perf_counter()
                fit = fit_sketched(K, data.Y, lam, S, spec=spec, X=data.X)
                rec.fit_time_ms = _ms(t0)
                fitted = in_sample(fit)
            rec.approx_error = empirical_sq_norm(fitted, reference)
            if data.f_star is not None:
                rec.estimation_error = empirical_sq_norm(fitted, data.f_star)
            if test is not None:
                t0 = time.perf_counter()
                pred = predict_many(fit, test.X)
                rec.predict_time_ms = _ms(t0)
                rec.test_mse = empirical_sq_norm(pred, test.Y)
            else:
                t0 = time.perf_counter()
                in_sample(fit)
                rec.predict_time_ms = _ms(t0)
        except FAILURES as exc:
            log.warning("%s n=%d %s replicate %d failed: %s", tag, n, method.label, rep, exc)
            rec.failure = f"{type(exc).__name__}: {exc}"
        records.append(rec)
    return records


def run_approx_error(cfg: ExperimentConfig) -> list:
    """In-sample gap between sketched and exact KRR on bimodal data."""
    tag = "approx_error"

    def task(item):
        n, rep = item
        rng = np.random.default_rng(derive_seed(cfg.master_seed, tag, n, "data", rep))
        data = make_dataset(BimodalConfig(n, cfg.gamma), cfg.noise_sd, rng)
        return _replicate(cfg, tag, "bimodal", n, rep, data, None)

    tasks = [(n, rep) for n in cfg.n_list for rep in range(cfg.replicates)]
    return _sorted([r for batch in _map(task, tasks, cfg.threads) for r in batch], cfg)


def _synthetic_split(cfg, n, rng):
    n_test = min(cfg.max_test, max(1, round(n * cfg.test_fraction / (1 - cfg.test_fraction))))
    full = make_dataset(BimodalConfig(n + n_test, cfg.gamma), cfg.noise_sd, rng)
    train = RegressionDataset(full.X[:n], full.Y[:n], full.f_star[:n], cfg.noise_sd)
    test = RegressionDataset(full.X[n:], full.Y[n:], full.f_star[n:], cfg.noise_sd)
    return train, test


def run_tradeoff(cfg: ExperimentConfig) -> list:
    """Held-out accuracy and wall-clock cost per method.

    With ``dataset_path`` set, each replicate splits the CSV, draws ``n``
    training rows and at most ``max_test`` test rows.  Otherwise a bimodal
    sample is used, with the noiseless function recorded as well.
    """
    tag = "tradeoff"
    name = Path(cfg.dataset_path).stem if cfg.dataset_path else "bimodal"

    def task(item):
        n, rep = item
        rng = np.random.default_rng(derive_seed(cfg.master_seed, tag, n, "data", rep))
        if cfg.dataset_path:
            pool, test = load_csv(cfg.dataset_path, cfg.target, cfg.test_fraction, rng)
            if n > pool.n:
                raise ValueError(f"n={n} exceeds the {pool.n} available training rows")
            idx = rng.choice(pool.n, size=n, replace=False)
            train = RegressionDataset(pool.X[idx], pool.Y[idx])
            if test.n > cfg.max_test:
                keep = rng.choice(test.n, size=cfg.max_test, replace=False)
                test = RegressionDataset(test.X[keep], test.Y[keep])
        else:
            train, test = _synthetic_split(cfg, n, rng)
        return _replicate(cfg, tag, name, n, rep, train, test)

    tasks = [(n, rep) for n in cfg.n_list for rep in range(cfg.replicates)]
    return _sorted([r for batch in _map(task, tasks, cfg.threads) for r in batch], cfg)


def _pass_rates(cfg, instance_name, profile, delta, d, m, n):
    hits1 = hits_both = 0
    uniform = sk.uniform_distribution(n)
    for trial in range(cfg.trials):
        seed = derive_seed(cfg.master_seed, "diagnose", n, f"{instance_name}:{d}:{m}", trial)
        S = sk.build_accumulation(n, d, m, uniform, np.random.default_rng(seed))
        report = check_k_satisfiability(S, profile, delta)
        hits1 += report.pass1
        hits_both += report.passed
    return hits1 / cfg.trials, hits_both / cfg.trials


def _diagnose_instance(cfg, name, K, delta):
    n = K.shape[0]
    profile = decompose(K)
    k = d_delta(profile, delta)
    m_unif = incoherence(profile, delta, sk.uniform_distribution(n))
    scores = np.maximum(leverage_scores(profile, delta), np.finfo(float).tiny)
    m_lev = incoherence(profile, delta, sk.leverage_distribution(scores))
    d_stat = statistical_dimension(profile, delta)
    out = []
    for mult in cfg.d_multipliers:
        d = max(1, int(round(mult * k)))
        for m in cfg.m_list:
            rate1, rate_both = _pass_rates(cfg, name, profile, delta, d, int(m), n)
            out.append(DiagnosticRecord(
                instance=name, n=n, delta=delta, d_delta=k, d_stat=d_stat,
                M_uniform=m_unif, M_leverage=m_lev, d=d, m=int(m), trials=cfg.trials,
                pass_rate_cond1=rate1, pass_rate_both=rate_both,
            ))
    return out


def run_diagnose(cfg: ExperimentConfig) -> list:
    """Incoherence diagnostics and K-satisfiability pass rates.

    Instances are the deterministic two-cluster block matrix (when
    ``include_block``) and one bimodal kernel matrix per ``n`` with
    ``delta = delta_factor * lambda(n)``.
    """
    records = []
    if cfg.include_block:
        inst = block_instance()
        records += _diagnose_instance(cfg, "block", inst.K, inst.delta)
    for n in cfg.n_list:
        rng = np.random.default_rng(derive_seed(cfg.master_seed, "diagnose", n, "data", 0))
        data = make_dataset(BimodalConfig(n, cfg.gamma), cfg.noise_sd, rng)
        K = gram(cfg.kernel.at(n), data.X)
        records += _diagnose_instance(cfg, "bimodal", K, cfg.delta_factor * cfg.lambda_schedule(n))
    return records


_EVICT_BYTES = 64 * 2**20
_evict_buffer = None


def _evict_caches():
    """Stream a buffer larger than typical last-level caches.

    A fit computes ``KS`` once on a matrix that is not cache-resident, so
    timing repeated calls on a warm cache would flatter small working sets.
    """
    global _evict_buffer
    if _evict_buffer is None:
        _evict_buffer = np.ones(_EVICT_BYTES // 8)
    _evict_buffer.sum()


def _median_ms(fn, repeats):
    fn()  # warm-up, discarded
    times = []
    for _ in range(repeats):
        _evict_caches()
        t0 = time.perf_counter()
        fn()
        times.append(_ms(t0))
    return float(np.median(times))


def _rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), np.finfo(float).tiny))


def bench_products(cfg: ExperimentConfig) -> list:
    """Time structured against dense ``KS`` and ``S^T K S``.

    Accumulation methods in ``cfg.methods`` (or ``cfg.m_list`` when none are
    configured) set the values of ``m``; ``cfg.bench_d`` sets ``d``.
    """
    ms = [meth.m for meth in cfg.methods if meth.name == "accumulation"] or list(cfg.m_list)
    records = []
    for n in cfg.n_list:
        rng = np.random.default_rng(derive_seed(cfg.master_seed, "bench_products", n, "data", 0))
        X = make_dataset(BimodalConfig(n, cfg.gamma), 0.0, rng).X
        K = gram(cfg.kernel.at(n), X)
        for m in ms:
            S = sk.build_accumulation(n, cfg.bench_d, int(m), sk.uniform_distribution(n), rng)
            dense = sk.to_dense(S)
            C = sk.right_multiply(K, S)
            C_dense = K @ dense
            err = max(_rel_err(C, C_dense), _rel_err(sk.transpose_apply(S, C_dense), dense.T @ C_dense))
            if err > 1e-10:
                raise RuntimeError(f"structured products disagree with dense ones (rel err {err:.2e})")
            ks_s = _median_ms(lambda: sk.right_multiply(K, S), cfg.repeats)
            ks_d = _median_ms(lambda: K @ dense, cfg.repeats)
            records.append(BenchRecord(
                n=n, d=cfg.bench_d, m=int(m),
                ks_structured_ms=ks_s, ks_dense_ms=ks_d,
                stks_structured_ms=_median_ms(lambda: sk.transpose_apply(S, C), cfg.repeats),
                stks_dense_ms=_median_ms(lambda: dense.T @ C, cfg.repeats),
                ks_speedup=ks_d / ks_s, max_rel_error=err,
            ))
            del dense, C, C_dense
        del K
    return records
