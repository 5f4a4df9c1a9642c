"""Multiplier bootstrap for the scan statistic's null distribution.

Each replicate reweights the scan with a dependent multiplier stream
W_1..W_{n-G}: a Gaussian AR(1) with unit marginal variance and
autocorrelation exp(-1/b_n).  Within a window at position k the
multipliers are centered by their window mean, the right window reusing
W_{t-G}, and the replicate value is the maximum over k of

    T*(k) = sign/w^2 * sum_{u,v in W_i} Wc_u Wc_v g(u, v),

the same banded field g as the scan itself (see detector.py).  Expanding
the window-centered product Wc_u Wc_v = W_u W_v - M (W_u + W_v) + M^2
(M = window mean) turns every replicate into three prefix-sum passes over
the band diagonals, shared across replicates.

Replicates are mutually independent streams seeded from the master seed,
so results do not depend on how work is chunked across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .detector import LaggedSeries, _check_geometry, _diag_values, _window_sums
from .kernels import KernelSpec


@dataclass(frozen=True)
class BootstrapConfig:
    reps: int = 499
    alpha: float = 0.1
    b_n: float = 15.0
    master_seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not isinstance(self.reps, (int, np.integer)) or self.reps < 1:
            raise ValueError("reps must be a positive integer")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError("alpha must lie in (0, 1]")
        if not (math.isfinite(self.b_n) and self.b_n > 0.0):
            raise ValueError("b_n must be a positive finite number")
        if not isinstance(self.threads, (int, np.integer)) or self.threads < 1:
            raise ValueError("threads must be a positive integer")


@dataclass(frozen=True)
class BootstrapResult:
    replicates: np.ndarray  # in replicate order r = 0..R-1
    threshold: float


def default_block_scale(n: int) -> float:
    """Default multiplier dependence scale, 1.5 * n^(1/3)."""
    return 1.5 * float(n) ** (1.0 / 3.0)


def generate_multipliers(length: int, b_n: float, rng: np.random.Generator) -> np.ndarray:
    """One AR(1) multiplier stream with Var = 1, started stationary."""
    if length < 1:
        raise ValueError("multiplier stream length must be positive")
    if not (math.isfinite(b_n) and b_n > 0.0):
        raise ValueError("b_n must be a positive finite number")
    a = math.exp(-1.0 / b_n)
    s = math.sqrt(1.0 - a * a)
    eps = rng.standard_normal(length)
    W = np.empty(length)
    W[0] = eps[0]
    for t in range(1, length):
        W[t] = a * W[t - 1] + s * eps[t]
    return W


def _replicate_rng(master_seed: int, lag: int, r: int) -> np.random.Generator:
    # counter-based stream, keyed so lags and replicates never collide
    ss = np.random.SeedSequence(master_seed, spawn_key=(1, lag, r))
    return np.random.Generator(np.random.Philox(ss))


def _multiplier_matrix(
    reps: int, length: int, b_n: float, master_seed: int, lag: int
) -> np.ndarray:
    """Stacked multiplier streams, row r identical to the single-stream op."""
    a = math.exp(-1.0 / b_n)
    s = math.sqrt(1.0 - a * a)
    W = np.empty((length, reps))
    for r in range(reps):
        W[:, r] = _replicate_rng(master_seed, lag, r).standard_normal(length)
    # recurse in place: row t still holds eps_t when it is consumed
    for t in range(1, length):
        W[t] = a * W[t - 1] + s * W[t]
    return np.ascontiguousarray(W.T)


def _replicate_maxima(
    ls: LaggedSeries,
    bandwidth: int,
    kernel: KernelSpec,
    Wmat: np.ndarray,
    threads: int = 1,
) -> np.ndarray:
    """max_k T*(k) for each multiplier row of Wmat, shape (R, n - G)."""
    G = _check_geometry(ls, bandwidth)
    w = G - ls.lag
    numk = ls.n - 2 * G + 1
    nW = ls.n - G
    Wmat = np.asarray(Wmat, dtype=np.float64)
    if Wmat.ndim != 2 or Wmat.shape[1] != nW:
        raise ValueError(f"multiplier rows must have length n - G = {nW}")
    if not np.isfinite(Wmat).all():
        raise ValueError("multipliers contain non-finite values")
    R = Wmat.shape[0]

    # Window centering is invariant to a constant shift of W, so remove the
    # global row means up front; constant rows then contribute exact zeros.
    Wc = Wmat - Wmat.mean(axis=1, keepdims=True)
    csW = np.concatenate([np.zeros((R, 1)), np.cumsum(Wc, axis=1)], axis=1)
    M = (csW[:, w : w + numk] - csW[:, :numk]) / float(w)

    q1 = np.zeros(numk)
    qw = np.zeros((R, numk))
    qww = np.zeros((R, numk))

    # chunk replicates to bound temporaries and feed the pool; values are
    # chunking-invariant because every operation is per-row
    memcap = max(1, (1 << 22) // max(1, nW))
    chunk = max(1, min(R, memcap, -(-R // max(1, threads))))
    bounds = [(lo, min(lo + chunk, R)) for lo in range(0, R, chunk)]
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 and len(bounds) > 1 else None

    def accumulate(lo: int, hi: int, band: np.ndarray, d: int, Ld: int) -> None:
        Wl = Wc[lo:hi, :Ld]
        Wr = Wc[lo:hi, d : d + Ld]
        pw = (Wl + Wr) * band if d > 0 else Wl * band
        cs = np.concatenate([np.zeros((hi - lo, 1)), np.cumsum(pw, axis=1)], axis=1)
        qw[lo:hi] += cs[:, w - d : w - d + numk] - cs[:, :numk]
        pww = (Wl * Wr) * band
        cs = np.concatenate([np.zeros((hi - lo, 1)), np.cumsum(pww, axis=1)], axis=1)
        sww = cs[:, w - d : w - d + numk] - cs[:, :numk]
        qww[lo:hi] += sww if d == 0 else 2.0 * sww

    try:
        for d in range(w):
            band = _diag_values(ls.rows, G, d, kernel)
            Ld = band.shape[0]
            s1 = _window_sums(band, w - d, numk)
            q1 += s1 if d == 0 else 2.0 * s1
            if pool is None:
                for lo, hi in bounds:
                    accumulate(lo, hi, band, d, Ld)
            else:
                futures = [pool.submit(accumulate, lo, hi, band, d, Ld) for lo, hi in bounds]
                for f in futures:
                    f.result()
    finally:
        if pool is not None:
            pool.shutdown(wait=True)

    T = qww - 2.0 * M * qw + (M * M) * q1[None, :]
    T *= kernel.sign / float(w * w)
    out = T.max(axis=1)
    if not np.isfinite(out).all():
        raise ValueError("bootstrap produced non-finite replicate values")
    return out


def bootstrap_replicate(
    ls: LaggedSeries, bandwidth: int, kernel: KernelSpec, W: np.ndarray
) -> float:
    """Replicate value max_k T*(k) for one explicit multiplier stream."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 1:
        raise ValueError("W must be a 1-d multiplier stream")
    return float(_replicate_maxima(ls, bandwidth, kernel, W[None, :])[0])


def threshold_rank(reps: int, alpha: float) -> int:
    """1-based order-statistic rank of the (1 - alpha) empirical quantile."""
    # the tiny slack absorbs float error in (1 - alpha) * reps (e.g. 0.9 * 500)
    rank = math.ceil((1.0 - alpha) * reps - 1e-12)
    return min(reps, max(1, rank))


def run_bootstrap(
    ls: LaggedSeries,
    bandwidth: int,
    kernel: KernelSpec,
    config: BootstrapConfig,
) -> BootstrapResult:
    """All replicates plus the empirical (1 - alpha) threshold."""
    G = _check_geometry(ls, bandwidth)
    Wmat = _multiplier_matrix(config.reps, ls.n - G, config.b_n, config.master_seed, ls.lag)
    reps = _replicate_maxima(ls, G, kernel, Wmat, threads=config.threads)
    reps.setflags(write=False)
    ordered = np.sort(reps)
    thr = float(ordered[threshold_rank(config.reps, config.alpha) - 1])
    return BootstrapResult(replicates=reps, threshold=thr)


def importance_score(stat: float, replicates: np.ndarray) -> float:
    """Fraction of replicates at or below the observed statistic."""
    replicates = np.asarray(replicates, dtype=np.float64)
    if replicates.ndim != 1 or replicates.size == 0:
        raise ValueError("replicates must be a non-empty vector")
    return float(np.count_nonzero(stat >= replicates)) / replicates.size
