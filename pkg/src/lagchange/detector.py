"""Moving two-sample scan over lagged observation pairs.

For a p-variate series X_1..X_n and a lag l, the scan works on the rows
Y_t = (X_t, X_{t+l}) in R^{2p}, t = 1..n-l.  At each position k in
[G, n-G] it compares the w = G - l rows left of k against the w rows
starting at k+1+l shifted so that both windows hold w rows exactly G
apart, via the kernel two-sample discrepancy

    T(k) = sign/w^2 * [ sum_{s,t in L} h + sum_{s,t in R} h
                        - 2 sum_{s in L, t in R} h ],

with L = {k-G+1..k-l} and R = {k+1..k+G-l} (1-based row indices).

The sweep below never forms the O(G^2) pair blocks per position.
Grouping the three block sums pairwise gives a single field

    g(u, v) = h(Y_u, Y_v) + h(Y_{u+G}, Y_{v+G})
              - h(Y_u, Y_{v+G}) - h(Y_v, Y_{u+G})

(0-based rows), and T(k) = sign/w^2 * sum_{u,v in W_i} g(u, v) where
W_i = [i, i+w) and i = k - G.  Only band diagonals |u - v| < w are ever
needed, each is one vector of rowwise kernel calls, and every window sum
is a difference of two prefix sums.  Total kernel work is about 3 n G
evaluations for the whole profile, O(n) memory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernels import KernelSpec, eval_pairs


@dataclass(frozen=True)
class TimeSeries:
    """An (n, p) float array of observations, validated once."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("series must be a non-empty (n, p) array")
        if not np.isfinite(v).all():
            raise ValueError("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LaggedSeries:
    """Rows Y_t = (X_t, X_{t+lag}) stacked as an (n - lag, 2p) array."""

    rows: np.ndarray
    lag: int
    n: int

    @property
    def m(self) -> int:
        return self.rows.shape[0]


def make_lagged(ts: TimeSeries, lag: int) -> LaggedSeries:
    if not isinstance(lag, (int, np.integer)) or isinstance(lag, bool):
        raise ValueError("lag must be an integer")
    lag = int(lag)
    if lag < 0 or lag >= ts.n:
        raise ValueError(f"lag must satisfy 0 <= lag < n, got {lag} with n={ts.n}")
    X = ts.values
    m = ts.n - lag
    rows = np.hstack([X[:m], X[lag:]])
    rows.setflags(write=False)
    return LaggedSeries(rows=rows, lag=lag, n=ts.n)


@dataclass(frozen=True)
class DetectorProfile:
    """Scan statistic values at positions k = bandwidth .. n - bandwidth."""

    values: np.ndarray
    bandwidth: int
    lag: int
    kernel: KernelSpec
    n: int

    @property
    def positions(self) -> np.ndarray:
        return np.arange(self.bandwidth, self.n - self.bandwidth + 1)


def _check_geometry(ls: LaggedSeries, bandwidth: int) -> int:
    if not isinstance(bandwidth, (int, np.integer)) or isinstance(bandwidth, bool):
        raise ValueError("bandwidth must be an integer")
    G = int(bandwidth)
    if G < 2:
        raise ValueError("bandwidth must be at least 2")
    if G <= ls.lag:
        raise ValueError(f"bandwidth {G} must exceed the lag {ls.lag}")
    if ls.n < 2 * G:
        raise ValueError(f"series length {ls.n} is below 2*bandwidth = {2 * G}")
    return G


def _diag_values(
    rows: np.ndarray, G: int, d: int, kernel: KernelSpec
) -> np.ndarray:
    """The g-field on diagonal v = u + d, u = 0 .. m - G - d - 1."""
    m = rows.shape[0]
    L = m - G - d
    hd = eval_pairs(kernel, rows[: m - d], rows[d:])
    cross_a = eval_pairs(kernel, rows[:L], rows[G + d : G + d + L])
    cross_b = eval_pairs(kernel, rows[d : d + L], rows[G : G + L])
    return hd[:L] + hd[G : G + L] - cross_a - cross_b


def _window_sums(band: np.ndarray, width: int, count: int) -> np.ndarray:
    """sums[i] = band[i] + ... + band[i + width - 1], for i = 0..count-1."""
    cs = np.concatenate([[0.0], np.cumsum(band)])
    return cs[width : width + count] - cs[:count]


def detector_profile(
    ls: LaggedSeries, bandwidth: int, kernel: KernelSpec
) -> DetectorProfile:
    """Scan statistic at every admissible position, O(nG) kernel work."""
    G = _check_geometry(ls, bandwidth)
    w = G - ls.lag
    numk = ls.n - 2 * G + 1
    q1 = np.zeros(numk)
    for d in range(w):
        band = _diag_values(ls.rows, G, d, kernel)
        s = _window_sums(band, w - d, numk)
        q1 += s if d == 0 else 2.0 * s
    vals = (kernel.sign / float(w * w)) * q1
    vals.setflags(write=False)
    return DetectorProfile(
        values=vals, bandwidth=G, lag=ls.lag, kernel=kernel, n=ls.n
    )


def _block_sum(kernel: KernelSpec, A: np.ndarray, B: np.ndarray) -> float:
    """sum over all (s, t) of h(A[s], B[t]); |A| * |B| kernel evaluations."""
    a = np.repeat(A, B.shape[0], axis=0)
    b = np.tile(B, (A.shape[0], 1))
    return float(eval_pairs(kernel, a, b).sum())


def direct_detector(
    ls: LaggedSeries, bandwidth: int, k: int, kernel: KernelSpec
) -> float:
    """Literal block-sum evaluation of T(k); O(G^2) kernel evaluations.

    Slow by design.  This is the in-package cross-check for the sweep.
    """
    G = _check_geometry(ls, bandwidth)
    if not (G <= k <= ls.n - G):
        raise ValueError(f"position k={k} outside [{G}, {ls.n - G}]")
    w = G - ls.lag
    i = k - G
    left = ls.rows[i : i + w]
    right = ls.rows[i + G : i + G + w]
    within = _block_sum(kernel, left, left) + _block_sum(kernel, right, right)
    cross = _block_sum(kernel, left, right)
    return kernel.sign * (within - 2.0 * cross) / float(w * w)
