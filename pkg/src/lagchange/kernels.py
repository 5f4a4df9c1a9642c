"""Stationary kernels for two-sample scan statistics.

Three families, all functions of the difference x - y:

* ``gauss``:   exp(-beta^2 ||x-y||^2 / 2), values in (0, 1].
* ``quadexp``: prod_r (2d - (x_r-y_r)^2) exp(-(x_r-y_r)^2 / (4d)) / (2d),
  values in [-2 exp(-2/3), 1].
* ``energy``:  ||x-y||^gamma with gamma in (0, 2), values >= 0.

gauss and quadexp are positive definite, so the scan statistic built from
them measures "within minus cross" block sums.  energy is conditionally
negative definite and enters with the opposite orientation ("cross minus
within").  The orientation is derived from the family, never stored.

Every kernel evaluation in the process goes through :func:`eval_pairs`,
which maintains a thread-safe global counter used by the complexity tests
and the bench command.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

FAMILIES = ("gauss", "quadexp", "energy")

#: orientation of the two-sample discrepancy per family
WITHIN_MINUS_CROSS = 1
CROSS_MINUS_WITHIN = -1


class DegenerateScale(ValueError):
    """Raised when a data-driven kernel scale collapses to zero.

    Carries the lag of the offending series when raised from a pipeline.
    """

    def __init__(self, message: str, lag: int | None = None):
        super().__init__(message)
        self.lag = lag


_count_lock = threading.Lock()
_eval_count = 0


def reset_eval_count() -> None:
    global _eval_count
    with _count_lock:
        _eval_count = 0


def eval_count() -> int:
    with _count_lock:
        return _eval_count


def _add_evals(k: int) -> None:
    global _eval_count
    with _count_lock:
        _eval_count += k


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family plus its positive scale parameter.

    ``scale`` means beta for gauss, delta for quadexp and gamma for energy.
    """

    family: str
    scale: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        s = float(self.scale)
        if not math.isfinite(s) or s <= 0.0:
            raise ValueError("kernel scale must be a positive finite number")
        if self.family == "energy" and s >= 2.0:
            raise ValueError("energy exponent must lie in (0, 2)")
        object.__setattr__(self, "scale", s)

    @property
    def sign(self) -> int:
        return CROSS_MINUS_WITHIN if self.family == "energy" else WITHIN_MINUS_CROSS


def eval_pairs(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Rowwise kernel values h(x[i], y[i]) for two stacked (m, d) arrays.

    Adds m to the global evaluation counter.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or x.shape != y.shape:
        raise ValueError("eval_pairs expects two arrays of identical (m, d) shape")
    _add_evals(x.shape[0])
    d = x - y
    if spec.family == "gauss":
        ssq = (d * d).sum(axis=1)
        return np.exp(-0.5 * spec.scale * spec.scale * ssq)
    if spec.family == "quadexp":
        z = d * d
        two_d = 2.0 * spec.scale
        factors = (two_d - z) * np.exp(-z / (2.0 * two_d)) / two_d
        return factors.prod(axis=1)
    ssq = (d * d).sum(axis=1)
    return ssq ** (0.5 * spec.scale)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Scalar kernel value for two observation vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ValueError("kernel_eval expects two vectors of equal length")
    return float(eval_pairs(spec, x[None, :], y[None, :])[0])


def median_trick(
    rows: np.ndarray,
    lag: int,
    bandwidth: int,
    cap: int = 50_000,
    seed: int = 0,
) -> float:
    """Data-driven quadexp scale: half the median squared distance.

    The median runs over pairs (s, t) with 0 < |s - t| <= 2*bandwidth - lag
    (capped at the row count minus one), i.e. the separations a scan with
    this bandwidth can compare.  When the pair count exceeds ``cap``, a
    seeded uniform subsample of ``cap`` distinct pairs is used.  The lower
    median is taken, so the result is an actual observed half-distance.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise ValueError("rows must be a 2-d array")
    m = rows.shape[0]
    band = min(2 * bandwidth - lag, m - 1)
    if m < 2 or band < 1:
        raise ValueError("median trick needs at least one pair of rows")

    counts = m - np.arange(1, band + 1)  # pairs at each separation
    total = int(counts.sum())
    if total <= cap:
        chunks = [rows[: m - s] - rows[s:] for s in range(1, band + 1)]
        diffs = np.concatenate(chunks, axis=0)
        sq = (diffs * diffs).sum(axis=1)
    else:
        cum = np.concatenate([[0], np.cumsum(counts)])
        rng = np.random.default_rng(seed)
        chosen = np.unique(rng.integers(0, total, size=cap))
        while chosen.size < cap:
            extra = rng.integers(0, total, size=cap - chosen.size + 64)
            chosen = np.unique(np.concatenate([chosen, extra]))
        flat = np.sort(chosen)[:cap]
        sep = np.searchsorted(cum, flat, side="right")  # 1..band
        u = flat - cum[sep - 1]
        d = rows[u] - rows[u + sep]
        sq = (d * d).sum(axis=1)

    sq = np.sort(sq)
    med = float(sq[(sq.size - 1) // 2])
    if med <= 0.0:
        raise DegenerateScale("median pairwise distance is zero", lag=lag)
    return med / 2.0


def auto_scale(
    family: str,
    rows: np.ndarray,
    lag: int,
    bandwidth: int,
    cap: int = 50_000,
    seed: int = 0,
) -> KernelSpec:
    """Resolve a family name to a full KernelSpec using the data.

    quadexp gets the median-trick delta, gauss gets beta = (2 delta)^(-1/2)
    from the same median, energy takes the fixed exponent 1.0.
    """
    if family == "energy":
        return KernelSpec("energy", 1.0)
    delta = median_trick(rows, lag, bandwidth, cap=cap, seed=seed)
    if family == "quadexp":
        return KernelSpec("quadexp", delta)
    if family == "gauss":
        return KernelSpec("gauss", math.sqrt(1.0 / (2.0 * delta)))
    raise ValueError(f"unknown kernel family {family!r}")
