"""Segmentation quality metrics.

Both metrics treat a segmentation as the partition of {1..n} induced by
its change points and compare partitions, so they are invariant to how
the change points were found.

Covering metric: for each true segment A, the best Jaccard overlap
|A intersect B| / |A union B| over estimated segments B, averaged with
weights |A|/n.  Asymmetric by design; 1.0 iff the partitions agree.

V-measure: harmonic mean of homogeneity and completeness computed from
the entropies of the two partitions (natural logarithms).  A partition
with a single segment has zero entropy; the corresponding conditional
term is defined as perfect (1.0) in that case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .segment import Segmentation


@dataclass(frozen=True)
class EvalReport:
    cm: float
    vm: float
    q_hat: int
    q_true: int


@dataclass(frozen=True)
class AggregateReport:
    """Histogram of q_hat - q_true plus metric means over many runs."""

    bins: tuple[float, float, float, float, float]  # <=-2, -1, 0, +1, >=+2
    mean_cm: float
    mean_vm: float
    count: int


def _check_same_n(est: Segmentation, truth: Segmentation) -> None:
    if est.n != truth.n:
        raise ValueError(f"segmentations disagree on n: {est.n} vs {truth.n}")


def _overlap(a: tuple[int, int], b: tuple[int, int]) -> int:
    return max(0, min(a[1], b[1]) - max(a[0], b[0]))


def covering_metric(est: Segmentation, truth: Segmentation) -> float:
    _check_same_n(est, truth)
    n = truth.n
    est_iv = est.intervals()
    total = 0.0
    for a in truth.intervals():
        best = 0.0
        alen = a[1] - a[0]
        for b in est_iv:
            inter = _overlap(a, b)
            if inter:
                best = max(best, inter / (alen + (b[1] - b[0]) - inter))
        total += alen * best
    return total / n


def _entropy(sizes: Sequence[int], n: int) -> float:
    return -sum((s / n) * math.log(s / n) for s in sizes if s > 0)


def v_measure(est: Segmentation, truth: Segmentation) -> float:
    _check_same_n(est, truth)
    n = truth.n
    tru_iv = truth.intervals()
    est_iv = est.intervals()
    h_true = _entropy([b - a for a, b in tru_iv], n)
    h_est = _entropy([b - a for a, b in est_iv], n)

    h_true_given_est = 0.0
    h_est_given_true = 0.0
    for a in tru_iv:
        for b in est_iv:
            nij = _overlap(a, b)
            if nij:
                h_true_given_est -= (nij / n) * math.log(nij / (b[1] - b[0]))
                h_est_given_true -= (nij / n) * math.log(nij / (a[1] - a[0]))

    hom = 1.0 if h_true == 0.0 else 1.0 - h_true_given_est / h_true
    comp = 1.0 if h_est == 0.0 else 1.0 - h_est_given_true / h_est
    if hom + comp == 0.0:
        return 0.0
    return 2.0 * hom * comp / (hom + comp)


def evaluate(est: Segmentation, truth: Segmentation) -> EvalReport:
    return EvalReport(
        cm=covering_metric(est, truth),
        vm=v_measure(est, truth),
        q_hat=len(est.changes),
        q_true=len(truth.changes),
    )


def aggregate(reports: Sequence[EvalReport]) -> AggregateReport:
    if not reports:
        raise ValueError("aggregate needs at least one report")
    counts = [0, 0, 0, 0, 0]
    for r in reports:
        diff = r.q_hat - r.q_true
        idx = 0 if diff <= -2 else 1 if diff == -1 else 2 if diff == 0 else 3 if diff == 1 else 4
        counts[idx] += 1
    m = len(reports)
    return AggregateReport(
        bins=tuple(c / m for c in counts),
        mean_cm=sum(r.cm for r in reports) / m,
        mean_vm=sum(r.vm for r in reports) / m,
        count=m,
    )
