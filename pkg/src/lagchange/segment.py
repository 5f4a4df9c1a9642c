"""Change point selection, cross-lag merging and the detection pipelines.

A position k is reported as a change point estimate when the scan profile
exceeds the bootstrap threshold there, is the largest profile value in a
+-floor(eta*G) neighbourhood (ties resolved to the smallest k), and sits
inside a threshold-exceedance run strictly longer than
floor(min_exceed_frac * G).

Estimates found at several lags are merged by ascending location: the
smallest remaining location seeds a cluster of everything within c*G of
it, the cluster's best member (highest score, then highest statistic,
then smallest location, then smallest lag) is emitted and the cluster
dropped.  Merged outputs are therefore at least c*G apart.

Bandwidth ladders are merged coarse-to-fine: every estimate from the
finest bandwidth is kept, and an estimate at a coarser bandwidth G_r is
kept only if it is at least big_c * G_r away from everything kept so far.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .bootstrap import BootstrapConfig, importance_score, run_bootstrap
from .detector import DetectorProfile, LaggedSeries, TimeSeries, detector_profile, make_lagged
from .kernels import DegenerateScale, KernelSpec, auto_scale


@dataclass(frozen=True)
class ChangePointEstimate:
    location: int
    lag: int
    stat: float
    score: float
    bandwidth: int


@dataclass(frozen=True)
class MergeParams:
    eta: float = 0.4
    c: float = 1.0
    big_c: float = 0.8
    min_exceed_frac: float = 0.02

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0):
            raise ValueError("eta must lie in (0, 1)")
        if not (0.0 < self.c <= 2.0):
            raise ValueError("c must lie in (0, 2]")
        if not (0.0 < self.big_c < 1.0):
            raise ValueError("big_c must lie in (0, 1)")
        if not (0.0 <= self.min_exceed_frac < 1.0):
            raise ValueError("min_exceed_frac must lie in [0, 1)")


@dataclass(frozen=True)
class Segmentation:
    """n plus strictly increasing interior change points in {1..n-1}.

    Change point q means the segment boundary after position q: segments
    are {1..q_1}, {q_1+1..q_2}, ..., {q_last+1..n} in 1-based time.
    """

    n: int
    changes: tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        ch = tuple(int(c) for c in self.changes)
        for c in ch:
            if not (1 <= c <= self.n - 1):
                raise ValueError(f"change point {c} outside 1..{self.n - 1}")
        if any(a >= b for a, b in zip(ch, ch[1:])):
            raise ValueError("change points must be strictly increasing")
        object.__setattr__(self, "changes", ch)

    def intervals(self) -> list[tuple[int, int]]:
        """Segments as 0-based half-open (start, end) pairs covering [0, n)."""
        bounds = [0, *self.changes, self.n]
        return list(zip(bounds[:-1], bounds[1:]))


def _sliding_max_before(vals: np.ndarray, h: int) -> np.ndarray:
    """out[i] = max(vals[i-h : i]), -inf when the slice is empty."""
    out = np.full(vals.shape[0], -np.inf)
    dq: deque[int] = deque()
    for i in range(vals.shape[0]):
        while dq and dq[0] < i - h:
            dq.popleft()
        if dq:
            out[i] = vals[dq[0]]
        while dq and vals[dq[-1]] <= vals[i]:
            dq.pop()
        dq.append(i)
    return out


def _sliding_max_after(vals: np.ndarray, h: int) -> np.ndarray:
    """out[i] = max(vals[i+1 : i+h+1]), -inf when the slice is empty."""
    return _sliding_max_before(vals[::-1], h)[::-1]


def _run_lengths(mask: np.ndarray) -> np.ndarray:
    """Length of the maximal True run covering each index (0 where False)."""
    out = np.zeros(mask.shape[0], dtype=np.int64)
    i = 0
    while i < mask.shape[0]:
        if mask[i]:
            j = i
            while j < mask.shape[0] and mask[j]:
                j += 1
            out[i:j] = j - i
            i = j
        else:
            i += 1
    return out


def locate_changes(
    profile: DetectorProfile, threshold: float, params: MergeParams
) -> list[ChangePointEstimate]:
    """Accepted positions of one profile against one threshold.

    Scores are not known at this stage and are set to 0.0; the pipelines
    fill them in from the bootstrap replicates.
    """
    if not (threshold > 0.0):
        raise ValueError("threshold must be positive")
    vals = profile.values
    G = profile.bandwidth
    h = int(params.eta * G)
    min_run = int(params.min_exceed_frac * G)

    exceed = vals > threshold
    runs = _run_lengths(exceed)
    left = _sliding_max_before(vals, h)
    right = _sliding_max_after(vals, h)

    out = []
    for i in np.flatnonzero(exceed & (runs > min_run)):
        if vals[i] > left[i] and vals[i] >= right[i]:
            out.append(
                ChangePointEstimate(
                    location=int(G + i),
                    lag=profile.lag,
                    stat=float(vals[i]),
                    score=0.0,
                    bandwidth=G,
                )
            )
    return out


def _merge_key(est: ChangePointEstimate, select: str):
    if select == "score":
        return (-est.score, -est.stat, est.location, est.lag)
    return (-est.stat, -est.score, est.location, est.lag)


def multi_lag_merge(
    candidates: Iterable[Iterable[ChangePointEstimate]],
    bandwidth: int,
    params: MergeParams,
    select: str = "score",
) -> list[ChangePointEstimate]:
    """Merge per-lag candidate lists into one estimate per cluster."""
    if select not in ("score", "stat"):
        raise ValueError("select must be 'score' or 'stat'")
    pool = sorted(
        (e for lst in candidates for e in lst), key=lambda e: (e.location, e.lag)
    )
    spacing = params.c * bandwidth
    out = []
    while pool:
        base = pool[0].location
        cluster = [e for e in pool if e.location - base < spacing]
        out.append(min(cluster, key=lambda e: _merge_key(e, select)))
        pool = pool[len(cluster) :]
    out.sort(key=lambda e: (e.location, e.lag))
    return out


def multiscale_merge(
    per_bandwidth: Sequence[tuple[int, Sequence[ChangePointEstimate]]],
    params: MergeParams,
) -> list[ChangePointEstimate]:
    """Merge estimates across a fine-to-coarse bandwidth ladder.

    ``per_bandwidth`` pairs (G, estimates) must come ordered by strictly
    increasing G.  Everything from the finest bandwidth is accepted;
    estimates at coarser G are accepted only at distance >= big_c * G
    from every estimate accepted before them (earlier same-G acceptances
    included, processed in ascending location order).
    """
    gs = [g for g, _ in per_bandwidth]
    if any(a >= b for a, b in zip(gs, gs[1:])):
        raise ValueError("bandwidths must be strictly increasing")
    accepted: list[ChangePointEstimate] = []
    for idx, (G, ests) in enumerate(per_bandwidth):
        for e in sorted(ests, key=lambda e: (e.location, e.lag)):
            if idx == 0 or all(
                abs(e.location - a.location) >= params.big_c * G for a in accepted
            ):
                accepted.append(e)
    accepted.sort(key=lambda e: (e.location, e.bandwidth, e.lag))
    return accepted


def default_bandwidth(n: int) -> int:
    return n // 6


def bandwidth_ladder(n: int) -> list[int]:
    """Fibonacci-style bandwidth ladder G_m = G_{m-1} + G_{m-2}.

    Starts at max(60, n // 16) and grows while a window pair still fits.
    """
    g0 = g1 = max(60, n // 16)
    if 2 * g1 > n:
        raise ValueError(f"series too short for the bandwidth ladder (n={n})")
    ladder = [g1]
    while True:
        g0, g1 = g1, g0 + g1
        if 2 * g1 > n:
            return ladder
        ladder.append(g1)


@dataclass(frozen=True)
class SingleLagResult:
    """Everything one single-lag pass produces; pipelines and CLI share it."""

    lag: int
    kernel: KernelSpec
    profile: DetectorProfile
    replicates: np.ndarray
    threshold: float
    estimates: list[ChangePointEstimate]


def _resolve_kernel(
    kernel: KernelSpec | str,
    ls: LaggedSeries,
    bandwidth: int,
    master_seed: int,
) -> KernelSpec:
    if isinstance(kernel, KernelSpec):
        return kernel
    seed = int(
        np.random.SeedSequence(master_seed, spawn_key=(2, ls.lag)).generate_state(
            1, np.uint64
        )[0]
    )
    try:
        return auto_scale(kernel, ls.rows, ls.lag, bandwidth, seed=seed)
    except DegenerateScale as exc:
        raise DegenerateScale(
            f"degenerate kernel scale at lag {ls.lag}: {exc}", lag=ls.lag
        ) from exc


def run_single_lag(
    ts: TimeSeries,
    lag: int,
    bandwidth: int,
    kernel: KernelSpec | str,
    config: BootstrapConfig,
    params: MergeParams,
) -> SingleLagResult:
    """One full pass at one lag: profile, bootstrap, selection, scores."""
    ls = make_lagged(ts, lag)
    kspec = _resolve_kernel(kernel, ls, bandwidth, config.master_seed)
    prof = detector_profile(ls, bandwidth, kspec)
    boot = run_bootstrap(ls, bandwidth, kspec, config)
    if boot.threshold > 0.0:
        found = locate_changes(prof, boot.threshold, params)
    else:
        # all-zero replicates happen only for degenerate data; nothing to find
        found = []
    ests = [
        replace(e, score=importance_score(e.stat, boot.replicates)) for e in found
    ]
    return SingleLagResult(
        lag=lag,
        kernel=kspec,
        profile=prof,
        replicates=boot.replicates,
        threshold=boot.threshold,
        estimates=ests,
    )


def detect_single_lag(
    ts: TimeSeries,
    lag: int,
    bandwidth: int,
    kernel: KernelSpec | str,
    config: BootstrapConfig,
    params: MergeParams,
) -> tuple[list[ChangePointEstimate], float]:
    res = run_single_lag(ts, lag, bandwidth, kernel, config, params)
    return res.estimates, res.threshold


def run_multi_lag(
    ts: TimeSeries,
    lags: Sequence[int],
    bandwidth: int,
    kernel: KernelSpec | str,
    config: BootstrapConfig,
    params: MergeParams,
    select: str = "score",
) -> tuple[list[SingleLagResult], list[ChangePointEstimate]]:
    lags = sorted(set(int(l) for l in lags))
    if not lags:
        raise ValueError("at least one lag is required")

    def one(lag: int) -> SingleLagResult:
        return run_single_lag(ts, lag, bandwidth, kernel, config, params)

    if config.threads > 1 and len(lags) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(one, lags))
    else:
        results = [one(lag) for lag in lags]
    merged = multi_lag_merge(
        [r.estimates for r in results], bandwidth, params, select=select
    )
    return results, merged


def detect_multi_lag(
    ts: TimeSeries,
    lags: Sequence[int],
    bandwidth: int,
    kernel: KernelSpec | str,
    config: BootstrapConfig,
    params: MergeParams,
    select: str = "score",
) -> list[ChangePointEstimate]:
    return run_multi_lag(ts, lags, bandwidth, kernel, config, params, select)[1]


def run_multiscale(
    ts: TimeSeries,
    lags: Sequence[int],
    bandwidths: Sequence[int],
    kernel: KernelSpec | str,
    config: BootstrapConfig,
    params: MergeParams,
    select: str = "score",
) -> tuple[list[tuple[int, list[SingleLagResult]]], list[ChangePointEstimate]]:
    """Multi-lag detection on each bandwidth, merged fine-to-coarse."""
    bws = sorted(set(int(g) for g in bandwidths))
    if not bws:
        raise ValueError("at least one bandwidth is required")
    per_bw = []
    for G in bws:
        usable = [l for l in lags if l < G]
        if not usable:
            raise ValueError(f"no requested lag is below bandwidth {G}")
        results, merged = run_multi_lag(
            ts, usable, G, kernel, config, params, select=select
        )
        per_bw.append((G, results, merged))
    final = multiscale_merge([(G, merged) for G, _, merged in per_bw], params)
    return [(G, results) for G, results, _ in per_bw], final


def run_adaptive(
    ts: TimeSeries,
    initial_lags: Sequence[int],
    bandwidth: int,
    kernel: KernelSpec | str,
    config: BootstrapConfig,
    params: MergeParams,
    max_lag: int = 20,
    select: str = "score",
) -> tuple[list[SingleLagResult], list[ChangePointEstimate], list[int]]:
    """Extend the lag set past ``initial_lags`` while new lags pay off.

    After the multi-lag pass on the initial set, lags max+1, max+2, ...
    are scanned one at a time; a new lag's estimates are taken in
    ascending location and accepted at distance >= c*G from everything
    accepted so far.  The first lag contributing nothing stops the
    extension (as does max_lag, or the lag reaching the bandwidth).
    """
    initial = sorted(set(int(l) for l in initial_lags))
    results, accepted = run_multi_lag(
        ts, initial, bandwidth, kernel, config, params, select=select
    )
    results = list(results)
    accepted = list(accepted)
    used = list(initial)
    spacing = params.c * bandwidth
    lag = max(initial) + 1
    while lag <= max_lag and lag < bandwidth:
        res = run_single_lag(ts, lag, bandwidth, kernel, config, params)
        added = False
        for e in sorted(res.estimates, key=lambda e: e.location):
            if all(abs(e.location - a.location) >= spacing for a in accepted):
                accepted.append(e)
                added = True
        if not added:
            break
        results.append(res)
        used.append(lag)
        lag += 1
    accepted.sort(key=lambda e: (e.location, e.lag))
    return results, accepted, used


def adaptive_lags(
    ts: TimeSeries,
    initial_lags: Sequence[int],
    bandwidth: int,
    kernel: KernelSpec | str,
    config: BootstrapConfig,
    params: MergeParams,
    max_lag: int = 20,
    select: str = "score",
) -> tuple[list[ChangePointEstimate], list[int]]:
    """Accepted estimates plus the lags actually used (see run_adaptive)."""
    _, accepted, used = run_adaptive(
        ts, initial_lags, bandwidth, kernel, config, params, max_lag, select
    )
    return accepted, used
