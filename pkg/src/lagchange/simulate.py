"""Piecewise stationary series generators and the scenario catalog.

A series is described as a list of segment pieces.  Each piece is a dict:

    kind    "iid" | "ar" | "ma" | "var" | "vma" | "garch" | "cov"
    end     1-based last time index of the piece (omitted on the final piece)
    law     innovation law (see _draw_innovations), default standard normal
    scale   innovation multiplier, default 1.0
    mean    scalar or length-p vector added to the finished output
    coeffs  AR/MA coefficient list (univariate kinds)
    matrix  p x p coefficient matrix ("var", "vma")
    sigma   p x p covariance matrix ("cov": output = sym-sqrt(sigma) @ innov)
    omega/alpha/beta   "garch" recursion parameters

All pieces consume one shared innovation stream in time order.  Every
piece starts from the previous piece's terminal state, runs 500 burn-in
steps under its own recursion, and only then emits its visible span, so
each segment starts at (numerically) its stationary law.  Recursion
state and the mean offset are kept separate: means never feed back.

The catalog ids reproduce a fixed set of benchmark designs; ``generate``
scales their change points proportionally when asked for a different n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .detector import TimeSeries
from .segment import Segmentation

BURN_IN = 500

_LAW_KINDS = ("gaussian", "t", "chi2_shifted", "exp_centered", "mixed")
_PIECE_KEYS = {
    "kind", "end", "law", "scale", "mean", "coeffs", "matrix", "sigma",
    "omega", "alpha", "beta",
}


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    n: int | None = None
    seed: int = 0
    overrides: Mapping = field(default_factory=dict)


@dataclass(frozen=True)
class LabeledSeries:
    data: TimeSeries
    truth: Segmentation
    detectable_lags: dict[int, tuple[int, ...]] | None = None


def _draw_innovations(law: Mapping, steps: int, p: int, rng: np.random.Generator) -> np.ndarray:
    kind = law.get("kind", "gaussian")
    if kind == "gaussian":
        return rng.standard_normal((steps, p))
    if kind == "t":
        df = float(law["df"])
        return rng.standard_t(df, size=(steps, p)) * float(law.get("scale", 1.0))
    if kind == "chi2_shifted":
        # mean 1/2, variance 1/4
        return 0.5 + (rng.chisquare(1.0, size=(steps, p)) - 1.0) / (2.0 * math.sqrt(2.0))
    if kind == "exp_centered":
        mean = float(law.get("mean", 1.0))
        return rng.exponential(mean, size=(steps, p)) - mean
    if kind == "mixed":
        laws = law["laws"]
        if len(laws) != p:
            raise ValueError("mixed law needs one sub-law per coordinate")
        out = np.empty((steps, p))
        for j, sub in enumerate(laws):  # column by column, fixed order
            out[:, j] = _draw_innovations(sub, steps, 1, rng)[:, 0]
        return out
    raise ValueError(f"unknown innovation law {kind!r}")


def _check_ar_stationary(coeffs: Sequence[float]) -> np.ndarray:
    c = np.atleast_1d(np.asarray(coeffs, dtype=np.float64))
    if c.ndim != 1 or c.size == 0:
        raise ValueError("AR/MA coefficients must form a non-empty vector")
    trimmed = np.trim_zeros(c, "b")
    if trimmed.size:
        # roots of 1 - a_1 z - ... - a_k z^k must lie outside the unit circle
        roots = np.roots(np.concatenate([-trimmed[::-1], [1.0]]))
        if roots.size and np.abs(roots).min() <= 1.0 + 1e-10:
            raise ValueError("AR coefficients define a nonstationary recursion")
    return c


def _check_var_stationary(matrix) -> np.ndarray:
    A = np.asarray(matrix, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("VAR matrix must be square")
    if np.abs(np.linalg.eigvals(A)).max() >= 1.0:
        raise ValueError("VAR matrix defines a nonstationary recursion")
    return A


def _sym_sqrt(sigma) -> np.ndarray:
    S = np.asarray(sigma, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or not np.allclose(S, S.T):
        raise ValueError("covariance must be a symmetric square matrix")
    vals, vecs = np.linalg.eigh(S)
    if vals.min() < -1e-12:
        raise ValueError("covariance matrix is not positive semidefinite")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def _piece_dim(piece: Mapping) -> int:
    kind = piece["kind"]
    if kind in ("var", "vma"):
        return np.asarray(piece["matrix"]).shape[0]
    if kind == "cov":
        return np.asarray(piece["sigma"]).shape[0]
    law = piece.get("law", {})
    if law.get("kind") == "mixed":
        return len(law["laws"])
    mean = piece.get("mean", 0.0)
    return len(mean) if np.ndim(mean) == 1 else 1


def _tail(arr: np.ndarray | None, k: int, p: int) -> np.ndarray:
    """Last k rows of arr, zero-padded at the front."""
    out = np.zeros((k, p))
    if arr is not None and k > 0:
        take = min(k, arr.shape[0])
        out[k - take :] = arr[arr.shape[0] - take :]
    return out


def _advance(piece: Mapping, e: np.ndarray, state: dict) -> np.ndarray:
    """Run one piece's recursion over its innovations, updating state."""
    kind = piece["kind"]
    steps, p = e.shape

    if kind == "iid":
        x = e
    elif kind == "cov":
        x = e @ _sym_sqrt(piece["sigma"]).T
    elif kind == "ar":
        coeffs = _check_ar_stationary(piece["coeffs"])
        k = coeffs.size
        xa = np.concatenate([_tail(state.get("x"), k, p), np.empty((steps, p))])
        for t in range(steps):
            acc = e[t].copy()
            for i in range(k):
                acc += coeffs[i] * xa[k + t - 1 - i]
            xa[k + t] = acc
        x = xa[k:]
    elif kind == "ma":
        coeffs = np.atleast_1d(np.asarray(piece["coeffs"], dtype=np.float64))
        k = coeffs.size
        ea = np.concatenate([_tail(state.get("e"), k, p), e])
        x = e.copy()
        for i in range(k):
            x += coeffs[i] * ea[k - 1 - i : k - 1 - i + steps]
    elif kind == "var":
        A = _check_var_stationary(piece["matrix"])
        if A.shape[0] != p:
            raise ValueError("VAR matrix dimension does not match the series")
        x = np.empty((steps, p))
        prev = _tail(state.get("x"), 1, p)[0]
        for t in range(steps):
            prev = A @ prev + e[t]
            x[t] = prev
    elif kind == "vma":
        B = np.asarray(piece["matrix"], dtype=np.float64)
        if B.ndim != 2 or B.shape != (p, p):
            raise ValueError("VMA matrix dimension does not match the series")
        ea = np.concatenate([_tail(state.get("e"), 1, p), e])
        x = e + ea[:steps] @ B.T
    elif kind == "garch":
        if p != 1:
            raise ValueError("garch pieces are univariate")
        omega = float(piece["omega"])
        alpha = float(piece["alpha"])
        beta = float(piece["beta"])
        if omega <= 0.0 or alpha < 0.0 or beta < 0.0:
            raise ValueError("garch parameters must satisfy omega > 0, alpha, beta >= 0")
        s2 = state.get("s2")
        if s2 is None:
            s2 = omega / (1.0 - alpha - beta) if alpha + beta < 1.0 else omega
        xprev = float(_tail(state.get("x"), 1, 1)[0, 0])
        x = np.empty((steps, 1))
        for t in range(steps):
            s2 = omega + alpha * xprev * xprev + beta * s2
            xprev = math.sqrt(s2) * e[t, 0]
            x[t, 0] = xprev
        state["s2"] = s2
    else:
        raise ValueError(f"unknown piece kind {kind!r}")

    state["x"] = x[-32:].copy()
    state["e"] = e[-32:].copy()
    return x


def _run_pieces(pieces: Sequence[Mapping], n: int, seed: int) -> tuple[np.ndarray, tuple[int, ...]]:
    if not pieces:
        raise ValueError("at least one piece is required")
    for piece in pieces:
        extra = set(piece) - _PIECE_KEYS
        if extra:
            raise ValueError(f"unknown piece keys {sorted(extra)}")
        if "kind" not in piece:
            raise ValueError("every piece needs a 'kind'")

    dims = {d for piece in pieces if (d := _piece_dim(piece)) > 1}
    if len(dims) > 1:
        raise ValueError(f"pieces disagree on dimension: {sorted(dims)}")
    p = dims.pop() if dims else 1

    ends = [int(piece["end"]) for piece in pieces[:-1]]
    if "end" in pieces[-1] and int(pieces[-1]["end"]) != n:
        raise ValueError("the final piece must end at n (omit its 'end')")
    bounds = [0, *ends, n]
    if any(a >= b for a, b in zip(bounds, bounds[1:])) or (ends and ends[-1] > n - 1):
        raise ValueError("piece ends must be strictly increasing inside 1..n-1")

    rng = np.random.default_rng(seed)
    out = np.empty((n, p))
    state: dict = {}
    for piece, (start, stop) in zip(pieces, zip(bounds[:-1], bounds[1:])):
        steps = BURN_IN + (stop - start)
        e = _draw_innovations(piece.get("law", {}), steps, p, rng)
        scale = piece.get("scale", 1.0)
        if scale != 1.0:
            e = e * float(scale)
        x = _advance(piece, e, state)
        mean = np.asarray(piece.get("mean", 0.0), dtype=np.float64)
        out[start:stop] = x[BURN_IN:] + mean
    return out, tuple(ends)


def generate_custom(pieces: Sequence[Mapping], n: int, seed: int = 0) -> LabeledSeries:
    """Series from explicit piece descriptors; truth = the piece ends."""
    data, changes = _run_pieces(pieces, n, seed)
    return LabeledSeries(
        data=TimeSeries(data), truth=Segmentation(n=n, changes=changes)
    )


# --------------------------------------------------------------------------
# scenario catalog


def _scale_points(thetas: Sequence[int], n: int, n0: int) -> list[int]:
    pts = [(int(t) * n) // n0 for t in thetas]
    if any(a >= b for a, b in zip(pts, pts[1:])) or (pts and (pts[0] < 1 or pts[-1] > n - 1)):
        raise ValueError(f"n={n} is too short to hold the scenario's change points")
    return pts


def _segmented(base: Mapping, n: int, ends: Sequence[int], **per_segment) -> list[dict]:
    """q+1 copies of a base piece with per-segment field values spliced in."""
    counts = {len(v) for v in per_segment.values()}
    if counts and counts != {len(ends) + 1}:
        raise ValueError("per-segment parameter lists must have q+1 entries")
    pieces = []
    for j in range(len(ends) + 1):
        piece = dict(base)
        for key, values in per_segment.items():
            piece[key] = values[j]
        if j < len(ends):
            piece["end"] = ends[j]
        pieces.append(piece)
    return pieces


_T5_STD = {"kind": "t", "df": 5.0, "scale": math.sqrt(3.0 / 5.0)}
_T5_RAW = {"kind": "t", "df": 5.0}
_T25_STD = {"kind": "t", "df": 2.5, "scale": 1.0 / math.sqrt(5.0)}
_GAUSS = {"kind": "gaussian"}

_EYE2 = ((1.0, 0.0), (0.0, 1.0))
_COR2_9 = ((1.0, 0.9), (0.9, 1.0))


def _cor2(rho: float) -> tuple:
    return ((1.0, rho), (rho, 1.0))


def _kms(rho: float, p: int, power_shift: int = 0) -> tuple:
    return tuple(
        tuple(rho ** (abs(i - j) + power_shift) for j in range(p)) for i in range(p)
    )


def _offdiag(diag: float, off: float, p: int) -> tuple:
    return tuple(
        tuple(diag if i == j else off for j in range(p)) for i in range(p)
    )


@dataclass(frozen=True)
class _Entry:
    n0: int
    defaults: Mapping
    build: Callable  # (n, prm) -> (pieces, truth, detectable)


def _mean_family(noise: Mapping):
    def build(n, prm):
        ends = _scale_points(prm["theta"], n, prm["n0"])
        return _segmented(noise, n, ends, mean=list(prm["mu"])), None, None

    return build


def _null(piece: Mapping):
    def build(n, prm):
        return [dict(piece)], None, None

    return build


def _catalog() -> dict[str, _Entry]:
    cat: dict[str, _Entry] = {}

    # stationary null models
    cat["N1"] = _Entry(1000, {}, _null({"kind": "iid"}))
    cat["N2"] = _Entry(1000, {}, _null({"kind": "iid", "law": _T5_RAW}))
    cat["N3"] = _Entry(1000, {"coeff": 0.7}, lambda n, prm: (
        [{"kind": "ar", "coeffs": (prm["coeff"],)}], None, None))
    cat["N4"] = _Entry(1000, {}, _null({"kind": "ma", "coeffs": (0.9, 0.8, 0.7, 0.6)}))
    cat["N5"] = _Entry(1000, {}, _null(
        {"kind": "garch", "omega": 0.5, "alpha": 0.4, "beta": 0.0}))
    cat["N6"] = _Entry(1000, {}, _null(
        {"kind": "var", "matrix": ((0.4, -0.2), (-0.2, 0.4))}))
    # the unshifted 0.3^{|i-j|} matrix has unit diagonal, hence spectral
    # radius > 1 (explosive); one extra power keeps the same decay profile
    cat["N7"] = _Entry(1000, {}, _null(
        {"kind": "var", "matrix": _kms(0.3, 5, power_shift=1)}))

    # mean changes, q = 3
    mean_prm = {"n0": 1000, "theta": (250, 500, 750), "mu": (0.0, 1.0, 0.0, 1.0)}
    cat["A1"] = _Entry(1000, mean_prm, _mean_family({"kind": "iid"}))
    cat["A2"] = _Entry(1000, mean_prm, _mean_family({"kind": "iid", "law": _T5_STD}))
    cat["A3"] = _Entry(1000, mean_prm, _mean_family(
        {"kind": "ar", "coeffs": (0.7,), "scale": math.sqrt(0.51)}))
    cat["A4"] = _Entry(1000, mean_prm, _mean_family(
        {"kind": "ma", "coeffs": (0.9, 0.8, 0.7, 0.6), "scale": math.sqrt(1.0 / 3.30)}))
    delta10 = (0.5,) * 5 + (0.0,) * 5
    zero10 = (0.0,) * 10
    cat["A5"] = _Entry(
        1000,
        {"n0": 1000, "theta": (250, 500, 750), "mu": (zero10, delta10, zero10, delta10)},
        _mean_family({"kind": "iid"}),
    )

    # scale / covariance changes, q = 3
    def scale_family(noise):
        def build(n, prm):
            ends = _scale_points(prm["theta"], n, prm["n0"])
            return _segmented(noise, n, ends, scale=list(prm["sigma"])), None, None
        return build

    bscale = {"n0": 1000, "theta": (250, 500, 750), "sigma": (0.5, 1.0, 0.5, 1.0)}
    cat["B1"] = _Entry(1000, bscale, scale_family({"kind": "iid"}))
    cat["B2"] = _Entry(1000, bscale, scale_family({"kind": "iid", "law": _T5_STD}))
    cat["B3"] = _Entry(
        1000,
        {"n0": 1000, "theta": (250, 500, 750), "sigma": (1.0, 2.0, 1.0, 2.0)},
        scale_family({"kind": "ar", "coeffs": (0.4,)}),
    )

    def cov_family(law, sigmas_key="sigmas"):
        def build(n, prm):
            ends = _scale_points(prm["theta"], n, prm["n0"])
            base = {"kind": "cov"}
            if law is not None:
                base["law"] = law
            return _segmented(base, n, ends, sigma=list(prm[sigmas_key])), None, None
        return build

    bcov = {
        "n0": 1000,
        "theta": (250, 500, 750),
        "sigmas": (_EYE2, _COR2_9, _EYE2, _COR2_9),
    }
    cat["B4"] = _Entry(1000, bcov, cov_family(None))
    cat["B5"] = _Entry(1000, bcov, cov_family(_T5_RAW))
    cat["B6"] = _Entry(
        1000,
        {
            "n0": 1000,
            "theta": (250, 500, 750),
            # stated for a 5-variate series; innovations are N_5(0, I)
            "sigmas": (_kms(0.0, 5), _kms(0.7, 5), _kms(0.0, 5), _kms(0.7, 5)),
        },
        cov_family(None),
    )

    # changes in the serial dependence only, q = 2 (C3: q = 1)
    def ar_family(key="coeffs"):
        def build(n, prm):
            ends = _scale_points(prm["theta"], n, prm["n0"])
            pieces = _segmented(
                {"kind": "ar"}, n, ends, coeffs=[(a,) for a in prm[key]]
            )
            return pieces, None, prm.get("detectable")
        return build

    cat["C1"] = _Entry(
        1000,
        {
            "n0": 1000,
            "theta": (333, 667),
            "coeffs": (-0.8, 0.8, -0.8),
            "detectable": {0: (), 1: (1, 2), 2: ()},
        },
        ar_family(),
    )

    def c2_build(n, prm):
        ends = _scale_points(prm["theta"], n, prm["n0"])
        pieces = _segmented(
            {"kind": "ma"}, n, ends, coeffs=[(0.0, b) for b in prm["b"]]
        )
        return pieces, None, prm.get("detectable")

    cat["C2"] = _Entry(
        1000,
        {
            "n0": 1000,
            "theta": (333, 667),
            "b": (-0.7, 0.7, -0.7),
            "detectable": {0: (), 1: (), 2: (1, 2)},
        },
        c2_build,
    )

    def c3_build(n, prm):
        ends = _scale_points(prm["theta"], n, prm["n0"])
        pieces = _segmented(
            {"kind": "garch", "omega": 0.01},
            n,
            ends,
            alpha=list(prm["alpha"]),
            beta=list(prm["beta"]),
        )
        return pieces, None, None

    cat["C3"] = _Entry(
        1000,
        {"n0": 1000, "theta": (500,), "alpha": (0.7, 0.2), "beta": (0.2, 0.7)},
        c3_build,
    )

    def mat_family(kind):
        def build(n, prm):
            ends = _scale_points(prm["theta"], n, prm["n0"])
            pieces = _segmented(
                {"kind": kind}, n, ends, matrix=list(prm["matrices"])
            )
            return pieces, None, prm.get("detectable")
        return build

    lag1_only = {0: (), 1: (1, 2), 2: ()}
    var_pos = ((0.5, 0.1), (0.1, 0.5))
    var_neg = ((-0.5, 0.1), (0.1, -0.5))
    cat["C4"] = _Entry(
        1000,
        {
            "n0": 1000,
            "theta": (333, 667),
            "matrices": (var_pos, var_neg, var_pos),
            "detectable": dict(lag1_only),
        },
        mat_family("var"),
    )
    vma_pos = ((1.0, 0.1), (0.1, 1.0))
    vma_neg = ((-1.0, 0.1), (0.1, -1.0))
    cat["C5"] = _Entry(
        1000,
        {
            "n0": 1000,
            "theta": (333, 667),
            "matrices": (vma_pos, vma_neg, vma_pos),
            "detectable": dict(lag1_only),
        },
        mat_family("vma"),
    )
    cat["C6"] = _Entry(
        1000,
        {
            "n0": 1000,
            "theta": (333, 667),
            "matrices": (
                _offdiag(1.0, 0.1, 5),
                _offdiag(-1.0, 0.1, 5),
                _offdiag(1.0, 0.1, 5),
            ),
            "detectable": dict(lag1_only),
        },
        mat_family("vma"),
    )

    # distribution changes at fixed first and second moments, q = 2
    def law_family(laws_builder):
        def build(n, prm):
            ends = _scale_points(prm["theta"], n, prm["n0"])
            return laws_builder(n, ends), None, None
        return build

    cat["D1"] = _Entry(
        1000,
        {"n0": 1000, "theta": (333, 667)},
        law_family(lambda n, ends: _segmented(
            {"kind": "iid"}, n, ends, law=[_GAUSS, _T25_STD, _GAUSS])),
    )
    chi2s = {"kind": "chi2_shifted"}
    cat["D2"] = _Entry(
        1000,
        {"n0": 1000, "theta": (333, 667)},
        law_family(lambda n, ends: _segmented(
            {"kind": "iid"}, n, ends,
            law=[chi2s, _GAUSS, chi2s],
            mean=[0.0, 0.5, 0.0],
            scale=[1.0, 0.5, 1.0])),
    )
    expc = {"kind": "exp_centered", "mean": 0.5}
    cat["D3"] = _Entry(
        1000,
        {"n0": 1000, "theta": (333, 667)},
        law_family(lambda n, ends: _segmented(
            {"kind": "ar", "coeffs": (0.4,)}, n, ends,
            law=[_GAUSS, expc, _GAUSS],
            scale=[0.5, 1.0, 0.5])),
    )
    mixed10 = {"kind": "mixed", "laws": [_GAUSS] * 3 + [_T25_STD] * 7}
    gauss10 = {"kind": "mixed", "laws": [_GAUSS] * 10}
    cat["D4"] = _Entry(
        1000,
        {"n0": 1000, "theta": (333, 667)},
        law_family(lambda n, ends: _segmented(
            {"kind": "iid"}, n, ends, law=[gauss10, mixed10, gauss10])),
    )

    # multiscale designs: short and long spacings mixed
    ar03 = {"kind": "ar", "coeffs": (0.3,), "scale": math.sqrt(1.0 - 0.09)}
    cat["M1"] = _Entry(
        1000,
        {"n0": 1000, "theta": (80, 250, 600), "mu": (0.0, 1.6, 0.6, 1.2)},
        _mean_family(ar03),
    )
    cat["M2"] = _Entry(
        1000,
        {"n0": 1000, "theta": (500, 900), "coeffs": (0.3, 0.8, -0.8)},
        ar_family(),
    )

    def m3_build(n, prm):
        ends = _scale_points(prm["theta"], n, prm["n0"])
        pieces = _segmented(
            {"kind": "vma"}, n, ends,
            matrix=(vma_pos, vma_pos, vma_neg),
            mean=((0.0, 0.0), (0.7, 0.7), (0.7, 0.7)),
        )
        return pieces, None, None

    cat["M3"] = _Entry(1000, {"n0": 1000, "theta": (150, 500)}, m3_build)
    cat["M4"] = _Entry(
        2000,
        {
            "n0": 2000,
            "theta": (500, 1000, 1150, 1550, 1900),
            "mu": (0.0, 0.9, 2.2, 1.1, 0.0, 1.5),
        },
        _mean_family(ar03),
    )

    def m5_build(n, prm):
        # mean changes and AR coefficient changes interleave; the pieces
        # split at the union of both boundary sets
        ends = _scale_points(prm["theta"], n, prm["n0"])
        coeffs = [(a,) for a in prm["coeff_per_piece"]]
        scales = [math.sqrt(1.0 - a * a) for a in prm["coeff_per_piece"]]
        pieces = _segmented(
            {"kind": "ar"}, n, ends,
            mean=list(prm["mu_per_piece"]),
            coeffs=coeffs,
            scale=scales,
        )
        return pieces, None, None

    cat["M5"] = _Entry(
        2000,
        {
            "n0": 2000,
            "theta": (100, 200, 600, 1000, 1400, 1800),
            "mu_per_piece": (0.0, 1.5, 0.0, 0.9, 0.9, -0.3, -0.3),
            "coeff_per_piece": (-0.7, -0.7, -0.7, -0.7, 0.7, 0.7, -0.8),
        },
        m5_build,
    )

    def m6_build(n, prm):
        ends = _scale_points(prm["theta"], n, prm["n0"])
        pieces = _segmented(
            {"kind": "cov"}, n, ends,
            sigma=[_cor2(r) for r in prm["rho"]],
        )
        return pieces, None, None

    cat["M6"] = _Entry(
        2000,
        {
            "n0": 2000,
            "theta": (150, 300, 800, 1300, 1600),
            "rho": (0.6, -0.6, 0.6, -0.2, 0.6, -0.2),
        },
        m6_build,
    )
    cat["M7"] = _Entry(
        10000,
        {
            "n0": 10000,
            "theta": (1000, 2000, 2150, 2800, 3650, 4650, 5150, 5550),
            "mu": (0.0, 1.0, 2.6, 1.1, 0.0, 1.0, -0.2, 1.0, 0.0),
        },
        _mean_family({"kind": "iid"}),
    )

    def m8_build(n, prm):
        ends = _scale_points(prm["theta"], n, prm["n0"])
        pieces = _segmented(
            {"kind": "ar"}, n, ends,
            coeffs=[tuple(c) for c in prm["coeffs"]],
        )
        return pieces, None, None

    cat["M8"] = _Entry(
        10000,
        {
            "n0": 10000,
            "theta": (1000, 1400, 5000, 9000, 9400),
            "coeffs": (
                (0.8, -0.2), (-0.8, -0.2), (0.8, -0.2),
                (-0.2, 0.6), (-0.2, -0.6), (-0.2, 0.6),
            ),
        },
        m8_build,
    )
    m9_neg = ((-1.0, 0.4), (0.5, -1.0))
    m9_pos = ((1.0, 0.4), (0.4, 1.0))
    m9_big = ((1.8, 0.1), (0.1, 1.8))
    cat["M9"] = _Entry(
        10000,
        {
            "n0": 10000,
            "theta": (600, 2000, 4000, 5300, 5600, 8000),
            "matrices": (m9_neg, m9_pos, m9_neg, m9_pos, m9_big, m9_pos, m9_neg),
        },
        mat_family("vma"),
    )

    def example1_build(n, prm):
        # mean shift strictly after theta1; the noise regime flips AT
        # theta2, so the recursion boundary sits one step before the label
        t1, t2 = _scale_points(prm["theta"], n, prm["n0"])
        scale = math.sqrt(prm["noise_var"])
        pieces = [
            {"kind": "ar", "coeffs": (0.5,), "scale": scale, "mean": 0.0, "end": t1},
            {"kind": "ar", "coeffs": (0.5,), "scale": scale, "mean": prm["shift"], "end": t2 - 1},
            {"kind": "ar", "coeffs": (-0.5,), "scale": scale, "mean": prm["shift"]},
        ]
        return pieces, (t1, t2), {0: (1,), 1: (1, 2)}

    cat["EXAMPLE1"] = _Entry(
        1000,
        {"n0": 1000, "theta": (300, 650), "shift": 0.7, "noise_var": 0.75},
        example1_build,
    )
    return cat


_CATALOG = _catalog()

SCENARIO_IDS = tuple(sorted(_CATALOG))


def default_length(scenario_id: str) -> int:
    if scenario_id not in _CATALOG:
        raise ValueError(f"unknown scenario {scenario_id!r}")
    return _CATALOG[scenario_id].n0


def generate(spec: ScenarioSpec) -> LabeledSeries:
    """A labeled draw of one catalog scenario."""
    if spec.id not in _CATALOG:
        raise ValueError(f"unknown scenario {spec.id!r}")
    entry = _CATALOG[spec.id]
    n = entry.n0 if spec.n is None else int(spec.n)
    if n < 2:
        raise ValueError("n must be at least 2")
    prm = dict(entry.defaults)
    unknown = set(spec.overrides) - set(prm)
    if unknown:
        raise ValueError(f"unknown overrides for {spec.id}: {sorted(unknown)}")
    prm.update(spec.overrides)
    pieces, truth, detectable = entry.build(n, prm)
    data, ends = _run_pieces(pieces, n, seed=spec.seed)
    changes = tuple(truth) if truth is not None else ends
    return LabeledSeries(
        data=TimeSeries(data),
        truth=Segmentation(n=n, changes=changes),
        detectable_lags=detectable,
    )
