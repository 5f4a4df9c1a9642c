"""Command line interface.

Subcommands:

    detect    scan a CSV for change points, JSON report to stdout or --out
    simulate  draw a catalog scenario to CSV plus a truth JSON sidecar
    evaluate  score an estimate against a truth file (or two directories)
    bench     measure kernel-evaluation counts against the n*G budget

Exit codes: 0 success, 2 unreadable or non-finite input, 3 invalid
configuration, 4 degenerate kernel scale (constant data at some lag).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, default_block_scale
from .detector import TimeSeries, detector_profile, make_lagged
from .kernels import DegenerateScale, KernelSpec, eval_count, reset_eval_count
from .metrics import EvalReport, aggregate, evaluate
from .segment import (
    MergeParams,
    Segmentation,
    bandwidth_ladder,
    default_bandwidth,
    run_adaptive,
    run_multi_lag,
    run_multiscale,
)
from .simulate import SCENARIO_IDS, ScenarioSpec, generate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_SCALE = 4

_KERNEL_CODES = {
    "h1": "gauss",
    "h2": "quadexp",
    "h3": "energy",
    "gauss": "gauss",
    "quadexp": "quadexp",
    "energy": "energy",
    "auto": "quadexp",
}


class InputError(Exception):
    pass


class ConfigError(Exception):
    pass


def _read_csv(path: str, header: bool, impute: str) -> TimeSeries:
    try:
        arr = np.genfromtxt(path, delimiter=",", skip_header=1 if header else 0)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"cannot parse {path}: {exc}") from exc
    if arr.size == 0:
        raise InputError(f"{path} holds no data rows")
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr[:, None]
    if impute == "locf":
        arr = _impute_locf(arr, path)
    if not np.isfinite(arr).all():
        raise InputError(
            f"{path} contains missing or non-finite values (use --impute locf)"
        )
    return TimeSeries(arr)


def _impute_locf(arr: np.ndarray, path: str) -> np.ndarray:
    arr = arr.copy()
    for j in range(arr.shape[1]):
        col = arr[:, j]
        ok = np.isfinite(col)
        if not ok.any():
            raise InputError(f"{path}: column {j} has no finite values to impute from")
        idx = np.where(ok, np.arange(col.size), 0)
        np.maximum.accumulate(idx, out=idx)
        col[:] = col[idx]
        first = np.flatnonzero(ok)[0]
        col[:first] = col[first]
    return arr


def _parse_lags(text: str) -> list[int]:
    try:
        lags = sorted({int(part) for part in text.split(",") if part.strip() != ""})
    except ValueError as exc:
        raise ConfigError(f"bad --lags value {text!r}") from exc
    if not lags or any(l < 0 for l in lags):
        raise ConfigError("--lags needs a comma list of non-negative integers")
    return lags


def _parse_bandwidths(text: str, n: int, multiscale: bool):
    if text == "auto":
        return bandwidth_ladder(n) if multiscale else default_bandwidth(n)
    try:
        values = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --bandwidth value {text!r}") from exc
    if not values or any(v < 2 for v in values):
        raise ConfigError("--bandwidth needs positive integers (or 'auto')")
    if multiscale:
        return sorted(set(values))
    if len(values) != 1:
        raise ConfigError("a single --bandwidth is required without --multiscale")
    return values[0]


def _json_dump(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _lag_entry(res, bandwidth: int | None = None) -> dict:
    entry: dict = {"lag": res.lag}
    if bandwidth is not None:
        entry["bandwidth"] = bandwidth
    entry["scale"] = res.kernel.scale
    entry["threshold"] = res.threshold
    entry["changes"] = [
        {"location": e.location, "stat": e.stat, "score": e.score}
        for e in res.estimates
    ]
    return entry


def _merged_entry(e, with_bandwidth: bool) -> dict:
    entry = {"location": e.location, "lag": e.lag, "stat": e.stat, "score": e.score}
    if with_bandwidth:
        entry["bandwidth"] = e.bandwidth
    return entry


def _dump_profiles(path: str, results: list[tuple[int, list]]) -> None:
    lines = ["bandwidth,lag,position,value"]
    for G, lag_results in results:
        for res in lag_results:
            positions = res.profile.positions
            for pos, val in zip(positions, res.profile.values):
                lines.append(f"{G},{res.lag},{pos},{float(val)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_detect(args) -> int:
    ts = _read_csv(args.input, args.header, args.impute)
    n = ts.n
    lags = _parse_lags(args.lags)
    if args.multiscale and args.adaptive:
        raise ConfigError("--multiscale and --adaptive are mutually exclusive")
    bandwidth = _parse_bandwidths(args.bandwidth, n, args.multiscale)

    family = _KERNEL_CODES[args.kernel]
    if args.scale is not None:
        if args.scale <= 0:
            raise ConfigError("--scale must be positive")
        kernel: KernelSpec | str = KernelSpec(family, args.scale)
    else:
        kernel = family

    if not (0.0 < args.alpha < 1.0):
        raise ConfigError("--alpha must lie in (0, 1)")
    if args.reps < 1:
        raise ConfigError("--reps must be positive")
    bn = args.bn if args.bn is not None else default_block_scale(n)
    if bn <= 0:
        raise ConfigError("--bn must be positive")
    if args.threads < 1:
        raise ConfigError("--threads must be positive")
    config = BootstrapConfig(
        reps=args.reps,
        alpha=args.alpha,
        b_n=bn,
        master_seed=args.seed,
        threads=args.threads,
    )
    params = MergeParams(eta=args.eta, c=args.merge_c, big_c=args.ms_C)

    if args.multiscale:
        mode = "multiscale"
        per_bw, merged = run_multiscale(ts, lags, bandwidth, kernel, config, params)
        lag_entries = [
            _lag_entry(res, bandwidth=G) for G, results in per_bw for res in results
        ]
        profile_groups = per_bw
    elif args.adaptive:
        mode = "adaptive"
        results, merged, used = run_adaptive(
            ts, lags, bandwidth, kernel, config, params
        )
        lag_entries = [_lag_entry(res) for res in results]
        profile_groups = [(bandwidth, results)]
    else:
        mode = "single" if len(lags) == 1 else "multi"
        results, merged = run_multi_lag(ts, lags, bandwidth, kernel, config, params)
        lag_entries = [_lag_entry(res) for res in results]
        profile_groups = [(bandwidth, results)]

    report = {
        "config": {
            "mode": mode,
            "input": args.input,
            "n": n,
            "p": ts.p,
            "lags": lags if mode != "adaptive" else used,
            "bandwidth": bandwidth,
            "kernel": family,
            "scale": args.scale if args.scale is not None else "auto",
            "alpha": args.alpha,
            "reps": args.reps,
            "bn": bn,
            "eta": args.eta,
            "merge_c": args.merge_c,
            "ms_C": args.ms_C,
            # thread count is execution plumbing, not part of the result:
            # reports must not depend on how the work was parallelized
            "seed": args.seed,
        },
        "lags": lag_entries,
        "merged": [_merged_entry(e, args.multiscale) for e in merged],
    }
    if args.dump_profile:
        _dump_profiles(args.dump_profile, profile_groups)
    _json_dump(report, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.scenario not in SCENARIO_IDS:
        raise ConfigError(
            f"unknown scenario {args.scenario!r}; known: {', '.join(SCENARIO_IDS)}"
        )
    try:
        labeled = generate(
            ScenarioSpec(id=args.scenario, n=args.n, seed=args.seed)
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = Path(args.out)
    data = labeled.data.values
    lines = [",".join(repr(float(v)) for v in row) for row in data]
    out.write_text("\n".join(lines) + "\n")
    truth_path = out.with_suffix(".truth.json") if out.suffix else Path(str(out) + ".truth.json")
    truth = {
        "scenario": args.scenario,
        "seed": args.seed,
        "n": labeled.truth.n,
        "changes": list(labeled.truth.changes),
    }
    truth_path.write_text(json.dumps(truth, indent=2) + "\n")
    return EXIT_OK


def _load_segmentation(path: Path) -> Segmentation:
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if "merged" in payload:  # a detect report
        n = payload.get("config", {}).get("n")
        changes = [entry["location"] for entry in payload["merged"]]
    else:
        n = payload.get("n")
        changes = payload.get("changes")
    if n is None or changes is None:
        raise InputError(f"{path} lacks the n/changes fields")
    try:
        return Segmentation(n=int(n), changes=tuple(sorted(int(c) for c in changes)))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _eval_pair(est_path: Path, truth_path: Path) -> dict:
    est = _load_segmentation(est_path)
    truth = _load_segmentation(truth_path)
    try:
        rep = evaluate(est, truth)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return {
        "cm": rep.cm,
        "vm": rep.vm,
        "q_hat": rep.q_hat,
        "q_true": rep.q_true,
    }


def cmd_evaluate(args) -> int:
    est_path = Path(args.estimate)
    truth_path = Path(args.truth)
    if est_path.is_dir() != truth_path.is_dir():
        raise InputError("estimate and truth must both be files or both directories")
    if not est_path.is_dir():
        _json_dump(_eval_pair(est_path, truth_path), args.out)
        return EXIT_OK

    est_files = sorted(p for p in est_path.iterdir() if p.suffix == ".json")
    if not est_files:
        raise InputError(f"no .json files under {est_path}")
    rows = []
    reports = []
    for est_file in est_files:
        candidates = [
            truth_path / est_file.name,
            truth_path / (est_file.name.removesuffix(".json") + ".truth.json"),
        ]
        truth_file = next((c for c in candidates if c.exists()), None)
        if truth_file is None:
            raise InputError(f"no truth file for {est_file.name} under {truth_path}")
        row = _eval_pair(est_file, truth_file)
        rows.append({"name": est_file.name, **row})
        reports.append(row)
    agg = aggregate([EvalReport(**r) for r in reports])
    _json_dump(
        {
            "runs": rows,
            "summary": {
                "count": agg.count,
                "q_diff_hist": {
                    "le_-2": agg.bins[0],
                    "-1": agg.bins[1],
                    "0": agg.bins[2],
                    "+1": agg.bins[3],
                    "ge_+2": agg.bins[4],
                },
                "mean_cm": agg.mean_cm,
                "mean_vm": agg.mean_vm,
            },
        },
        args.out,
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be positive for bench")
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    if not sizes:
        raise ConfigError("--sizes needs at least one length")
    kernel = KernelSpec("quadexp", 1.0)
    rng = np.random.default_rng(args.seed)
    rows = []
    for n in sizes:
        G = default_bandwidth(n)
        data = TimeSeries(rng.standard_normal(n))
        ls = make_lagged(data, 0)
        reset_eval_count()
        t0 = time.perf_counter()
        for _ in range(args.reps):
            detector_profile(ls, G, kernel)
        dt = (time.perf_counter() - t0) / args.reps
        count = eval_count() // args.reps
        rows.append((n, G, count, dt))
        print(f"n={n:>7d}  G={G:>6d}  kernel_evals={count:>12d}  "
              f"evals/(nG)={count / (n * G):.3f}  sec={dt:.3f}")

    by_n = {n: c for n, _, c, _ in rows}
    if 1000 in by_n and 4000 in by_n:
        ratio = by_n[4000] / by_n[1000]
        print(f"eval ratio n=4000 / n=1000: {ratio:.2f}")
        if not (14.0 <= ratio <= 18.0):
            print("FAIL: ratio outside [14, 18]", file=sys.stderr)
            return 1
    if len(rows) >= 2:
        slope = np.polyfit(
            [math.log(n * G) for n, G, _, _ in rows],
            [math.log(c) for _, _, c, _ in rows],
            1,
        )[0]
        print(f"log-log slope of evals vs n*G: {slope:.4f}")
        if not (0.9 <= slope <= 1.15):
            print("FAIL: slope outside [0.9, 1.15]", file=sys.stderr)
            return 1
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lagchange",
        description="Nonparametric change point detection for multivariate "
        "time series via lagged kernel discrepancy scans.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect change points in a CSV series")
    d.add_argument("input", help="CSV file, one row per time point")
    d.add_argument("--lags", default="0,1,2", help="comma list of lags (default 0,1,2)")
    d.add_argument("--bandwidth", default="auto",
                   help="window size G, or 'auto' (= n//6; a ladder under --multiscale)")
    d.add_argument("--multiscale", action="store_true",
                   help="scan a bandwidth ladder and merge fine-to-coarse")
    d.add_argument("--adaptive", action="store_true",
                   help="extend the lag set automatically while new lags add changes")
    d.add_argument("--kernel", default="h2", choices=sorted(_KERNEL_CODES),
                   help="kernel family (default h2 = quadexp)")
    d.add_argument("--scale", type=float, default=None,
                   help="fixed kernel scale (default: data-driven median heuristic)")
    d.add_argument("--alpha", type=float, default=0.1, help="bootstrap level (default 0.1)")
    d.add_argument("--reps", type=int, default=499, help="bootstrap replicates (default 499)")
    d.add_argument("--bn", type=float, default=None,
                   help="multiplier dependence scale (default 1.5 n^(1/3))")
    d.add_argument("--eta", type=float, default=0.4, help="local-max window fraction")
    d.add_argument("--merge-c", dest="merge_c", type=float, default=1.0,
                   help="cross-lag cluster width as a fraction of G")
    d.add_argument("--ms-C", dest="ms_C", type=float, default=0.8,
                   help="multiscale acceptance distance as a fraction of G")
    d.add_argument("--seed", type=int, default=0, help="master seed")
    d.add_argument("--threads", type=int, default=1, help="worker threads")
    d.add_argument("--header", action="store_true", help="skip the first CSV line")
    d.add_argument("--impute", choices=("none", "locf"), default="none",
                   help="replace missing values by the last finite one per column")
    d.add_argument("--dump-profile", default=None,
                   help="also write every scan profile to this CSV path")
    d.add_argument("--out", default=None, help="write the JSON report here")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("simulate", help="draw a catalog scenario")
    s.add_argument("--scenario", required=True, help="catalog id, e.g. A1")
    s.add_argument("--n", type=int, default=None, help="series length (default: catalog)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="CSV output path (truth goes beside it)")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("evaluate", help="score estimates against the truth")
    e.add_argument("estimate", help="detect report JSON (or a directory of them)")
    e.add_argument("truth", help="truth JSON (or a directory of them)")
    e.add_argument("--out", default=None, help="write the JSON report here")
    e.set_defaults(func=cmd_evaluate)

    b = sub.add_parser("bench", help="verify the kernel-evaluation budget")
    b.add_argument("--sizes", default="1000,2000,4000,8000",
                   help="comma list of series lengths")
    b.add_argument("--reps", type=int, default=1, help="timing repetitions per size")
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateScale as exc:
        lag = f" (lag {exc.lag})" if exc.lag is not None else ""
        print(f"degenerate scale{lag}: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
