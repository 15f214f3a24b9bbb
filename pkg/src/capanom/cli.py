"""Command-line interface.

Subcommands::

    capanom detect        anomaly detection on a CSV series
    capanom simulate      synthetic benchmark replicates
    capanom bench         runtime scaling measurements
    capanom transit-scan  period scan of a light curve

Results go to ``--output`` (CSV/JSON); every output file is accompanied by
a ``<output>.manifest.json`` sidecar recording the resolved configuration,
an input digest, the tool version, seeds, and the wall-clock duration.
Exit codes: 0 success, 2 input error, 3 numerical/degenerate error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import re
import sys
import time
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from .capa import CapaConfig, detect, detection_to_dict
from .exceptions import (
    DegenerateScaleError,
    DegenerateSegmentError,
    InvalidInputError,
)
from .robust import TypicalParams
from .series import observed, read_value_series
from .simulate import (
    Scenario,
    boundary_distances,
    generate,
    match_events,
    run_method,
    runtime_experiment,
)
from .transit import (
    DEFAULT_BIN_WIDTH,
    DEFAULT_SCAN_GUARD,
    read_light_curve,
    scan_periods,
    write_period_scan,
)

_PENALTY_RE = re.compile(r"^([0-9]*\.?[0-9]+)\s*logn$", re.IGNORECASE)


def parse_penalty(text: str | None, n: int) -> float | None:
    """Parse a penalty flag: either a number or '<mult>logn' (e.g. '4logn')."""
    if text is None:
        return None
    m = _PENALTY_RE.match(text.strip())
    if m:
        return float(m.group(1)) * math.log(n)
    try:
        return float(text)
    except ValueError:
        raise InvalidInputError(f"cannot parse penalty {text!r}") from None


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(output_path, command, config, input_path=None, seeds=None, started=None):
    manifest = {
        "command": command,
        "config": config,
        "input_sha256": _sha256(input_path) if input_path else None,
        "version": __version__,
        "duration_seconds": time.perf_counter() - started if started else None,
        "seeds": seeds,
    }
    with open(f"{output_path}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _capa_config(args, n_obs: int) -> CapaConfig:
    params = None
    if args.mu0 is not None or args.sigma0 is not None:
        if args.mu0 is None or args.sigma0 is None:
            raise InvalidInputError("--mu0 and --sigma0 must be given together")
        params = TypicalParams(args.mu0, args.sigma0)
    return CapaConfig(
        beta=parse_penalty(args.beta, n_obs),
        beta_prime=parse_penalty(args.beta_prime, n_obs),
        gamma=args.gamma,
        min_seg_len=args.min_seg_len,
        max_seg_len=args.max_seg_len,
        pruning=not args.no_pruning,
        known_params=params,
        collective_guard=args.collective_guard,
    )


def _config_dict(config: CapaConfig) -> dict:
    return {
        "beta": config.beta,
        "beta_prime": config.beta_prime,
        "gamma": config.gamma,
        "min_seg_len": config.min_seg_len,
        "max_seg_len": config.max_seg_len,
        "pruning": config.pruning,
        "known_params": None
        if config.known_params is None
        else {"mu0": config.known_params.mu0, "sigma0": config.known_params.sigma0},
        "collective_guard": config.collective_guard,
    }


def _add_capa_flags(sub, with_params: bool = True, guard_default: float = 0.0):
    sub.add_argument("--beta", help="collective-anomaly penalty (number or '<k>logn')")
    sub.add_argument("--beta-prime", help="point-anomaly penalty (number or '<k>logn')")
    sub.add_argument("--gamma", type=float, help="point-anomaly variance floor")
    sub.add_argument("--min-seg-len", type=int, default=10)
    sub.add_argument("--max-seg-len", type=int, default=None)
    sub.add_argument("--no-pruning", action="store_true")
    sub.add_argument("--collective-guard", type=float, default=guard_default,
                     help="variance floor inside the segment cost")
    if with_params:
        sub.add_argument("--mu0", type=float, help="known typical mean")
        sub.add_argument("--sigma0", type=float, help="known typical standard deviation")


def cmd_detect(args) -> int:
    started = time.perf_counter()
    series = read_value_series(args.input)
    vals, _ = observed(series)
    config = _capa_config(args, vals.size)
    det = detect(series, config)
    payload = detection_to_dict(det)

    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
            _write_manifest(args.output, "detect", _config_dict(config), args.input, started=started)
        else:
            sys.stdout.write(text)
    else:
        if not args.output:
            raise InvalidInputError("--format csv requires --output")
        seg_path = f"{args.output}.segments.csv"
        pts_path = f"{args.output}.points.csv"
        seg_fields = ["start", "end", "mean", "variance", "delta_mu", "delta_sigma_sq", "delta", "saving"]
        with open(seg_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=seg_fields)
            writer.writeheader()
            writer.writerows(payload["collective"])
        pt_fields = ["index", "value", "standardized_sq_residual"]
        with open(pts_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=pt_fields)
            writer.writeheader()
            writer.writerows(payload["points"])
        _write_manifest(args.output, "detect", _config_dict(config), args.input, started=started)
    return 0


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    scenario = Scenario(
        n=args.n,
        anomaly_rate=args.rate,
        mean_length=args.mean_length,
        a=args.a,
        b=args.b,
        n_point_anomalies=args.point_anomalies,
        point_anomaly_sd=args.point_sd,
        seed=args.seed,
    )
    rows = []
    pooled: list[float] = []
    totals = {"tp": 0, "fp": 0, "true": 0}
    seeds = []
    for r in range(args.replicates):
        seed = args.seed + r
        seeds.append(seed)
        series, truth = generate(replace(scenario, seed=seed))
        penalty = parse_penalty(args.penalty, len(series)) if args.penalty else None
        result = run_method(series, args.method, penalty, args.min_seg_len)
        report = match_events(result, truth, args.tolerance)
        pooled.extend(boundary_distances(result, truth, args.tolerance))
        totals["tp"] += report.true_positive_count
        totals["fp"] += report.false_positive_count
        totals["true"] += report.true_count
        rows.append(
            [
                r,
                seed,
                report.true_positive_count,
                report.false_positive_count,
                report.true_count,
                "" if report.mean_abs_distance is None else repr(report.mean_abs_distance),
            ]
        )
    summary_mad = "" if not pooled else repr(float(np.mean(pooled)))
    rows.append(["summary", "", totals["tp"], totals["fp"], totals["true"], summary_mad])

    out = args.output
    header = ["replicate", "seed", "true_positives", "false_positives", "true_count", "mean_abs_distance"]
    if out:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        _write_manifest(
            out,
            "simulate",
            {**asdict(scenario), "method": args.method, "replicates": args.replicates,
             "tolerance": args.tolerance, "min_seg_len": args.min_seg_len,
             "penalty": args.penalty},
            seeds=seeds,
            started=started,
        )
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
    return 0


def cmd_bench(args) -> int:
    started = time.perf_counter()
    sizes = [int(s) for s in args.sizes.split(",") if s]
    results = runtime_experiment(
        sizes, stationary=args.stationary, repeats=args.repeats, seed=args.seed
    )
    rows = [[n, repr(seconds)] for n, seconds in results]
    if args.output:
        with open(args.output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "seconds"])
            writer.writerows(rows)
        _write_manifest(
            args.output,
            "bench",
            {"sizes": sizes, "stationary": args.stationary, "repeats": args.repeats},
            seeds=[args.seed],
            started=started,
        )
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["n", "seconds"])
        writer.writerows(rows)
    return 0


def _absolute_penalty(text: str | None, name: str) -> float | None:
    if text is None:
        return None
    if _PENALTY_RE.match(text.strip()):
        raise InvalidInputError(
            f"--{name}: the scan resolves default penalties per binned period; "
            "pass an absolute number to override"
        )
    return parse_penalty(text, 2)


def cmd_transit_scan(args) -> int:
    started = time.perf_counter()
    curve = read_light_curve(args.input)
    config = CapaConfig(
        beta=_absolute_penalty(args.beta, "beta"),
        beta_prime=_absolute_penalty(args.beta_prime, "beta-prime"),
        gamma=args.gamma,
        min_seg_len=args.min_seg_len,
        max_seg_len=args.max_seg_len,
        pruning=not args.no_pruning,
        collective_guard=args.collective_guard,
    )
    scan = scan_periods(
        curve,
        (args.period_start, args.period_end, args.period_step),
        bin_width=args.bin_width,
        config=config,
        workers=args.workers,
    )
    if args.output:
        write_period_scan(scan, args.output)
        _write_manifest(
            args.output,
            "transit-scan",
            {
                "period_start": args.period_start,
                "period_end": args.period_end,
                "period_step": args.period_step,
                "bin_width": args.bin_width,
                "workers": args.workers,
                **_config_dict(config),
            },
            args.input,
            started=started,
        )
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["period", "max_delta_mu", "error"])
        for r in scan.records:
            value = "" if math.isnan(r.max_delta_mu) else repr(r.max_delta_mu)
            writer.writerow([repr(r.period), value, r.error or ""])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capanom", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="detect anomalies in a CSV series")
    p_detect.add_argument("input", help="CSV with one (value) or two (time,value) columns")
    _add_capa_flags(p_detect)
    p_detect.add_argument("--format", choices=["json", "csv"], default="json")
    p_detect.add_argument("--output", help="output path (default: JSON to stdout)")
    p_detect.set_defaults(func=cmd_detect)

    p_sim = sub.add_parser("simulate", help="run benchmark replicates")
    p_sim.add_argument("--n", type=int, default=5000)
    p_sim.add_argument("--rate", type=float, default=5e-4)
    p_sim.add_argument("--mean-length", type=float, default=30.0)
    p_sim.add_argument("--a", type=float, default=0.0, help="mean-change scale")
    p_sim.add_argument("--b", type=float, default=0.0, help="variance-change scale")
    p_sim.add_argument("--point-anomalies", type=int, default=0)
    p_sim.add_argument("--point-sd", type=float, default=10.0)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--replicates", type=int, default=1)
    p_sim.add_argument("--method", choices=["capa", "pelt"], default="capa")
    p_sim.add_argument("--min-seg-len", type=int, default=10)
    p_sim.add_argument("--tolerance", type=int, default=20)
    p_sim.add_argument("--penalty", help="detector penalty (number or '<k>logn'); default 4logn")
    p_sim.add_argument("--output")
    p_sim.set_defaults(func=cmd_simulate)

    p_bench = sub.add_parser("bench", help="time the detector across sizes")
    p_bench.add_argument("--sizes", default="10000,50000", help="comma-separated sizes")
    p_bench.add_argument("--stationary", action="store_true")
    p_bench.add_argument("--repeats", type=int, default=1)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--output")
    p_bench.set_defaults(func=cmd_bench)

    p_scan = sub.add_parser("transit-scan", help="period scan of a light curve")
    p_scan.add_argument("input", help="CSV light curve (time_days, flux)")
    p_scan.add_argument("--period-start", type=float, required=True)
    p_scan.add_argument("--period-end", type=float, required=True)
    p_scan.add_argument("--period-step", type=float, default=0.01)
    p_scan.add_argument("--bin-width", type=float, default=DEFAULT_BIN_WIDTH)
    p_scan.add_argument(
        "--workers",
        type=int,
        default=int(os.environ.get("CAPANOM_WORKERS", "1")),
        help="parallel workers (default from CAPANOM_WORKERS)",
    )
    _add_capa_flags(p_scan, with_params=False, guard_default=DEFAULT_SCAN_GUARD)
    p_scan.add_argument("--output")
    p_scan.set_defaults(func=cmd_transit_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidInputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateScaleError, DegenerateSegmentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
