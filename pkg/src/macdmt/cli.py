"""Command-line front end.

Subcommands: dmt, regions, rate-region, outage-sim, error-sim, code-check,
golden-omega.  Tables go to --out (default stdout) as CSV or JSON with a
configuration echo; --plot additionally renders a matplotlib figure next to
the delimited output.  Exit codes: 0 success, 2 usage/domain error,
3 infeasible or cap exceeded, 4 numerical contract violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import dmt as dmt_mod
from . import golden
from .criteria import (
    CodebookSet,
    criterion_check,
    lambda_min,
    load_codebooks,
    make_codebook_set,
    ml_error_event_sim,
    relaxed_target_bound,
    save_codebooks,
)
from .dmt import ChannelSpec
from .errors import (
    CapExceededError,
    ContractViolationError,
    DomainError,
    InfeasibleRateError,
    InsufficientTrialsError,
    MacDmtError,
)
from .numerics import RngStream
from .simulate import (
    correlation_preset,
    db_to_linear,
    estimate_jensen_outage,
    estimate_outage,
    estimate_total_outage,
    fit_snr_exponent,
    load_covariance,
    parse_snr_grid,
)


def _add_global_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base RNG seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=str, default=None, help="output path (default stdout)")
    p.add_argument("--plot", type=str, nargs="?", const="AUTO", default=None,
                   help="also render a figure (optional path)")


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", type=str, default=None,
                   help='channel spec JSON {"users":..,"mt":..,"mr":..,"N":..,"cov":..}')
    p.add_argument("--users", type=int, default=None)
    p.add_argument("--mt", type=int, default=None)
    p.add_argument("--mr", type=int, default=None)
    p.add_argument("--slots", type=int, default=None, help="block length N")
    p.add_argument("--cov", type=str, default=None,
                   help="iid | flat | exponential:A | file:PATH (default iid)")
    p.add_argument("--rho", type=int, default=None,
                   help="shortcut for a rank-rho covariance: rho independent slots")


def _cov_from_text(text: str, block_len: int) -> np.ndarray:
    if text.startswith("file:"):
        return load_covariance(text[5:])
    if ":" in text:
        name, _, param = text.partition(":")
        if name in ("exp", "exponential"):
            return correlation_preset("exponential", block_len, float(param))
        raise DomainError(f"unknown covariance preset {text!r}")
    if text in ("iid", "flat"):
        return correlation_preset(text, block_len)
    raise DomainError(f"unknown covariance preset {text!r}")


def build_spec(args) -> ChannelSpec:
    """Resolve a ChannelSpec from --spec JSON or inline flags."""
    if args.spec:
        with open(args.spec) as fh:
            data = json.load(fh)
        try:
            users, mt, mr, n = (int(data[k]) for k in ("users", "mt", "mr", "N"))
            cov_entry = data["cov"]
        except KeyError as exc:
            raise DomainError(f"spec file missing key {exc}") from exc
        if "file" in cov_entry:
            cov = load_covariance(cov_entry["file"])
        else:
            cov = _cov_from_text(
                cov_entry["preset"] + (f":{cov_entry['a']}" if "a" in cov_entry else ""),
                n,
            )
        return ChannelSpec(users, mt, mr, n, cov)

    users = args.users if args.users is not None else 2
    mt = args.mt if args.mt is not None else 1
    mr = args.mr if args.mr is not None else 1
    if args.rho is not None:
        if args.cov is not None or args.slots is not None:
            raise DomainError("--rho is a shortcut; do not combine it with --cov/--slots")
        n = args.rho
        cov = correlation_preset("iid", n)
    else:
        n = args.slots if args.slots is not None else 1
        cov = _cov_from_text(args.cov or "iid", n)
    return ChannelSpec(users, mt, mr, n, cov)


def _parse_subset(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError as exc:
        raise DomainError(f"cannot parse subset {text!r}") from exc


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x)
    except ValueError as exc:
        raise DomainError(f"cannot parse number list {text!r}") from exc


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError as exc:
        raise DomainError(f"cannot parse integer list {text!r}") from exc


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(args, command: str, config: dict, columns: list[str], rows: list[tuple],
         extra: dict | None = None) -> None:
    """Write one self-describing table as CSV or JSON."""
    config = {"command": command, "version": __version__, **config}
    if args.format == "json":
        payload = {"config": config, "columns": columns,
                   "rows": [list(r) for r in rows]}
        if extra:
            payload["extra"] = extra
        text = json.dumps(payload, indent=2, default=_fmt) + "\n"
    else:
        buf = io.StringIO()
        for k, v in config.items():
            buf.write(f"# {k}={_fmt(v)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        if extra:
            for k, v in extra.items():
                buf.write(f"# {k}={_fmt(v)}\n")
        text = buf.getvalue()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _plot_path(args, command: str) -> str | None:
    if args.plot is None:
        return None
    if args.plot != "AUTO":
        return args.plot
    if args.out:
        return str(Path(args.out).with_suffix(".png"))
    return f"macdmt-{command}.png"


def _spec_config(spec: ChannelSpec) -> dict:
    return {
        "users": spec.users,
        "mt": spec.mt,
        "mr": spec.mr,
        "N": spec.block_len,
        "rho": spec.cov_rank,
    }


# ---------------------------------------------------------------- subcommands


def cmd_dmt(args) -> int:
    spec = build_spec(args)
    subset = _parse_subset(args.subset)
    curve = dmt_mod.dmt_curve(spec, subset)
    r_max = args.r_max if args.r_max is not None else float(curve.max_rate)
    if r_max > curve.max_rate:
        raise DomainError(
            f"r-max {r_max} beyond the subset limit m(S)={curve.max_rate}"
        )
    values = {float(r) for r, _ in curve.anchors if r <= r_max}
    k = 0
    while True:
        r = k * args.step
        if r > r_max + 1e-12:
            break
        values.add(min(r, r_max))
        k += 1
    rows = [(r, curve.evaluate(r)) for r in sorted(values)]
    config = {**_spec_config(spec), "subset": ",".join(map(str, subset)),
              "step": args.step, "r_max": r_max}
    emit(args, "dmt", config, ["r", "d"], rows)
    path = _plot_path(args, "dmt")
    if path:
        from .plots import plot_dmt_curve

        plot_dmt_curve(rows, subset, path)
    return 0


def cmd_regions(args) -> int:
    spec = build_spec(args)
    rows = dmt_mod.classify_region_grid(spec, args.step)
    config = {**_spec_config(spec), "step": args.step}
    emit(args, "regions", config, ["r1", "r2", "label"], rows)
    path = _plot_path(args, "regions")
    if path:
        from .plots import plot_region_grid

        plot_region_grid(rows, path)
    return 0


def cmd_rate_region(args) -> int:
    spec = build_spec(args)
    d_list = _parse_floats(args.d)
    if not d_list:
        raise DomainError("at least one diversity order is required")
    rows = []
    regions = []
    for d in d_list:
        for subset, bound in dmt_mod.rate_region_constraints(spec, d):
            rows.append((d, "constraint", ",".join(map(str, subset)), bound, None, None))
        if spec.users == 2:
            vertices = dmt_mod.rate_region_vertices_2user(spec, d)
            regions.append((d, vertices))
            for x, y in vertices:
                rows.append((d, "vertex", None, None, x, y))
    config = {**_spec_config(spec), "d": args.d}
    emit(args, "rate-region", config, ["d", "row", "subset", "bound", "r1", "r2"], rows)
    path = _plot_path(args, "rate-region")
    if path and regions:
        from .plots import plot_rate_regions

        plot_rate_regions(regions, path)
    return 0


def cmd_outage_sim(args) -> int:
    spec = build_spec(args)
    rates = _parse_floats(args.r)
    grid = parse_snr_grid(args.grid)
    rng = RngStream(args.seed)
    subset = _parse_subset(args.subset) if args.subset else tuple(range(1, spec.users + 1))
    estimates = []
    for snr_db in grid:
        snr = db_to_linear(snr_db)
        if args.mode == "total":
            est = estimate_total_outage(spec, rates, snr, args.trials, rng,
                                        args.fixed_rate_nats, threads=args.threads)
        elif args.mode == "jensen":
            est = estimate_jensen_outage(spec, rates, subset, snr, args.trials, rng,
                                         args.fixed_rate_nats, threads=args.threads)
        else:
            est = estimate_outage(spec, rates, subset, snr, args.trials, rng,
                                  args.fixed_rate_nats, threads=args.threads)
        estimates.append((snr_db, est))
    rows = [(db, e.p_hat, e.successes, e.trials, e.ci95) for db, e in estimates]
    fit = None
    extra = {}
    try:
        fit = fit_snr_exponent(estimates)
        extra = {"exponent": fit.exponent, "stderr": fit.stderr}
    except (InsufficientTrialsError, DomainError) as exc:
        print(f"warning: slope omitted: {exc}", file=sys.stderr)
    config = {**_spec_config(spec), "mode": args.mode,
              "subset": ",".join(map(str, subset)), "r": args.r,
              "grid_db": args.grid, "trials": args.trials, "seed": args.seed,
              "fixed_rate_nats": args.fixed_rate_nats}
    emit(args, "outage-sim", config, ["snr_db", "p_hat", "successes", "trials", "ci95"],
         rows, extra)
    path = _plot_path(args, "outage-sim")
    if path:
        from .plots import plot_outage

        plot_outage(rows, fit, path)
    return 0


def _golden_codebooks_at(rate_bits: int, gamma, rates, snr) -> CodebookSet:
    cw1 = golden.golden_user_codewords(rate_bits, 1, gamma)
    cw2 = golden.golden_user_codewords(rate_bits, 2, gamma)
    return make_codebook_set([cw1, cw2], rates, snr)


def cmd_error_sim(args) -> int:
    spec = build_spec(args)
    grid = parse_snr_grid(args.grid)
    rng = RngStream(args.seed)
    gamma = golden.parse_gamma(args.gamma)
    rows = []
    for snr_db in grid:
        snr = db_to_linear(snr_db)
        if args.codebooks:
            cbs = load_codebooks(args.codebooks, _parse_floats(args.rates), snr)
        elif args.generator == "golden":
            cbs = _golden_codebooks_at(args.rprime[0] if args.rprime else 2,
                                       gamma, (0.0,) * spec.users, snr)
        else:
            raise DomainError("either --codebooks or --generator golden is required")
        report = ml_error_event_sim(cbs, spec, snr, args.trials, rng,
                                    cap=args.cap, threads=args.threads)
        for subset, count in report.counts:
            label = "E{" + ",".join(map(str, subset)) + "}"
            rows.append((snr_db, label, count, count / report.trials))
        rows.append((snr_db, "total", sum(c for _, c in report.counts),
                     report.total_error))
    config = {**_spec_config(spec), "grid_db": args.grid, "trials": args.trials,
              "seed": args.seed, "cap": args.cap,
              "codebooks": args.codebooks or f"generator:{args.generator}"}
    emit(args, "error-sim", config, ["snr_db", "event", "count", "frequency"], rows)
    path = _plot_path(args, "error-sim")
    if path:
        from .plots import plot_error_events

        plot_error_events([(r[0], r[1], r[3]) for r in rows if r[1] != "total"], path)
    return 0


def cmd_code_check(args) -> int:
    subset = _parse_subset(args.subset)
    gamma = golden.parse_gamma(args.gamma)
    points = []  # (snr_db, snr, lambda_value, witness_or_none)
    if args.generator == "golden":
        rprimes = args.rprime or (2, 4, 6)
        exponent_map = args.r_mux - args.eps
        if exponent_map <= 0:
            raise DomainError("r-mux must exceed eps to map sizes onto SNR")
        rates = (args.r_mux,) * 2
        for rb in rprimes:
            snr = 2.0 ** (rb / exponent_map)
            snr_db = 10.0 * math.log10(snr)
            if len(subset) == 1:
                lam = float(golden.single_user_min_sq_distance(rb))
            else:
                res = golden.omega(rb, rb, gamma, cap=args.cap)
                lam = golden.lambda22_from_omega(rb, rb, res.value)
            points.append((snr_db, snr, lam, None))
    else:
        if not args.codebook:
            raise DomainError("supply --codebook SNRDB:PATH entries or --generator golden")
        spec = build_spec(args)
        rates = _parse_floats(args.rates)
        for entry in args.codebook:
            db_text, _, path = entry.partition(":")
            snr_db = float(db_text)
            snr = db_to_linear(snr_db)
            cbs = load_codebooks(path, rates, snr)
            res = lambda_min(cbs, subset, spec, cap=args.cap)
            points.append((snr_db, snr, res.value, res.argmin))
    if args.target is not None:
        target = args.target
    elif args.target_mode == "relaxed":
        # upper bound on the relaxed per-subset decay target, from the curves
        target = relaxed_target_bound(build_spec(args), rates, subset)
    else:
        target = sum(rates[u - 1] for u in subset)
    verdict = criterion_check([(snr, lam) for _, snr, lam, _ in points], target,
                              eps_margin=args.eps_margin)
    rows = [
        (snr_db, ",".join(map(str, subset)), lam,
         verdict.delta_hat, target, "PASS" if verdict.passed else "FAIL")
        for snr_db, _, lam, _ in points
    ]
    config = {"subset": args.subset, "gamma": args.gamma, "target": target,
              "eps_margin": args.eps_margin,
              "source": f"generator:{args.generator}" if args.generator else "files"}
    emit(args, "code-check", config,
         ["snr_db", "subset", "lambda", "delta_hat", "target", "verdict"], rows)
    for snr_db, _, lam, witness in points:
        if lam <= 0 and witness is not None:
            dump = (Path(args.out).with_suffix(".witness.json")
                    if args.out else Path("code_check_witness.json"))
            dump.write_text(json.dumps({
                "snr_db": snr_db,
                "diffs": [{"re": w.real.tolist(), "im": w.imag.tolist()}
                          for w in witness],
            }, indent=2))
            print(f"witness written to {dump}", file=sys.stderr)
            break
    path = _plot_path(args, "code-check")
    if path:
        from .plots import plot_lambda_decay

        plot_lambda_decay([(r[0], r[1], r[2]) for r in rows], path)
    return 0


def cmd_golden_omega(args) -> int:
    sizes = args.rprime
    if not sizes:
        raise DomainError("at least one constellation size is required")
    gamma = golden.parse_gamma(args.gamma)
    exponent_map = args.r_mux - args.eps
    if exponent_map <= 0:
        raise DomainError("r-mux must exceed eps to map sizes onto SNR")
    rows = []
    usable = []
    for rb in sizes:
        snr = 2.0 ** (rb / exponent_map)
        snr_db = 10.0 * math.log10(snr)
        try:
            verdict = golden.verify_nonzero_dets(rb, gamma, cap=args.cap)
            res = golden.omega(rb, rb, gamma, cap=args.cap)
        except CapExceededError as exc:
            rows.append((rb, None, None, None, snr_db, f"refused:{exc.required}"))
            continue
        t3 = "PASS" if verdict.passed else f"FAIL:{verdict.counterexample}"
        rows.append((rb, str(res.value.p), str(res.value.q), float(res.value),
                     snr_db, t3))
        usable.append((snr, float(res.value)))
    extra = {"caveat": golden.OPEN_QUESTION_CAVEAT}
    if len(usable) >= 3 and min(v for _, v in usable) > 0:
        cls = golden.classify_decay([s for s, _ in usable], [v for _, v in usable])
        extra.update({"classification": cls.kind, "delta_hat": cls.delta_hat})
    config = {"rprime": ",".join(map(str, sizes)), "gamma": args.gamma,
              "r_mux": args.r_mux, "eps": args.eps}
    emit(args, "golden-omega", config,
         ["rprime", "omega_p", "omega_q", "omega_float", "snr_db", "nonzero_dets"],
         rows, extra)
    if args.export_codebooks:
        for rb in sizes:
            snr = 2.0 ** (rb / exponent_map)
            cbs = _golden_codebooks_at(rb, gamma, (args.r_mux, args.r_mux), snr)
            dest = Path(args.export_codebooks) / f"golden_r{rb}.json"
            dest.parent.mkdir(parents=True, exist_ok=True)
            save_codebooks(dest, cbs)
    path = _plot_path(args, "golden-omega")
    if path:
        pts = [(r[4], r[3]) for r in rows if r[3] is not None]
        if pts:
            from .plots import plot_omega

            plot_omega(pts, path)
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macdmt",
        description="Diversity-multiplexing analysis for selective-fading MIMO MACs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dmt", help="per-subset diversity curve")
    _add_global_args(p)
    _add_spec_args(p)
    p.add_argument("--subset", type=str, default="1")
    p.add_argument("--step", type=float, default=0.25)
    p.add_argument("--r-max", type=float, default=None, dest="r_max")
    p.set_defaults(func=cmd_dmt)

    p = sub.add_parser("regions", help="two-user dominant outage event partition")
    _add_global_args(p)
    _add_spec_args(p)
    p.add_argument("--step", type=float, default=0.01)
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("rate-region", help="rate regions at target diversity orders")
    _add_global_args(p)
    _add_spec_args(p)
    p.add_argument("--d", type=str, required=True, help="comma list of diversity orders")
    p.set_defaults(func=cmd_rate_region)

    p = sub.add_parser("outage-sim", help="Monte Carlo outage probability and exponent")
    _add_global_args(p)
    _add_spec_args(p)
    p.add_argument("--r", type=str, required=True, help="multiplexing rate tuple")
    p.add_argument("--mode", choices=("outage", "jensen", "total"), default="outage")
    p.add_argument("--subset", type=str, default=None)
    p.add_argument("--grid", type=str, default="10:40:5", help="dB grid start:stop:step")
    p.add_argument("--trials", type=int, default=100000)
    p.add_argument("--fixed-rate-nats", type=float, default=0.0, dest="fixed_rate_nats")
    p.set_defaults(func=cmd_outage_sim)

    p = sub.add_parser("error-sim", help="exhaustive-ML error-event frequencies")
    _add_global_args(p)
    _add_spec_args(p)
    p.add_argument("--codebooks", type=str, default=None, help="codebook JSON path")
    p.add_argument("--rates", type=str, default="0,0")
    p.add_argument("--generator", choices=("golden",), default=None)
    p.add_argument("--rprime", type=_parse_ints, default=None)
    p.add_argument("--gamma", type=str, default="i")
    p.add_argument("--grid", type=str, default="20:40:10")
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--cap", type=int, default=4096)
    p.set_defaults(func=cmd_error_sim)

    p = sub.add_parser("code-check", help="design-criterion decay check")
    _add_global_args(p)
    _add_spec_args(p)
    p.add_argument("--subset", type=str, required=True)
    p.add_argument("--generator", choices=("golden",), default=None)
    p.add_argument("--codebook", action="append", default=None,
                   metavar="SNRDB:PATH", help="codebook file at one SNR point")
    p.add_argument("--rates", type=str, default="0.75,0.75")
    p.add_argument("--rprime", type=_parse_ints, default=None)
    p.add_argument("--r-mux", type=float, default=0.75, dest="r_mux")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--gamma", type=str, default="i")
    p.add_argument("--target", type=float, default=None)
    p.add_argument("--target-mode", choices=("strict", "relaxed"), default="strict",
                   dest="target_mode",
                   help="strict: target r(S); relaxed: the r_S(d*) upper bound")
    p.add_argument("--eps-margin", type=float, default=0.05, dest="eps_margin")
    p.add_argument("--cap", type=int, default=10 ** 9)
    p.set_defaults(func=cmd_code_check)

    p = sub.add_parser("golden-omega", help="exact minimum-determinant study")
    _add_global_args(p)
    p.add_argument("--rprime", type=_parse_ints, required=True,
                   help="comma list of even constellation sizes")
    p.add_argument("--gamma", type=str, default="i")
    p.add_argument("--r-mux", type=float, default=0.75, dest="r_mux")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--cap", type=int, default=10 ** 9)
    p.add_argument("--export-codebooks", type=str, default=None,
                   help="directory for scaled codebook JSON exports")
    p.set_defaults(func=cmd_golden_omega)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InfeasibleRateError, CapExceededError, InsufficientTrialsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ContractViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except MacDmtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
