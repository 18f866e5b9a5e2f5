"""Command-line interface: ``fhbench <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from .bounds import combine_curves, compute_curve
from .budget import (
    AnsatzSpec,
    NoiseBudget,
    max_cnot_count,
    max_layers,
    p2_grid,
    p2_sweep,
    sweep_csv_lines,
)
from .pipeline import (
    SWEEP_SCHEMA,
    BenchmarkConfig,
    curve_csv_lines,
    e_class_per_site,
    export_report,
    literature_e_class,
    read_curve,
    run_benchmark,
    solve_threshold,
    write_curve,
)
from .verify import run_checks

log = logging.getLogger("fhbench")

PRIMARY_BOUNDS = ("phenom", "onedim", "plaq")


def _bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("true", "1", "yes", "on"):
        return True
    if v in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("problem instance")
    g.add_argument("--config", help="JSON config file; flags given on the command line override it")
    g.add_argument("--L", type=int)
    g.add_argument("--geometry", help="square2d-pbc (default), ring1d or plaquette2x2-obc")
    g.add_argument("--t", type=float)
    g.add_argument("--U", type=float)
    g.add_argument("--mu", help="chemical potential, or 'half' for mu = U/2")
    g.add_argument("--l2-pbc-multiedge", type=_bool, dest="l2_pbc_multiedge")
    g = p.add_argument_group("numerics")
    g.add_argument("--s-grid", dest="s_grid", help="entropy-density grid min:max:step")
    g.add_argument("--beta-max", type=float, dest="beta_max")
    g.add_argument("--workers", type=int)
    g.add_argument("--out")
    g.add_argument("--entropy-per", choices=("site", "qubit"), default="qubit", dest="entropy_per",
                   help="entropy normalization of written curves (default: qubit)")


def _add_eclass_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--e-class", type=float, dest="e_class", help="classical reference energy density")
    p.add_argument("--e-class-units", choices=("qubit", "site"), dest="e_class_units",
                   help="normalization of --e-class (default: qubit)")


def _add_budget_flags(p: argparse.ArgumentParser, sweep: bool) -> None:
    p.add_argument("--ansatz", choices=("hva", "ldca"), action="append",
                   help="ansatz family; repeat for several (default: both)")
    p.add_argument("--ldca-count", choices=("exact", "paper"), dest="ldca_count")
    p.add_argument("--s-th", type=float, dest="s_th",
                   help="entropy-density threshold; computed from the bound and e_class if omitted")
    if sweep:
        p.add_argument("--p2-min", type=float, dest="p2_min")
        p.add_argument("--p2-max", type=float, dest="p2_max")
        p.add_argument("--p2-points", type=int, dest="p2_points")
    else:
        p.add_argument("--p2", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fhbench",
        description="Gibbs-boundary lower bounds, entropy thresholds and noisy circuit budgets "
        "for the 2D Fermi-Hubbard model.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", help="emit one bound curve or the exact boundary as CSV")
    _add_spec_flags(p)
    p.add_argument("--bound", default="plaq", help="phenom|onedim|plaq|exact|all")

    p = sub.add_parser("combine", help="pointwise best of several bound curves")
    _add_spec_flags(p)
    p.add_argument("--bound", default=None, help="phenom|onedim|plaq|all, comma separated")
    p.add_argument("--inputs", nargs="+", help="combine existing curve CSV files instead")

    p = sub.add_parser("threshold", help="entropy-density threshold for a classical energy")
    _add_spec_flags(p)
    _add_eclass_flags(p)
    p.add_argument("--bound", default=None, help="phenom|onedim|plaq|all, comma separated")
    p.add_argument("--curve", help="use this curve CSV instead of computing bounds")

    p = sub.add_parser("depth", help="CNOT and layer budgets at one noise level")
    _add_spec_flags(p)
    _add_eclass_flags(p)
    _add_budget_flags(p, sweep=False)
    p.add_argument("--bound", default=None)

    p = sub.add_parser("sweep", help="layer budgets across a log-spaced p2 range (CSV)")
    _add_spec_flags(p)
    _add_eclass_flags(p)
    _add_budget_flags(p, sweep=True)
    p.add_argument("--bound", default=None)

    p = sub.add_parser("benchmark", help="full pipeline: curves, threshold, budgets, report")
    _add_spec_flags(p)
    _add_eclass_flags(p)
    _add_budget_flags(p, sweep=True)
    p.add_argument("--p2", type=float, help="single noise level instead of a sweep")
    p.add_argument("--bound", default=None)
    p.add_argument("--format", choices=("json", "csv-bundle", "both"), default="both")

    p = sub.add_parser("verify", help="run the invariant checks")
    p.add_argument("--check", action="append", help="run only this check (repeatable)")
    return parser


def _parse_bounds(text: str | None) -> list[str] | None:
    if text is None:
        return None
    items = [x.strip().lower() for x in text.split(",") if x.strip()]
    if "all" in items:
        return list(PRIMARY_BOUNDS)
    return items


def _merged_config(args) -> dict:
    d: dict = {}
    if getattr(args, "config", None):
        d.update(json.loads(Path(args.config).read_text()))
    for key in ("L", "geometry", "t", "U", "mu", "l2_pbc_multiedge", "s_grid", "beta_max", "workers", "out",
                "e_class", "e_class_units", "ldca_count", "p2", "p2_min", "p2_max", "p2_points"):
        value = getattr(args, key, None)
        if value is not None:
            d[key] = value
    bounds = _parse_bounds(getattr(args, "bound", None))
    if bounds is not None:
        d["bounds"] = bounds
    if getattr(args, "ansatz", None):
        d["ansatz_list"] = args.ansatz
    if "L" not in d:
        raise SystemExit("error: --L is required (on the command line or in --config)")
    return d


def _config(args, default_bounds=None) -> BenchmarkConfig:
    d = _merged_config(args)
    if default_bounds is not None and "bounds" not in d:
        d["bounds"] = default_bounds
    return BenchmarkConfig.from_dict(d)


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _curves(cfg: BenchmarkConfig):
    return [compute_curve(k, cfg.spec, cfg.s_grid, cfg.beta_max, cfg.workers) for k in cfg.bounds]


def _best_curve(cfg: BenchmarkConfig):
    curves = _curves(cfg)
    valid = [c for c in curves if c.valid]
    if not valid:
        raise SystemExit("error: none of the requested bounds is valid for this instance")
    return combine_curves(valid, cfg.s_grid) if len(valid) > 1 else valid[0]


def _threshold(args, cfg: BenchmarkConfig) -> float:
    if getattr(args, "s_th", None) is not None:
        return float(args.s_th)
    e_class, units = cfg.e_class, cfg.e_class_units
    if e_class is None:
        row = literature_e_class(cfg.spec)
        if row is None:
            raise SystemExit("error: --e-class is required for this instance")
        e_class, units = row["value"], row["units"]
    curve = read_curve(args.curve) if getattr(args, "curve", None) else _best_curve(cfg)
    return solve_threshold(curve, e_class_per_site(e_class, units, cfg.spec))


def cmd_curve(args) -> int:
    d = _merged_config(args)
    kinds = _parse_bounds(args.bound) or ["plaq"]
    d["bounds"] = ["phenom"]  # placeholder for config validation
    cfg = BenchmarkConfig.from_dict(d)
    if len(kinds) > 1:
        if not cfg.out:
            raise SystemExit("error: --out DIR is required with --bound all")
        for k in kinds:
            try:
                c = compute_curve(k, cfg.spec, cfg.s_grid, cfg.beta_max, cfg.workers)
            except ValueError as exc:
                log.warning("skipping %s: %s", k, exc)
                continue
            write_curve(c, Path(cfg.out) / f"curve_{k}.csv", args.entropy_per)
        return 0
    c = compute_curve(kinds[0], cfg.spec, cfg.s_grid, cfg.beta_max, cfg.workers)
    if not c.valid:
        log.warning("%s curve is not a valid lower bound for this instance", c.kind.value)
    if cfg.out:
        write_curve(c, cfg.out, args.entropy_per)
    else:
        _emit(curve_csv_lines(c, args.entropy_per), None)
    return 0


def cmd_combine(args) -> int:
    if args.inputs:
        curves = [read_curve(p) for p in args.inputs]
        comb = combine_curves(curves)
        out = args.out
    else:
        cfg = _config(args, default_bounds=["phenom", "plaq"])
        comb = combine_curves(_curves(cfg), cfg.s_grid)
        out = cfg.out
    if out:
        write_curve(comb, out, args.entropy_per)
    else:
        _emit(curve_csv_lines(comb, args.entropy_per), None)
    return 0


def cmd_threshold(args) -> int:
    cfg = _config(args, default_bounds=["phenom", "plaq"])
    s_th = _threshold(args, cfg)
    print(format(s_th, ".10g"))
    return 0


def cmd_depth(args) -> int:
    cfg = _config(args, default_bounds=["phenom", "plaq"])
    if args.p2 is None:
        raise SystemExit("error: --p2 is required")
    s_th = _threshold(args, cfg)
    L = cfg.spec.L
    budget = NoiseBudget(2 * L * L, args.p2, s_th)
    out = {"s_th": s_th, "p2": args.p2, "n2_max": max_cnot_count(budget)}
    for fam in cfg.ansatz_list:
        out[f"{fam.value}_layers"] = max_layers(AnsatzSpec(fam, L), budget, cfg.ldca_count)
    print(json.dumps({k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in out.items()}))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args, default_bounds=["phenom", "plaq"])
    s_th = _threshold(args, cfg)
    rows = p2_sweep(cfg.spec.L, s_th, p2_grid(cfg.p2_min, cfg.p2_max, cfg.p2_points), cfg.ldca_count)
    _emit([SWEEP_SCHEMA] + sweep_csv_lines(rows), cfg.out)
    return 0


def cmd_benchmark(args) -> int:
    cfg = _config(args)
    report = run_benchmark(cfg)
    if cfg.out:
        formats = ("json", "csv-bundle") if args.format == "both" else (args.format,)
        for fmt in formats:
            export_report(report, cfg.out, fmt, args.entropy_per)
    print(f"s_th = {report.s_th:.6f} ({report.bound_used} bound, e_class = {report.e_class} per {report.e_class_units})")
    for b in report.budgets if len(report.budgets) <= 5 else []:
        layers = ", ".join(f"{k}={v}" for k, v in b.layers.items())
        print(f"p2 = {b.p2:.6g}: N2_max = {b.n2_max}, {layers}")
    for note in report.notes:
        print(f"note: {note}")
    return 0


def cmd_verify(args) -> int:
    results = run_checks(args.check)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "curve": cmd_curve,
    "combine": cmd_combine,
    "threshold": cmd_threshold,
    "depth": cmd_depth,
    "sweep": cmd_sweep,
    "benchmark": cmd_benchmark,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
