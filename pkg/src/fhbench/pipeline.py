"""Benchmark pipeline: bound curves -> entropy threshold -> circuit budgets."""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bounds import (
    EXACT_MAX_SITES,
    BoundCurve,
    BoundKind,
    combine_curves,
    compute_curve,
    default_s_grid,
    exact_boundary,
)
from .budget import (
    AnsatzFamily,
    AnsatzSpec,
    LdcaCount,
    NoiseBudget,
    SweepRow,
    hva_counts,
    hva_enumerated_counts,
    ldca_counts,
    max_cnot_count,
    max_layers,
    p2_grid,
    sweep_csv_lines,
)
from .gibbs import DEFAULT_BETA_MAX
from .lattice import HubbardSpec

log = logging.getLogger(__name__)

REPORT_SCHEMA = "fhbench-report v1"
CURVE_SCHEMA = "# schema: fhbench-curve v1"
SWEEP_SCHEMA = "# schema: fhbench-sweep v1"
BUDGET_SCHEMA = "# schema: fhbench-budget v1"
CURVE_HEADER = "s,e"


class ClassicallyUnreachableError(ValueError):
    """The classical energy lies below everything the bound allows."""


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


# --------------------------------------------------------------------------
# threshold


def solve_threshold(curve: BoundCurve, e_class: float) -> float:
    """Entropy density at which the curve's interpolant reaches ``e_class``.

    ``e_class`` is per site, like the curve.  On flat stretches the smallest
    qualifying ``s`` is returned.  An ``e_class`` above the whole curve
    gives ``s_th = 1``.
    """
    s, e = curve.s, curve.e
    if e_class < e[0]:
        raise ClassicallyUnreachableError(
            f"e_class = {e_class:.6g} lies below the {curve.kind.value} curve minimum "
            f"{e[0]:.6g} (at s = {s[0]:.6g}); classically unreachable on this bound"
        )
    if e_class > e[-1]:
        log.info("e_class %.6g above the curve maximum %.6g: threshold set to 1", e_class, e[-1])
        return 1.0
    i = int(np.argmax(e >= e_class))
    if i == 0:
        return float(s[0])
    lo_s, hi_s, lo_e, hi_e = s[i - 1], s[i], e[i - 1], e[i]
    return float(lo_s + (e_class - lo_e) * (hi_s - lo_s) / (hi_e - lo_e))


def e_class_per_site(e_class: float, units: str, spec: HubbardSpec) -> float:
    if units == "site":
        return float(e_class)
    if units == "qubit":
        return float(e_class) * spec.n_qubits / spec.n_sites
    raise ValueError(f"e_class units must be 'site' or 'qubit', got {units!r}")


def literature_e_class(spec: HubbardSpec) -> dict | None:
    """Look up a classical reference energy for ``spec`` (half filling only)."""
    table = json.loads(resources.files("fhbench").joinpath("data/eclass_literature.json").read_text())
    half = math.isclose(spec.mu, spec.U / 2, abs_tol=1e-12)
    for row in table["entries"]:
        if (
            row["L"] == spec.L
            and math.isclose(row["U"], spec.U, abs_tol=1e-12)
            and (row["filling"] == "half") == half
        ):
            return row
    return None


# --------------------------------------------------------------------------
# configuration


def parse_mu(value, U: float) -> float:
    if isinstance(value, str) and value.strip().lower() == "half":
        return U / 2
    return float(value)


def parse_s_grid(text: str) -> np.ndarray:
    """``min:max:step`` -> inclusive uniform grid."""
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ValueError(f"s grid must be 'min:max:step', got {text!r}") from None
    if step <= 0 or hi < lo:
        raise ValueError(f"bad s grid {text!r}")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    grid = lo + step * np.arange(n)
    if hi - grid[-1] > 1e-12:
        grid = np.append(grid, hi)
    return np.round(grid, 12)


@dataclass
class BenchmarkConfig:
    spec: HubbardSpec
    bounds: tuple[BoundKind, ...] = (BoundKind.PHENOM, BoundKind.PLAQ)
    e_class: float | None = None
    e_class_units: str = "qubit"
    ansatz_list: tuple[AnsatzFamily, ...] = (AnsatzFamily.HVA, AnsatzFamily.LDCA)
    p2: float | None = None
    p2_min: float = 1e-5
    p2_max: float = 1e-3
    p2_points: int = 50
    s_grid: np.ndarray = field(default_factory=default_s_grid)
    beta_max: float = DEFAULT_BETA_MAX
    ldca_count: LdcaCount = LdcaCount.PAPER
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        self.bounds = tuple(BoundKind(b) for b in self.bounds)
        for b in self.bounds:
            if b not in (BoundKind.PHENOM, BoundKind.ONEDIM, BoundKind.PLAQ):
                raise ValueError(f"unsupported bound {b.value!r} in config")
        if not self.bounds:
            raise ValueError("at least one bound is required")
        self.ansatz_list = tuple(AnsatzFamily(a) for a in self.ansatz_list)
        self.ldca_count = LdcaCount(self.ldca_count)
        self.s_grid = np.asarray(self.s_grid, dtype=float)

    @property
    def p2_values(self) -> np.ndarray:
        if self.p2 is not None:
            return np.array([float(self.p2)])
        return p2_grid(self.p2_min, self.p2_max, self.p2_points)

    @classmethod
    def from_dict(cls, d: dict) -> "BenchmarkConfig":
        d = dict(d)
        U = float(d.get("U", 0.0))
        spec = HubbardSpec(
            L=int(d["L"]),
            geometry=d.get("geometry", "square2d-pbc"),
            t=float(d.get("t", 1.0)),
            U=U,
            mu=parse_mu(d.get("mu", 0.0), U),
            l2_pbc_multiedge=bool(d.get("l2_pbc_multiedge", True)),
        )
        bounds = d.get("bounds", ["phenom", "plaq"])
        if bounds == "all" or bounds == ["all"]:
            bounds = ["phenom", "onedim", "plaq"]
        if isinstance(bounds, str):
            bounds = [bounds]
        s_grid = d.get("s_grid")
        if s_grid is None:
            s_grid = default_s_grid()
        elif isinstance(s_grid, str):
            s_grid = parse_s_grid(s_grid)
        elif isinstance(s_grid, dict):
            s_grid = default_s_grid(int(s_grid["points"]), float(s_grid["min"]), float(s_grid["max"]))
        ansatz = d.get("ansatz_list", d.get("ansatz", ["hva", "ldca"]))
        if isinstance(ansatz, str):
            ansatz = [ansatz]
        return cls(
            spec=spec,
            bounds=tuple(bounds),
            e_class=None if d.get("e_class") is None else float(d["e_class"]),
            e_class_units=d.get("e_class_units", "qubit"),
            ansatz_list=tuple(ansatz),
            p2=None if d.get("p2") is None else float(d["p2"]),
            p2_min=float(d.get("p2_min", 1e-5)),
            p2_max=float(d.get("p2_max", 1e-3)),
            p2_points=int(d.get("p2_points", 50)),
            s_grid=s_grid,
            beta_max=float(d.get("beta_max", DEFAULT_BETA_MAX)),
            ldca_count=d.get("ldca_count", "paper"),
            out=d.get("out"),
            workers=int(d.get("workers", 1)),
        )

    def as_dict(self) -> dict:
        s = self.s_grid
        return {
            **self.spec.as_dict(),
            "bounds": [b.value for b in self.bounds],
            "e_class": self.e_class,
            "e_class_units": self.e_class_units,
            "ansatz_list": [a.value for a in self.ansatz_list],
            "p2": self.p2,
            "p2_min": self.p2_min,
            "p2_max": self.p2_max,
            "p2_points": self.p2_points,
            "s_grid": {"min": float(s[0]), "max": float(s[-1]), "points": int(s.size)},
            "beta_max": self.beta_max,
            "ldca_count": self.ldca_count.value,
            "workers": self.workers,
        }


# --------------------------------------------------------------------------
# report


@dataclass
class BudgetEntry:
    p2: float
    n2_max: int | float
    layers: dict


@dataclass
class BenchmarkReport:
    s_th: float
    bound_used: str
    e_class: float
    e_class_units: str
    e_class_site: float
    e_class_source: str
    config: dict
    curves: dict  # kind -> {"s": [...], "e": [...], "valid": bool, "notes": [...]}
    budgets: list
    hva_counts: dict
    ldca_counts: dict
    hva_ref_line: int
    dominance: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    schema: str = REPORT_SCHEMA
    tool_version: str = __version__
    created: str = ""

    def curve(self, kind: str) -> BoundCurve:
        c = self.curves[kind]
        return BoundCurve(
            kind, c["s"], c["e"], c["valid"], dict(c.get("provenance", {})), list(c.get("notes", []))
        )

    def sweep_rows(self) -> list[SweepRow]:
        return [
            SweepRow(
                p2=b.p2,
                n2_max=b.n2_max,
                hva_layers=b.layers.get("hva", 0),
                ldca_layers=b.layers.get("ldca", 0),
                hva_ref_line=self.hva_ref_line,
            )
            for b in self.budgets
        ]


def _curve_record(c: BoundCurve) -> dict:
    return {
        "s": [float(x) for x in c.s],
        "e": [float(x) for x in c.e],
        "valid": bool(c.valid),
        "notes": list(c.notes),
        "provenance": c.provenance,
    }


def dominance_table(spec: HubbardSpec, curves: Sequence[BoundCurve], s_grid, beta_max: float, workers: int = 1) -> list:
    """Largest excess of every bound over the exact boundary."""
    exact = exact_boundary(spec, s_grid, beta_max, workers=workers)
    rows = []
    for c in curves:
        ref = exact.interp(c.s)
        excess = float(np.nanmax(c.e - ref))
        rows.append({"kind": c.kind.value, "valid": bool(c.valid), "max_excess": excess, "dominated": excess <= 1e-9})
    return rows


def run_benchmark(config: BenchmarkConfig) -> BenchmarkReport:
    spec = config.spec
    notes: list[str] = []

    curves: dict[str, BoundCurve] = {}
    for kind in config.bounds:
        try:
            curves[kind.value] = compute_curve(kind, spec, config.s_grid, config.beta_max, config.workers)
        except Exception as exc:
            raise PipelineError(f"bound-engine/{kind.value}", exc) from exc
    valid = [c for c in curves.values() if c.valid]
    if not valid:
        raise PipelineError("bound-engine", ValueError("none of the requested bounds is valid for this instance"))
    for c in curves.values():
        if not c.valid:
            notes.append(f"{c.kind.value} curve computed but excluded: not a valid bound for this instance")
    if len(valid) > 1:
        used = combine_curves(valid, config.s_grid)
        curves[BoundKind.COMBINATION.value] = used
    else:
        used = valid[0]

    source = "config"
    e_class = config.e_class
    units = config.e_class_units
    if e_class is None:
        row = literature_e_class(spec)
        if row is None:
            raise PipelineError("benchmark-cli", ValueError("no e_class given and no literature value for this instance"))
        e_class, units, source = row["value"], row["units"], row["source"]
    e_site = e_class_per_site(e_class, units, spec)
    try:
        s_th = solve_threshold(used, e_site)
    except Exception as exc:
        raise PipelineError("benchmark-cli/threshold", exc) from exc
    if s_th >= 1.0:
        notes.append("e_class at or above the maximal-entropy energy: threshold is 1 and budgets are unbounded")

    n = spec.n_qubits
    budgets = []
    for p2 in config.p2_values:
        budget = NoiseBudget(n, float(p2), s_th)
        layers = {}
        for fam in config.ansatz_list:
            layers[fam.value] = max_layers(AnsatzSpec(fam, spec.L), budget, config.ldca_count)
        budgets.append(BudgetEntry(float(p2), max_cnot_count(budget), layers))

    prep, layer = hva_counts(spec.L) if spec.L >= 2 else (0, 0)
    hva = {"prep": prep, "layer": layer}
    if spec.L >= 2:
        hva["enumerated"] = hva_enumerated_counts(spec.L)
    ldca = (
        {"paper": ldca_counts(spec.L), "exact": ldca_counts(spec.L, exact=True)} if spec.L >= 2 else {}
    )

    dominance = []
    if spec.n_sites <= EXACT_MAX_SITES:
        try:
            dominance = dominance_table(spec, list(curves.values()), config.s_grid, config.beta_max, config.workers)
        except Exception as exc:
            raise PipelineError("bound-engine/exact", exc) from exc

    return BenchmarkReport(
        s_th=s_th,
        bound_used=used.kind.value,
        e_class=float(e_class),
        e_class_units=units,
        e_class_site=e_site,
        e_class_source=source,
        config=config.as_dict(),
        curves={k: _curve_record(c) for k, c in curves.items()},
        budgets=budgets,
        hva_counts=hva,
        ldca_counts=ldca,
        hva_ref_line=spec.L * spec.L,
        dominance=dominance,
        notes=notes,
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


# --------------------------------------------------------------------------
# file I/O


def _json_value(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _from_json_value(v):
    if v == "inf":
        return math.inf
    if isinstance(v, dict):
        return {k: _from_json_value(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_from_json_value(x) for x in v]
    return v


def report_to_dict(report: BenchmarkReport) -> dict:
    d = asdict(report)
    ordered = {"schema": d.pop("schema"), "tool_version": d.pop("tool_version")}
    ordered.update(d)
    return _json_value(ordered)


def report_from_dict(d: dict) -> BenchmarkReport:
    d = _from_json_value(dict(d))
    if d.get("schema") != REPORT_SCHEMA:
        raise ValueError(f"unsupported report schema {d.get('schema')!r}")
    d["budgets"] = [BudgetEntry(**b) for b in d["budgets"]]
    return BenchmarkReport(**d)


def curve_csv_lines(curve: BoundCurve, entropy_per: str = "qubit") -> list[str]:
    scale = 2.0 if entropy_per == "site" else 1.0
    lines = [CURVE_SCHEMA, CURVE_HEADER]
    lines += [f"{format(scale * s, '.12g')},{format(e, '.12g')}" for s, e in zip(curve.s, curve.e)]
    return lines


def _write_lines(path: Path, lines: list[str]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def write_curve(curve: BoundCurve, path: str | os.PathLike, entropy_per: str = "qubit") -> Path:
    """Write ``path`` (CSV) and its ``.meta.json`` sidecar."""
    path = Path(path)
    _write_lines(path, curve_csv_lines(curve, entropy_per))
    meta = {
        "schema": "fhbench-curve-meta v1",
        "kind": curve.kind.value,
        "valid": bool(curve.valid),
        "entropy_per": entropy_per,
        "energy_per": "site",
        "notes": list(curve.notes),
        **curve.provenance,
        "tool_version": __version__,
    }
    _write_lines(path.with_suffix(".meta.json"), [json.dumps(_json_value(meta), indent=2)])
    return path


def read_curve(path: str | os.PathLike, kind: str | None = None) -> BoundCurve:
    """Read a curve CSV (comment lines skipped); entropy is taken per qubit
    unless the sidecar says otherwise."""
    path = Path(path)
    rows = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    if not rows or rows[0].strip() != CURVE_HEADER:
        raise ValueError(f"{path}: expected header {CURVE_HEADER!r}")
    data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    meta_path = path.with_suffix(".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    s = data[:, 0] / (2.0 if meta.get("entropy_per") == "site" else 1.0)
    return BoundCurve(
        kind or meta.get("kind", "combination"), s, data[:, 1], meta.get("valid", True), notes=meta.get("notes", [])
    )


def budget_csv_lines(report: BenchmarkReport) -> list[str]:
    fams = sorted({k for b in report.budgets for k in b.layers})
    lines = [BUDGET_SCHEMA, ",".join(["p2", "n2_max"] + [f"{f}_layers" for f in fams])]
    for b in report.budgets:
        vals = [format(b.p2, ".6g"), str(b.n2_max)] + [str(b.layers[f]) for f in fams]
        lines.append(",".join(vals))
    return lines


def export_report(report: BenchmarkReport, out_dir: str | os.PathLike, fmt: str = "json", entropy_per: str = "qubit") -> list[Path]:
    """Write the report as ``report.json`` or as a bundle of CSV files."""
    out = Path(out_dir)
    written = []
    if fmt == "json":
        path = out / "report.json"
        _write_lines(path, [json.dumps(report_to_dict(report), indent=2)])
        written.append(path)
    elif fmt == "csv-bundle":
        for kind in report.curves:
            written.append(write_curve(report.curve(kind), out / f"curve_{kind}.csv", entropy_per))
        path = out / "budget.csv"
        _write_lines(path, budget_csv_lines(report))
        written.append(path)
        if len(report.budgets) > 1 and {"hva", "ldca"} <= set(report.budgets[0].layers):
            path = out / "sweep.csv"
            _write_lines(path, [SWEEP_SCHEMA] + sweep_csv_lines(report.sweep_rows()))
            written.append(path)
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    return written


def load_report(path: str | os.PathLike) -> BenchmarkReport:
    return report_from_dict(json.loads(Path(path).read_text()))
