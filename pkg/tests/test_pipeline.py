import json
import math

import numpy as np
import pytest

from fhbench.bounds import BoundCurve, BoundKind
from fhbench.lattice import HubbardSpec
from fhbench.pipeline import (
    REPORT_SCHEMA,
    BenchmarkConfig,
    ClassicallyUnreachableError,
    PipelineError,
    e_class_per_site,
    export_report,
    literature_e_class,
    load_report,
    parse_mu,
    parse_s_grid,
    read_curve,
    report_to_dict,
    run_benchmark,
    solve_threshold,
    write_curve,
)


def small_config(**over):
    d = dict(L=2, U=5.0, mu=0.0, bounds=["phenom", "onedim"], e_class=-0.9, s_grid="0.3:1:0.01", p2=1e-3)
    d.update(over)
    return BenchmarkConfig.from_dict(d)


def test_parse_helpers():
    assert parse_mu("half", 4.0) == 2.0
    assert parse_mu("1.5", 4.0) == 1.5
    g = parse_s_grid("0.5:1:0.1")
    np.testing.assert_allclose(g, [0.5, 0.6, 0.7, 0.8, 0.9, 1.0])
    np.testing.assert_allclose(parse_s_grid("0:1:0.3"), [0, 0.3, 0.6, 0.9, 1.0])
    with pytest.raises(ValueError):
        parse_s_grid("0.1-0.9")


def test_e_class_units():
    spec = HubbardSpec(8)
    assert e_class_per_site(-1.43, "qubit", spec) == pytest.approx(-2.86)
    assert e_class_per_site(-2.86, "site", spec) == -2.86
    with pytest.raises(ValueError):
        e_class_per_site(1.0, "plaquette", spec)


def test_literature_lookup():
    row = literature_e_class(HubbardSpec(8, U=4.0, mu=2.0))
    assert row["value"] == -1.43 and row["units"] == "qubit"
    assert literature_e_class(HubbardSpec(8, U=4.0, mu=0.0)) is None


def test_solve_threshold_interpolates():
    c = BoundCurve(BoundKind.PLAQ, [0.0, 0.5, 1.0], [-2.0, -1.0, 0.0])
    assert solve_threshold(c, -1.5) == pytest.approx(0.25)
    assert solve_threshold(c, -2.0) == 0.0
    assert solve_threshold(c, 0.5) == 1.0
    flat = BoundCurve(BoundKind.PLAQ, [0.0, 0.4, 0.6, 1.0], [-2.0, -1.0, -1.0, 0.0])
    assert solve_threshold(flat, -1.0) == pytest.approx(0.4)
    with pytest.raises(ClassicallyUnreachableError):
        solve_threshold(c, -3.0)


def test_config_rejects_exact_and_empty():
    with pytest.raises(ValueError):
        small_config(bounds=["exact"])
    with pytest.raises(ValueError):
        small_config(bounds=[])


def test_config_round_trip():
    cfg = small_config()
    again = BenchmarkConfig.from_dict(cfg.as_dict())
    assert again.as_dict() == cfg.as_dict()
    np.testing.assert_allclose(again.s_grid, cfg.s_grid)


def test_benchmark_small_instance():
    r = run_benchmark(small_config())
    assert r.bound_used == "combination"
    assert 0.3 < r.s_th < 1.0
    assert r.e_class_site == pytest.approx(-1.8)
    assert r.dominance and all(row["dominated"] for row in r.dominance)
    assert r.budgets[0].layers.keys() == {"hva", "ldca"}


def test_invalid_only_bound_is_an_error():
    with pytest.raises(PipelineError) as err:
        run_benchmark(small_config(bounds=["plaq"]))
    assert err.value.stage == "bound-engine"


def test_unreachable_e_class():
    with pytest.raises(PipelineError, match="threshold"):
        run_benchmark(small_config(e_class=-50.0))


def test_e_class_above_curve_gives_unbounded_budgets():
    r = run_benchmark(small_config(e_class=5.0))
    assert r.s_th == 1.0
    assert r.budgets[0].n2_max == math.inf
    assert any("unbounded" in n for n in r.notes)


def test_report_json_round_trip(tmp_path):
    r = run_benchmark(small_config(e_class=5.0))
    (path,) = export_report(r, tmp_path, "json")
    text = path.read_text()
    assert list(json.loads(text))[:2] == ["schema", "tool_version"]
    assert json.loads(text)["schema"] == REPORT_SCHEMA
    back = load_report(path)
    assert report_to_dict(back) == report_to_dict(r)
    assert back.budgets[0].n2_max == math.inf


def test_curve_csv_round_trip(tmp_path):
    r = run_benchmark(small_config())
    c = r.curve("phenom")
    for per in ("qubit", "site"):
        path = write_curve(c, tmp_path / f"c_{per}.csv", per)
        back = read_curve(path)
        np.testing.assert_allclose(back.s, c.s, rtol=1e-11)
        np.testing.assert_allclose(back.e, c.e, rtol=1e-11, atol=1e-11)
    meta = json.loads((tmp_path / "c_site.meta.json").read_text())
    assert meta["kind"] == "phenom" and meta["spec"]["U"] == 5.0 and meta["entropy_per"] == "site"
    rows = (tmp_path / "c_site.csv").read_text().splitlines()
    assert rows[1] == "s,e" and rows[2].startswith("0.6,")


def test_csv_bundle_is_deterministic(tmp_path):
    cfg = small_config(p2=None, p2_points=5)
    a = export_report(run_benchmark(cfg), tmp_path / "a", "csv-bundle")
    b = export_report(run_benchmark(cfg), tmp_path / "b", "csv-bundle")
    names = sorted(p.name for p in a)
    assert names == sorted(p.name for p in b)
    assert "sweep.csv" in names and "budget.csv" in names
    for pa in a:
        pb = tmp_path / "b" / pa.name
        assert pa.read_bytes() == pb.read_bytes()
