"""Fast invariant checks behind ``fhbench verify``."""

from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .bounds import (
    ModeDispersion,
    atomic_gibbs,
    combine_curves,
    default_s_grid,
    exact_boundary,
    onedim_curve,
    phenom_curve,
    plaquette_curve,
    tb_gibbs,
)
from .budget import NoiseBudget, ldca_counts, max_cnot_count, renyi2_density
from .gibbs import (
    LOG2E,
    SpectrumSet,
    gibbs_point,
    hubbard_spectrum,
    entropy_to_beta,
    tangent_envelope,
    thermo_identities_check,
)
from .lattice import HubbardSpec, build_sector_blocks, sector_dims


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str


def _sector_dims() -> tuple[bool, str]:
    worst = []
    for spec in (HubbardSpec(2), HubbardSpec(4, "ring1d"), HubbardSpec(2, "plaquette")):
        total = sum(sector_dims(spec.n_sites).values())
        worst.append(total == 4 ** spec.n_sites)
    return all(worst), "sum of sector dimensions = 4^N_sites"


def _hermitian() -> tuple[bool, str]:
    worst = 0.0
    for spec in (HubbardSpec(2, U=5.0, mu=1.3), HubbardSpec(4, "ring1d", U=2.0, mu=0.7)):
        for b in build_sector_blocks(spec):
            worst = max(worst, float(np.max(np.abs(b.matrix - b.matrix.T), initial=0.0)))
    return worst <= 1e-12, f"max asymmetry {worst:.2e}"


def _entropy_identity() -> tuple[bool, str]:
    sp = hubbard_spectrum(HubbardSpec(2, U=5.0))
    worst = 0.0
    for b in np.logspace(-3, 2, 30):
        p = gibbs_point(sp, b)
        rhs = b * p.E * LOG2E + p.log_Z * LOG2E
        # beta E and ln Z cancel at low temperature; scale by the larger term
        scale = max(abs(b * p.E), abs(p.log_Z), 1.0) * LOG2E
        worst = max(worst, abs(p.S - rhs) / scale)
    return worst <= 1e-12, f"max scaled deviation {worst:.2e}"


def _kronecker() -> tuple[bool, str]:
    site = SpectrumSet.from_values([0, 0, 0, 4.0])
    pair = SpectrumSet.from_values(np.add.outer(site.eigenvalues, site.eigenvalues).ravel())
    worst = 0.0
    for b in (0.0, 0.3, 1.0, 7.0):
        a, c = gibbs_point(site, b), gibbs_point(pair, b)
        worst = max(worst, abs(c.E - 2 * a.E), abs(c.S - 2 * a.S), abs(c.log_Z - 2 * a.log_Z))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def _identities() -> tuple[bool, str]:
    spectra = [
        SpectrumSet.from_values([0, 0, 0, 4.0]),
        SpectrumSet.from_values([0, 4.0]),
        hubbard_spectrum(HubbardSpec(2, U=5.0)),
    ]
    worst = max(max(thermo_identities_check(sp, b)) for sp in spectra for b in (0.1, 1.0, 10.0))
    return worst <= 1e-5, f"max residual {worst:.2e}"


def _tangent() -> tuple[bool, str]:
    spec = HubbardSpec(2, U=5.0)
    sp = hubbard_spectrum(spec)
    worst = 0.0
    for s in np.linspace(0.3, 1.0, 25):
        target = s * sp.n_qubits
        beta = entropy_to_beta(sp, target).beta
        worst = max(worst, abs(tangent_envelope(sp, target) - gibbs_point(sp, beta).E))
    tol = 2e-3 * spec.n_sites
    return worst <= tol, f"max gap {worst:.2e} (tol {tol:.1e})"


def _closed_forms() -> tuple[bool, str]:
    tb = hubbard_spectrum(HubbardSpec(2, U=0.0, mu=0.0))
    disp = ModeDispersion.square(2)
    site = hubbard_spectrum(HubbardSpec(1, "ring1d", U=4.0, mu=2.0))
    worst = 0.0
    for b in (0.0, 0.1, 1.0, 5.0):
        e, s = tb_gibbs(disp, b)
        p = gibbs_point(tb, b)
        worst = max(worst, abs(e - p.E), abs(s - p.S))
        e, s = atomic_gibbs(2.0, 4.0, b)
        p = gibbs_point(site, b)
        worst = max(worst, abs(e - p.E), abs(s - p.S))
    return worst <= 1e-10, f"max deviation {worst:.2e}"


def _dominance() -> tuple[bool, str]:
    s = default_s_grid(200)
    worst = -np.inf
    for U in (0.1, 1.0, 5.0, 10.0):
        spec = HubbardSpec(2, U=U)
        exact = exact_boundary(spec, s)
        curves = [phenom_curve(spec, s), onedim_curve(spec, s)]
        comb = combine_curves(curves, s)
        for c in curves + [comb]:
            worst = max(worst, float(np.max(c.e - exact.e)))
    return worst <= 1e-9, f"max excess over exact {worst:.2e}"


def _anchor() -> tuple[bool, str]:
    spec = HubbardSpec(4, U=3.0, mu=0.4)
    grid = np.array([0.5, 1.0])
    worst = 0.0
    for c in (phenom_curve(spec, grid), onedim_curve(spec, grid), plaquette_curve(spec, grid)):
        worst = max(worst, abs(c.e[-1] - (spec.U / 4 - spec.mu)))
    return worst <= 1e-9, f"max deviation at s=1: {worst:.2e}"


def _noise_inversion() -> tuple[bool, str]:
    rng = np.random.default_rng(20240601)
    bad = 0
    for _ in range(100):
        n = int(rng.integers(8, 129))
        p2 = float(10 ** rng.uniform(-5, -2))
        s_th = float(rng.uniform(0.1, 0.95))
        N2 = max_cnot_count(NoiseBudget(n, p2, s_th))
        ok = renyi2_density(n, N2, p2) <= s_th < renyi2_density(n, N2 + 1, p2)
        bad += not ok
    return bad == 0, f"{bad} of 100 cases inconsistent"


def _ldca() -> tuple[bool, str]:
    ok = all(ldca_counts(L) - ldca_counts(L, exact=True) == 5 * 2 * L * L for L in range(2, 12))
    return ok, "large-N minus exact LDCA count = 5N"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "sector-dimensions": _sector_dims,
    "hermiticity": _hermitian,
    "entropy-identity": _entropy_identity,
    "kronecker-additivity": _kronecker,
    "thermo-identities": _identities,
    "tangent-envelope": _tangent,
    "closed-forms-vs-ed": _closed_forms,
    "exact-dominance": _dominance,
    "beta0-anchor": _anchor,
    "noise-inversion": _noise_inversion,
    "ldca-counts": _ldca,
}


def run_checks(names=None) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS.items():
        if names and name not in names:
            continue
        try:
            passed, detail = fn()
        except Exception as exc:  # report, don't abort the suite
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail))
    return results
