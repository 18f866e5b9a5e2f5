import math

import numpy as np
import pytest

import oracles
from fhbench.bounds import (
    BoundCurve,
    BoundKind,
    ModeDispersion,
    UnsupportedSizeError,
    atomic_gibbs,
    combine_curves,
    compute_curve,
    exact_boundary,
    matched_energy,
    onedim_curve,
    phenom_curve,
    plaquette_curve,
    tb_gibbs,
)
from fhbench.gibbs import SpectrumSet, hubbard_spectrum
from fhbench.lattice import HubbardSpec

# Frozen from the Fock-space oracle in tests/oracles.py (mpmath bisection).
PLAQ_U4_HALF_S069 = -2.867748044693911  # per site; -1.43387 per qubit
EXACT_L2_U5 = {0.5: -1.4143808647289775, 0.8: -0.6915461652996674}
RING4_U25_S07 = -0.5080404962242275  # per ring site
TB_L2_BETA1 = (-7.712220640606541, 4.519917098665218)
ATOM_MU2_U4_BETA1 = (-1.7615941559557649, 1.5270653410031616)

S_GRID = np.linspace(0.3, 1.0, 71)


def test_square_dispersion():
    np.testing.assert_allclose(ModeDispersion.square(2).epsilons, [-4, 0, 0, 4], atol=1e-15)
    for L in (3, 4, 5):
        np.testing.assert_allclose(
            ModeDispersion.square(L).epsilons,
            ModeDispersion.from_lattice(HubbardSpec(L)).epsilons,
            atol=1e-12,
        )
    single = ModeDispersion.for_spec(HubbardSpec(2, l2_pbc_multiedge=False))
    np.testing.assert_allclose(single.epsilons, [-2, 0, 0, 2], atol=1e-12)


def test_tb_gibbs_limits_and_oracle():
    d = ModeDispersion.square(2)
    E, S = tb_gibbs(d, 0.0)
    assert E == pytest.approx(0.0, abs=1e-15) and S == pytest.approx(8.0)
    E, _ = tb_gibbs(d, 800.0)
    assert E == pytest.approx(-8.0)
    E, S = tb_gibbs(d, 1.0)
    assert E == pytest.approx(TB_L2_BETA1[0], abs=1e-12)
    assert S == pytest.approx(TB_L2_BETA1[1], abs=1e-12)


def test_atomic_gibbs_limits_and_oracle():
    assert atomic_gibbs(0.0, 4.0, 0.0) == pytest.approx((1.0, 2.0))
    E, S = atomic_gibbs(0.0, 4.0, 80.0)
    assert E == pytest.approx(0.0, abs=1e-12) and S == pytest.approx(math.log2(3), abs=1e-12)
    E, S = atomic_gibbs(2.0, 4.0, 1.0)
    assert E == pytest.approx(ATOM_MU2_U4_BETA1[0], abs=1e-12)
    assert S == pytest.approx(ATOM_MU2_U4_BETA1[1], abs=1e-12)


def test_matched_energy_plateau_returns_ground():
    sp = SpectrumSet.from_values([0.0, 0.0, 0.0, 4.0])
    m = matched_energy(sp, 1.0)
    assert m.at_ground and m.energy == 0.0
    m = matched_energy(sp, 1.9)
    assert not m.at_ground and 0 < m.energy < 1


@pytest.mark.parametrize("fn", [phenom_curve, onedim_curve, plaquette_curve])
def test_beta_zero_anchor(fn):
    spec = HubbardSpec(4, U=3.0, mu=0.4)
    c = fn(spec, [0.5, 1.0])
    assert c.e[-1] == pytest.approx(spec.U / 4 - spec.mu, abs=1e-9)


def test_plaquette_regression_anchor():
    c = plaquette_curve(HubbardSpec(8, U=4.0, mu=2.0), [0.69])
    assert c.e[0] == pytest.approx(PLAQ_U4_HALF_S069, abs=1e-9)
    assert c.e[0] / 2 == pytest.approx(-1.43, abs=5e-3)


def test_plaquette_validity_flag():
    assert plaquette_curve(HubbardSpec(4), [1.0]).valid
    assert not plaquette_curve(HubbardSpec(2), [1.0]).valid
    assert not plaquette_curve(HubbardSpec(5), [1.0]).valid


def test_plaquette_is_size_independent():
    a = plaquette_curve(HubbardSpec(4, U=4.0, mu=2.0), S_GRID)
    b = plaquette_curve(HubbardSpec(8, U=4.0, mu=2.0), S_GRID)
    assert np.array_equal(a.e, b.e)


def test_onedim_uses_halved_ring():
    c = onedim_curve(HubbardSpec(4, U=5.0), [0.7])
    assert c.e[0] == pytest.approx(2 * RING4_U25_S07, abs=1e-9)


def test_exact_boundary_against_oracle():
    c = exact_boundary(HubbardSpec(2, U=5.0), [0.5, 0.8])
    assert c.e[0] == pytest.approx(EXACT_L2_U5[0.5], abs=1e-9)
    assert c.e[1] == pytest.approx(EXACT_L2_U5[0.8], abs=1e-9)


def test_exact_equals_phenom_at_u0():
    spec = HubbardSpec(2, U=0.0, mu=0.0)
    ex = exact_boundary(spec, S_GRID)
    ph = phenom_curve(spec, S_GRID)
    np.testing.assert_allclose(ph.e, ex.e, atol=1e-9)


@pytest.mark.parametrize("U", [0.1, 1.0, 5.0, 10.0])
def test_dominance_at_l2(U):
    spec = HubbardSpec(2, U=U)
    ex = exact_boundary(spec, S_GRID)
    curves = [phenom_curve(spec, S_GRID), onedim_curve(spec, S_GRID)]
    comb = combine_curves(curves, S_GRID)
    for c in curves + [comb]:
        assert np.all(c.e <= ex.e + 1e-9)
    best = np.max([c.e for c in curves], axis=0)
    assert np.all(comb.e >= best - 1e-12)


def test_phenom_close_to_exact_at_weak_coupling():
    spec = HubbardSpec(2, U=0.1)
    s = np.linspace(0.6, 1.0, 41)
    gap = exact_boundary(spec, s).e - phenom_curve(spec, s).e
    assert np.max(np.abs(gap)) <= 0.05


def test_large_u_phenom_and_plaq_agree():
    # half filling; at mu = 0 both energies pass through zero near s = 0.9
    spec = HubbardSpec(4, U=10.0, mu=5.0)
    ph = phenom_curve(spec, [0.95]).e[0]
    pq = plaquette_curve(spec, [0.95]).e[0]
    assert abs(ph - pq) <= 0.1 * abs(pq)


def test_onedim_beats_phenom_at_strong_coupling():
    spec = HubbardSpec(2, U=10.0)
    assert onedim_curve(spec, [0.8]).e[0] > phenom_curve(spec, [0.8]).e[0]


def test_phenom_l4_l8_agree_high_entropy():
    s = np.linspace(0.9, 1.0, 11)
    a = phenom_curve(HubbardSpec(4, U=4.0, mu=2.0), s)
    b = phenom_curve(HubbardSpec(8, U=4.0, mu=2.0), s)
    assert np.max(np.abs(a.e - b.e)) <= 1e-2


def test_combine_single_and_dominant():
    s = np.linspace(0, 1, 11)
    low = BoundCurve(BoundKind.PHENOM, s, -2 + s)
    high = BoundCurve(BoundKind.PLAQ, s, -1 + s)
    np.testing.assert_array_equal(combine_curves([low], s).e, low.e)
    comb = combine_curves([low, high], s)
    np.testing.assert_array_equal(comb.e, high.e)
    assert set(comb.provenance["best"]) == {"plaq"}


def test_combine_crossing_and_errors():
    s = np.linspace(0, 1, 5)
    a = BoundCurve(BoundKind.PHENOM, s, s)
    b = BoundCurve(BoundKind.ONEDIM, s, 1 - s)
    comb = combine_curves([a, b], s)
    np.testing.assert_allclose(comb.e, np.maximum(s, 1 - s))
    with pytest.raises(ValueError):
        combine_curves([BoundCurve(BoundKind.PLAQ, s, s, valid=False)])
    with pytest.raises(ValueError):
        combine_curves([a, BoundCurve(BoundKind.ONEDIM, s + 2, s)])


def test_curve_rejects_unsorted():
    with pytest.raises(ValueError):
        BoundCurve(BoundKind.PHENOM, [0.2, 0.1], [0.0, 0.0])


def test_size_caps():
    with pytest.raises(UnsupportedSizeError):
        exact_boundary(HubbardSpec(3), [1.0])
    with pytest.raises(UnsupportedSizeError):
        onedim_curve(HubbardSpec(9), [1.0])
    with pytest.raises(ValueError):
        phenom_curve(HubbardSpec(4, "ring1d"), [1.0])


def test_compute_curve_dispatch():
    spec = HubbardSpec(2, U=1.0)
    for kind in ("phenom", "onedim", "plaq", "exact"):
        assert compute_curve(kind, spec, [1.0]).kind.value == kind
    with pytest.raises(ValueError):
        compute_curve("combination", spec, [1.0])


def test_spectrum_cache_round_trip(tmp_path, monkeypatch):
    from fhbench import cache

    monkeypatch.setenv("FHBENCH_CACHE_DIR", str(tmp_path))
    spec = HubbardSpec(4, "ring1d", U=1.5, mu=0.3)
    first = hubbard_spectrum(spec)
    path = cache.cache_path(spec)
    assert path.exists()
    again = hubbard_spectrum(spec)
    assert np.array_equal(first.eigenvalues, again.eigenvalues)
    ref = np.sort(oracles.fock_spectrum(4, oracles.ring_bonds(4), 1.0, 1.5, 0.3))
    np.testing.assert_allclose(again.eigenvalues, ref, atol=1e-11)
    path.write_text(cache.HEADER + "\n1.0\n")
    assert cache.load_spectrum(spec) is None  # wrong length is ignored
