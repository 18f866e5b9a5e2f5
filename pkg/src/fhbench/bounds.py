"""Lower bounds to the Gibbs energy-entropy boundary of the 2D Hubbard model.

Every curve is a set of samples ``(s, e)`` with ``s`` the entropy per qubit
(bits, in ``[0, 1]``) and ``e`` the energy per site (units of ``t``).

Each bound splits ``H`` into parts whose Gibbs states are tractable and
matches every part to the full target entropy.  Below the ground-degeneracy
entropy of a part no Gibbs state exists; there the part contributes its
ground energy, which is still a valid lower bound for any state.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import expit, xlogy

from . import __version__
from .gibbs import (
    DEFAULT_BETA_MAX,
    LOG2E,
    PLATEAU_TOL_BITS,
    SpectrumSet,
    hubbard_spectrum,
    solve_beta_for_entropy,
)
from .lattice import DEFAULT_MAX_SITES, Geometry, HubbardSpec, SpectrumSizeError, hopping_matrix

EXACT_MAX_SITES = 4
ONEDIM_MAX_L = DEFAULT_MAX_SITES
# Saturated entropy solves retry with a larger beta ceiling up to this value.
BETA_CEILING = 1e6


class UnsupportedSizeError(SpectrumSizeError):
    pass


class BoundKind(str, enum.Enum):
    PHENOM = "phenom"
    ONEDIM = "onedim"
    PLAQ = "plaq"
    COMBINATION = "combination"
    EXACT = "exact"


def default_s_grid(points: int = 1000, s_min: float = 0.02, s_max: float = 1.0) -> np.ndarray:
    return np.linspace(s_min, s_max, points)


@dataclass
class BoundCurve:
    kind: BoundKind
    s: np.ndarray
    e: np.ndarray
    valid: bool = True
    provenance: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.kind = BoundKind(self.kind)
        self.s = np.asarray(self.s, dtype=float)
        self.e = np.asarray(self.e, dtype=float)
        if self.s.shape != self.e.shape or self.s.ndim != 1:
            raise ValueError("s and e must be 1-d arrays of equal length")
        if self.s.size and np.any(np.diff(self.s) <= 0):
            raise ValueError("s samples must be strictly increasing")

    def interp(self, s) -> np.ndarray:
        """Piecewise-linear interpolant; NaN outside the sampled range."""
        s = np.asarray(s, dtype=float)
        out = np.interp(s, self.s, self.e)
        return np.where((s < self.s[0]) | (s > self.s[-1]), np.nan, out)

    @property
    def s_range(self) -> tuple[float, float]:
        return float(self.s[0]), float(self.s[-1])


# --------------------------------------------------------------------------
# closed-form thermal models


@dataclass(frozen=True)
class ModeDispersion:
    """Single-particle energies of the kinetic term (one spin species)."""

    epsilons: np.ndarray

    @classmethod
    def square(cls, L: int, t: float = 1.0) -> "ModeDispersion":
        k = 2 * np.pi * np.arange(L) / L
        kx, ky = np.meshgrid(k, k, indexing="ij")
        eps = -2 * t * (np.cos(kx) + np.cos(ky))
        return cls(np.sort(eps.ravel()))

    @classmethod
    def from_lattice(cls, spec: HubbardSpec) -> "ModeDispersion":
        return cls(np.sort(np.linalg.eigvalsh(hopping_matrix(spec))))

    @classmethod
    def for_spec(cls, spec: HubbardSpec) -> "ModeDispersion":
        """Closed form where it coincides with the real-space bonds, else
        the eigenvalues of the hopping matrix (L = 1, or L = 2 without
        doubled wrap bonds)."""
        if spec.geometry is Geometry.SQUARE_PBC and (
            spec.L >= 3 or (spec.L == 2 and spec.l2_pbc_multiedge)
        ):
            return cls.square(spec.L, spec.t)
        return cls.from_lattice(spec)


def tb_gibbs(dispersion: ModeDispersion, beta: float) -> tuple[float, float]:
    """Tight-binding Gibbs energy and entropy (bits), both spins included."""
    if beta < 0:
        raise ValueError("negative beta is not supported")
    x = beta * dispersion.epsilons
    occ = expit(-x)
    empty = expit(x)
    energy = 2.0 * float(np.dot(dispersion.epsilons, occ))
    s_nats = -2.0 * float(np.sum(xlogy(occ, occ) + xlogy(empty, empty)))
    return energy, s_nats * LOG2E


class TightBinding:
    def __init__(self, dispersion: ModeDispersion, zero_tol: float = 1e-10):
        self.dispersion = dispersion
        eps = dispersion.epsilons
        self.max_entropy = 2.0 * len(eps)
        self.plateau_entropy = 2.0 * float(np.count_nonzero(np.abs(eps) <= zero_tol))
        self.ground_energy = 2.0 * float(np.sum(np.minimum(eps, 0.0)))

    def energy_entropy(self, beta):
        return tb_gibbs(self.dispersion, beta)

    def entropy_bits(self, beta):
        return tb_gibbs(self.dispersion, beta)[1]


def atomic_gibbs(mu: float, U: float, beta: float) -> tuple[float, float]:
    """Per-site Gibbs energy and entropy (bits) of ``-mu n + U n_up n_dn``.

    Levels ``0, -mu, -mu, U - 2 mu``; ``Z = 1 + 2 e^{beta mu} + e^{-beta (U - 2 mu)}``.
    """
    if beta < 0:
        raise ValueError("negative beta is not supported")
    levels = np.array([0.0, -mu, U - 2 * mu])
    degeneracy = np.array([1.0, 2.0, 1.0])
    shift = levels.min()
    w = degeneracy * np.exp(-beta * (levels - shift))
    z = w.sum()
    energy = float(np.dot(levels, w) / z)
    s_nats = beta * (energy - shift) + np.log(z)
    return energy, float(s_nats * LOG2E)


class AtomicSite:
    def __init__(self, mu: float, U: float):
        self.mu, self.U = float(mu), float(U)
        levels = np.array([0.0, -mu, -mu, U - 2 * mu])
        e0 = levels.min()
        deg = int(np.count_nonzero(levels - e0 <= 1e-12 * max(1.0, np.abs(levels).max())))
        self.max_entropy = 2.0
        self.plateau_entropy = float(np.log2(deg))
        self.ground_energy = float(e0)

    def energy_entropy(self, beta):
        return atomic_gibbs(self.mu, self.U, beta)

    def entropy_bits(self, beta):
        return atomic_gibbs(self.mu, self.U, beta)[1]


class MatchedState(NamedTuple):
    beta: float
    energy: float
    at_ground: bool


def matched_energy(model, S_bits: float, beta_max: float = DEFAULT_BETA_MAX) -> MatchedState:
    """Lowest energy of ``model`` over states with entropy ``S_bits``.

    Above the plateau this is the entropy-matched Gibbs energy; at or below
    it, the ground energy (``beta = inf``).
    """
    if S_bits <= model.plateau_entropy + PLATEAU_TOL_BITS:
        return MatchedState(np.inf, model.ground_energy, True)
    S_bits = min(S_bits, model.max_entropy)
    ceiling = float(beta_max)
    while True:
        sol = solve_beta_for_entropy(model, S_bits, ceiling)
        if not sol.saturated:
            return MatchedState(sol.beta, model.energy_entropy(sol.beta)[0], False)
        if ceiling >= BETA_CEILING:
            return MatchedState(np.inf, model.ground_energy, True)
        ceiling = min(ceiling * 10.0, BETA_CEILING)


def _grid(s_grid) -> np.ndarray:
    s = default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    if s.size == 0:
        raise ValueError("empty s grid")
    if np.any(s < 0) or np.any(s > 1 + 1e-12):
        raise ValueError("entropy densities must lie in [0, 1]")
    return s


def _provenance(spec: HubbardSpec, s: np.ndarray, beta_max: float, **extra) -> dict:
    prov = {
        "spec": spec.as_dict(),
        "s_grid": {"min": float(s[0]), "max": float(s[-1]), "points": int(s.size)},
        "beta_max": float(beta_max),
        "version": __version__,
    }
    prov.update(extra)
    return prov


def _plateau_note(name: str, count: int) -> list:
    if not count:
        return []
    return [f"{count} samples at or below the {name} ground-degeneracy entropy use its ground energy"]


def _require_square(spec: HubbardSpec, name: str) -> None:
    if spec.geometry is not Geometry.SQUARE_PBC:
        raise ValueError(f"{name} bound needs a Square2D-PBC instance, got {spec.geometry.value}")


def phenom_curve(spec: HubbardSpec, s_grid=None, beta_max: float = DEFAULT_BETA_MAX) -> BoundCurve:
    """Kinetic + on-site split: tight-binding modes and independent atoms."""
    _require_square(spec, "Phenom")
    s = _grid(s_grid)
    tb = TightBinding(ModeDispersion.for_spec(spec))
    atom = AtomicSite(spec.mu, spec.U)
    n = spec.n_sites
    e = np.empty_like(s)
    ground_tb = ground_at = 0
    for k, sk in enumerate(s):
        S_total = sk * spec.n_qubits
        m_tb = matched_energy(tb, S_total, beta_max)
        m_at = matched_energy(atom, S_total / n, beta_max)
        ground_tb += m_tb.at_ground
        ground_at += m_at.at_ground
        e[k] = (m_tb.energy + n * m_at.energy) / n
    notes = _plateau_note("tight-binding", ground_tb) + _plateau_note("atomic", ground_at)
    return BoundCurve(BoundKind.PHENOM, s, e, True, _provenance(spec, s, beta_max), notes)


def ring_spec(spec: HubbardSpec) -> HubbardSpec:
    return HubbardSpec(spec.L, Geometry.RING, spec.t, spec.U / 2, spec.mu / 2, spec.l2_pbc_multiedge)


def plaquette_spec(spec: HubbardSpec) -> HubbardSpec:
    return HubbardSpec(2, Geometry.PLAQUETTE, spec.t, spec.U / 2, spec.mu / 2, spec.l2_pbc_multiedge)


def _fragment_curve(spectrum: SpectrumSet, s: np.ndarray, beta_max: float):
    """Per-site energy of an entropy-matched fragment Gibbs state."""
    e = np.empty_like(s)
    at_ground = 0
    for k, sk in enumerate(s):
        m = matched_energy(spectrum, sk * spectrum.n_qubits, beta_max)
        at_ground += m.at_ground
        e[k] = m.energy / spectrum.n_sites
    return e, at_ground


def onedim_curve(
    spec: HubbardSpec, s_grid=None, beta_max: float = DEFAULT_BETA_MAX, workers: int = 1
) -> BoundCurve:
    """Horizontal + vertical split into ``2L`` Hubbard rings at ``(U/2, mu/2)``.

    Each ring carries ``1/L`` of the total entropy, so the per-qubit entropy
    density is shared; the energy per lattice site is twice the ring's.
    """
    _require_square(spec, "One-dim")
    if spec.L > ONEDIM_MAX_L:
        raise UnsupportedSizeError(
            f"One-dim bound needs full diagonalization of a {spec.L}-site ring "
            f"(dimension {4 ** spec.L}); supported up to L = {ONEDIM_MAX_L}"
        )
    s = _grid(s_grid)
    ring = ring_spec(spec)
    spectrum = hubbard_spectrum(ring, max_sites=ONEDIM_MAX_L, workers=workers)
    e_ring, at_ground = _fragment_curve(spectrum, s, beta_max)
    return BoundCurve(
        BoundKind.ONEDIM, s, 2.0 * e_ring, True,
        _provenance(spec, s, beta_max, fragment=ring.as_dict()),
        _plateau_note("ring", at_ground),
    )


def plaquette_valid(spec: HubbardSpec) -> bool:
    return spec.geometry is Geometry.SQUARE_PBC and spec.L % 2 == 0 and spec.L >= 4


def plaquette_curve(spec: HubbardSpec, s_grid=None, beta_max: float = DEFAULT_BETA_MAX) -> BoundCurve:
    """Even/odd tilings by disjoint 2x2 open plaquettes at ``(U/2, mu/2)``.

    Depends on ``(t, U, mu)`` only.  Flagged invalid unless ``L`` is even
    and at least 4.
    """
    s = _grid(s_grid)
    plaq = plaquette_spec(spec)
    spectrum = hubbard_spectrum(plaq)
    e_plaq, at_ground = _fragment_curve(spectrum, s, beta_max)
    # per plaquette site -> per lattice site: factor 2 (two tilings)
    valid = plaquette_valid(spec)
    notes = _plateau_note("plaquette", at_ground)
    if not valid:
        notes.append("Plaq is a proper lower bound only for Square2D-PBC with even L >= 4")
    return BoundCurve(
        BoundKind.PLAQ, s, 2.0 * e_plaq, valid,
        _provenance(spec, s, beta_max, fragment=plaq.as_dict()),
        notes,
    )


def exact_boundary(
    spec: HubbardSpec,
    s_grid=None,
    beta_max: float = DEFAULT_BETA_MAX,
    max_sites: int = EXACT_MAX_SITES,
    workers: int = 1,
) -> BoundCurve:
    """Exact Gibbs boundary from the full spectrum, sampled on ``s_grid``."""
    if spec.n_sites > max_sites:
        raise UnsupportedSizeError(
            f"exact boundary needs the full 4^{spec.n_sites}-dimensional spectrum; "
            f"capped at {max_sites} sites"
        )
    s = _grid(s_grid)
    spectrum = hubbard_spectrum(spec, max_sites=max_sites, workers=workers)
    e, at_ground = _fragment_curve(spectrum, s, beta_max)
    return BoundCurve(
        BoundKind.EXACT, s, e, True, _provenance(spec, s, beta_max), _plateau_note("exact", at_ground)
    )


def combine_curves(curves: Sequence[BoundCurve], s_grid=None) -> BoundCurve:
    """Pointwise maximum of the valid curves' linear interpolants."""
    valid = [c for c in curves if c.valid]
    if not valid:
        raise ValueError("no valid bound curve to combine")
    lo = max(c.s_range[0] for c in valid)
    hi = min(c.s_range[1] for c in valid)
    if lo > hi:
        raise ValueError("bound curves have no common entropy range")
    s = valid[0].s if s_grid is None else np.asarray(s_grid, dtype=float)
    s = s[(s >= lo) & (s <= hi)]
    if s.size == 0:
        raise ValueError("s grid does not meet the common entropy range")
    stack = np.vstack([c.interp(s) for c in valid])
    e = stack.max(axis=0)
    winners = [valid[i].kind.value for i in np.argmax(stack, axis=0)]
    prov = {
        "inputs": [c.kind.value for c in valid],
        "best": winners,
        "s_grid": {"min": float(s[0]), "max": float(s[-1]), "points": int(s.size)},
        "version": __version__,
    }
    if "spec" in valid[0].provenance:
        prov["spec"] = valid[0].provenance["spec"]
    return BoundCurve(BoundKind.COMBINATION, s, e, True, prov)


def compute_curve(
    kind: "BoundKind | str", spec: HubbardSpec, s_grid=None, beta_max: float = DEFAULT_BETA_MAX, workers: int = 1
) -> BoundCurve:
    kind = BoundKind(kind)
    if kind is BoundKind.PHENOM:
        return phenom_curve(spec, s_grid, beta_max)
    if kind is BoundKind.ONEDIM:
        return onedim_curve(spec, s_grid, beta_max, workers)
    if kind is BoundKind.PLAQ:
        return plaquette_curve(spec, s_grid, beta_max)
    if kind is BoundKind.EXACT:
        return exact_boundary(spec, s_grid, beta_max, workers=workers)
    raise ValueError(f"{kind.value} is not a primary curve kind")
