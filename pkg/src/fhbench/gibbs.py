"""Full-spectrum Gibbs-state thermodynamics.

Internally every entropy is in nats; everything returned to callers is in
bits.  Partition sums are shifted by the ground energy, so any finite
``beta >= 0`` is safe.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .lattice import (
    DEFAULT_MAX_SITES,
    HubbardSpec,
    SectorBlock,
    check_size,
    sector_block,
    build_edges,
    sector_dims,
)

log = logging.getLogger(__name__)

LN2 = np.log(2.0)
LOG2E = 1.0 / LN2

DEFAULT_BETA_MAX = 200.0
DEFAULT_BETA_POINTS = 400
BETA_MIN = 1e-4
# Targets this close (bits) to the ground-degeneracy entropy count as the plateau.
PLATEAU_TOL_BITS = 1e-6
RESIDUAL_RTOL = 1e-8


class EntropyRangeError(ValueError):
    def __init__(self, message: str, plateau: float, maximum: float):
        super().__init__(message)
        self.plateau = plateau
        self.maximum = maximum


@dataclass(frozen=True)
class SpectrumSet:
    """Sorted eigenvalue multiset of a Hamiltonian on ``n_qubits`` modes."""

    eigenvalues: np.ndarray
    n_qubits: int
    sectors: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        values = np.sort(np.asarray(self.eigenvalues, dtype=float).ravel())
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite eigenvalue")
        object.__setattr__(self, "eigenvalues", values)

    @classmethod
    def from_values(cls, values: Sequence[float], n_qubits: int | None = None) -> "SpectrumSet":
        values = np.asarray(values, dtype=float)
        if n_qubits is None:
            n_qubits = int(round(np.log2(len(values))))
        return cls(values, n_qubits)

    @property
    def total_dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def n_sites(self) -> float:
        return self.n_qubits / 2

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def degeneracy_tol(self) -> float:
        scale = max(1.0, float(np.max(np.abs(self.eigenvalues))))
        return 1e-9 * scale

    @property
    def degeneracy_of_min(self) -> int:
        gap = self.eigenvalues - self.eigenvalues[0]
        return int(np.count_nonzero(gap <= self.degeneracy_tol))

    # Duck-typed thermal-model interface shared with the closed-form models.
    @property
    def max_entropy(self) -> float:
        return float(np.log2(self.total_dim))

    @property
    def plateau_entropy(self) -> float:
        return float(np.log2(self.degeneracy_of_min))

    def energy_entropy(self, beta: float) -> tuple[float, float]:
        _, energy, s_nats = _thermo(self.eigenvalues, beta)
        return energy, s_nats * LOG2E

    def entropy_bits(self, beta: float) -> float:
        return _thermo(self.eigenvalues, beta)[2] * LOG2E


def _thermo(eigs: np.ndarray, beta: float) -> tuple[float, float, float]:
    """Return ``(ln Z, E, S_nats)`` at inverse temperature ``beta``."""
    e0 = eigs[0]
    x = eigs - e0
    w = np.exp(-beta * x)
    z_shift = w.sum()
    excess = float(np.dot(x, w) / z_shift)
    log_z_shift = float(np.log(z_shift))
    return -beta * e0 + log_z_shift, e0 + excess, beta * excess + log_z_shift


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not np.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")
    if beta < 0:
        raise ValueError("negative beta is not supported")
    return beta


def _diag_block(block: SectorBlock) -> np.ndarray:
    m = block.matrix
    if not np.all(np.isfinite(m)):
        raise ValueError(f"non-finite entries in sector ({block.n_up}, {block.n_down})")
    if m.shape[0] == 1:
        return m.diagonal().copy()
    vals, vecs = scipy.linalg.eigh(m)
    # spot-check one eigenpair
    k = int(np.argmin(vals))
    resid = np.linalg.norm(m @ vecs[:, k] - vals[k] * vecs[:, k])
    norm = max(1.0, float(np.abs(vals).max()))
    if resid > RESIDUAL_RTOL * norm:
        raise ArithmeticError(
            f"eigen-residual {resid:.3e} too large in sector ({block.n_up}, {block.n_down})"
        )
    return vals


def diagonalize(blocks: Sequence[SectorBlock], n_qubits: int | None = None, workers: int = 1) -> SpectrumSet:
    """Union of the eigenvalues of every sector block."""
    blocks = list(blocks)
    if not blocks:
        raise ValueError("no sector blocks given")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_diag_block, blocks))
    else:
        values = [_diag_block(b) for b in blocks]
    sectors = {(b.n_up, b.n_down): np.sort(v) for b, v in zip(blocks, values)}
    if n_qubits is None:
        n_qubits = int(round(np.log2(sum(b.dim for b in blocks))))
    return SpectrumSet(np.concatenate(values), n_qubits, sectors)


def hubbard_spectrum(
    spec: HubbardSpec,
    max_sites: int = DEFAULT_MAX_SITES,
    workers: int = 1,
    use_cache: bool = True,
) -> SpectrumSet:
    """Full spectrum of ``spec``, using spin-flip symmetry of the sectors.

    Sector ``(a, b)`` is isospectral to ``(b, a)``, so only ``a <= b`` is
    diagonalized.  Results are read from / written to the spectrum cache
    when ``FHBENCH_CACHE_DIR`` is set.
    """
    from . import cache

    check_size(spec, max_sites)
    if use_cache:
        cached = cache.load_spectrum(spec)
        if cached is not None:
            return cached
    edges = build_edges(spec).pairs()
    keys = [(a, b) for a, b in sector_dims(spec.n_sites) if a <= b]

    def work(key):
        return _diag_block(sector_block(spec, key[0], key[1], edges))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(work, keys))
    else:
        values = [work(k) for k in keys]
    sectors = {}
    for (a, b), v in zip(keys, values):
        v = np.sort(v)
        sectors[(a, b)] = v
        if a != b:
            sectors[(b, a)] = v
    spectrum = SpectrumSet(np.concatenate(list(sectors.values())), spec.n_qubits, sectors)
    if use_cache:
        cache.store_spectrum(spec, spectrum)
    return spectrum


@dataclass(frozen=True)
class GibbsPoint:
    beta: float
    E: float
    S: float  # bits
    e: float  # E per site
    s: float  # S per qubit, bits
    log_Z: float  # nats


def gibbs_point(spectrum: SpectrumSet, beta: float) -> GibbsPoint:
    beta = _check_beta(beta)
    log_z, energy, s_nats = _thermo(spectrum.eigenvalues, beta)
    s_bits = s_nats * LOG2E
    return GibbsPoint(
        beta=beta,
        E=energy,
        S=s_bits,
        e=energy / spectrum.n_sites,
        s=s_bits / spectrum.n_qubits,
        log_Z=log_z,
    )


def default_beta_grid(beta_max: float = DEFAULT_BETA_MAX, points: int = DEFAULT_BETA_POINTS) -> np.ndarray:
    """``beta = 0`` followed by ``points`` log-spaced values on ``[1e-4, beta_max]``."""
    return np.concatenate([[0.0], np.logspace(np.log10(BETA_MIN), np.log10(beta_max), points)])


@dataclass(frozen=True)
class GibbsCurve:
    points: tuple[GibbsPoint, ...]
    n_qubits: int

    @property
    def s(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def e(self) -> np.ndarray:
        return np.array([p.e for p in self.points])


def gibbs_curve(spectrum: SpectrumSet, beta_grid: Sequence[float] | None = None) -> GibbsCurve:
    """Gibbs points on ``beta_grid`` ordered by entropy density.

    Points sharing an entropy density keep only the lowest energy.
    """
    if beta_grid is None:
        beta_grid = default_beta_grid()
    beta_grid = np.asarray(beta_grid, dtype=float)
    if beta_grid.size == 0:
        raise ValueError("empty beta grid")
    pts = sorted((gibbs_point(spectrum, b) for b in beta_grid), key=lambda p: (p.s, p.e))
    kept: list[GibbsPoint] = []
    for p in pts:
        if kept and abs(p.s - kept[-1].s) <= 1e-12:
            continue
        kept.append(p)
    return GibbsCurve(tuple(kept), spectrum.n_qubits)


class BetaSolution(NamedTuple):
    beta: float
    saturated: bool


def solve_beta_for_entropy(model, S_target: float, beta_max: float = DEFAULT_BETA_MAX) -> BetaSolution:
    """Invert the monotone map ``beta -> S(beta)`` of any thermal model.

    ``model`` provides ``entropy_bits(beta)``, ``max_entropy`` and
    ``plateau_entropy`` (bits).
    """
    s_max = model.max_entropy
    plateau = model.plateau_entropy
    slack = 1e-12 * max(1.0, s_max)
    if S_target > s_max + slack or S_target < plateau - PLATEAU_TOL_BITS:
        raise EntropyRangeError(
            f"entropy {S_target:.12g} bits outside reachable range "
            f"({plateau:.12g}, {s_max:.12g}]",
            plateau=plateau,
            maximum=s_max,
        )
    if S_target >= s_max - slack:
        return BetaSolution(0.0, False)
    if S_target <= plateau + PLATEAU_TOL_BITS:
        return BetaSolution(float(beta_max), True)
    if model.entropy_bits(beta_max) > S_target:
        return BetaSolution(float(beta_max), True)

    def f(b):
        return model.entropy_bits(b) - S_target

    beta = brentq(f, 0.0, beta_max, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return BetaSolution(float(beta), False)


def entropy_to_beta(spectrum: SpectrumSet, S_target: float, beta_max: float = DEFAULT_BETA_MAX) -> BetaSolution:
    """Inverse temperature whose Gibbs state has entropy ``S_target`` bits."""
    return solve_beta_for_entropy(spectrum, S_target, beta_max)


def tangent_envelope(spectrum: SpectrumSet, S: float, beta_grid: Sequence[float] | None = None) -> float:
    """Supremum over ``beta > 0`` of the tangent bound ``(S - ln Z) / beta``.

    ``S`` is in bits and converted to nats to match ``ln Z``.
    """
    if beta_grid is None:
        beta_grid = default_beta_grid()
    betas = np.asarray(beta_grid, dtype=float)
    betas = betas[betas > 0]
    if betas.size == 0:
        raise ValueError("beta grid has no positive entries")
    s_nats = S * LN2
    best = -np.inf
    for b in betas:
        log_z = _thermo(spectrum.eigenvalues, b)[0]
        best = max(best, (s_nats - log_z) / b)
    return float(best)


def thermo_identities_check(spectrum: SpectrumSet, beta: float, h: float | None = None) -> tuple[float, float]:
    """Finite-difference residuals of ``E = -d ln Z / d beta`` and
    ``beta dE/d beta = dS/d beta``.

    Evaluated in 50-digit arithmetic so that exponentially small entropy
    derivatives at low temperature are resolved.
    """
    import mpmath

    beta = _check_beta(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    if h is None:
        h = 1e-5 * max(1.0, beta)
    with mpmath.workdps(50):
        eigs = [mpmath.mpf(float(v)) for v in spectrum.eigenvalues]
        e0 = eigs[0]

        def thermo(b):
            b = mpmath.mpf(b)
            w = [mpmath.exp(-b * (v - e0)) for v in eigs]
            z = mpmath.fsum(w)
            energy = mpmath.fsum(v * wk for v, wk in zip(eigs, w)) / z
            log_z = -b * e0 + mpmath.log(z)
            return log_z, energy, b * energy + log_z

        b0 = mpmath.mpf(beta)
        hh = mpmath.mpf(h)
        lz_p, e_p, s_p = thermo(b0 + hh)
        lz_m, e_m, s_m = thermo(b0 - hh)
        _, energy, _ = thermo(b0)
        d_logz = (lz_p - lz_m) / (2 * hh)
        d_e = (e_p - e_m) / (2 * hh)
        d_s = (s_p - s_m) / (2 * hh)
        r1 = abs(energy + d_logz) / (abs(energy) + 1)
        r2 = abs(b0 * d_e - d_s) / (abs(d_s) + mpmath.mpf("1e-12"))
        return float(r1), float(r2)
