"""Square-lattice Fermi-Hubbard Hamiltonians in the occupation-number basis.

Orbitals are ordered spin-up first (``0 .. n_sites-1``) then spin-down
(``n_sites .. 2*n_sites-1``).  Sites of a square lattice are indexed
column-major: site ``(x, y)`` (column ``x``, row ``y`` counted downwards from
the upper-left corner) has index ``x * L + y``.  With this ordering a set of
disjoint columns or plaquettes carries no fermionic cross-signs.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Iterator

import numpy as np

DEFAULT_MAX_SITES = 8


class Geometry(str, enum.Enum):
    SQUARE_PBC = "square2d-pbc"
    RING = "ring1d"
    PLAQUETTE = "plaquette2x2-obc"

    @classmethod
    def parse(cls, value: "str | Geometry") -> "Geometry":
        if isinstance(value, Geometry):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "square": cls.SQUARE_PBC,
            "square2d": cls.SQUARE_PBC,
            "square2d-pbc": cls.SQUARE_PBC,
            "ring": cls.RING,
            "ring1d": cls.RING,
            "plaquette": cls.PLAQUETTE,
            "plaquette2x2": cls.PLAQUETTE,
            "plaquette2x2-obc": cls.PLAQUETTE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown geometry {value!r}") from None


class SpectrumSizeError(ValueError):
    """Raised when a full-spectrum request exceeds the configured memory cap."""


@dataclass(frozen=True)
class HubbardSpec:
    """One Fermi-Hubbard problem instance (energies in units of ``t``)."""

    L: int
    geometry: Geometry = Geometry.SQUARE_PBC
    t: float = 1.0
    U: float = 0.0
    mu: float = 0.0
    # For L == 2 the periodic wrap coincides with the direct bond; keep both
    # (effective hopping 2t) unless switched off.
    l2_pbc_multiedge: bool = True

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry.parse(self.geometry))
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        object.__setattr__(self, "L", int(self.L))
        if self.geometry is Geometry.PLAQUETTE and self.L != 2:
            raise ValueError("Plaquette2x2-OBC geometry requires L = 2")
        if self.U < 0:
            raise ValueError(f"U must be non-negative, got {self.U}")
        for name in ("t", "U", "mu"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def n_sites(self) -> int:
        if self.geometry is Geometry.SQUARE_PBC:
            return self.L * self.L
        if self.geometry is Geometry.RING:
            return self.L
        return 4

    @property
    def n_qubits(self) -> int:
        return 2 * self.n_sites

    def replace(self, **changes) -> "HubbardSpec":
        fields = dict(
            L=self.L, geometry=self.geometry, t=self.t, U=self.U, mu=self.mu,
            l2_pbc_multiedge=self.l2_pbc_multiedge,
        )
        fields.update(changes)
        return HubbardSpec(**fields)

    def as_dict(self) -> dict:
        return {
            "L": self.L,
            "geometry": self.geometry.value,
            "t": float(self.t),
            "U": float(self.U),
            "mu": float(self.mu),
            "l2_pbc_multiedge": bool(self.l2_pbc_multiedge),
        }


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    multiplicity: int
    kind: str


@dataclass(frozen=True)
class EdgeList:
    edges: tuple[Edge, ...]
    tally: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        """Number of distinct per-spin edges."""
        return len(self.edges)

    def pairs(self) -> list[tuple[int, int, int]]:
        return [(e.i, e.j, e.multiplicity) for e in self.edges]


def _raw_edges(spec: HubbardSpec) -> list[tuple[int, int, str]]:
    L = spec.L
    raw = []
    if spec.geometry is Geometry.RING:
        for i in range(L - 1):
            raw.append((i, i + 1, "chain"))
        raw.append((L - 1, 0, "chain_pbc"))
        return raw

    def idx(x, y):
        return x * L + y

    periodic = spec.geometry is Geometry.SQUARE_PBC
    for x in range(L):
        for y in range(L - 1):
            raw.append((idx(x, y), idx(x, y + 1), "vertical"))
    for x in range(L - 1):
        for y in range(L):
            raw.append((idx(x, y), idx(x + 1, y), "horizontal"))
    if periodic:
        for x in range(L):
            raw.append((idx(x, L - 1), idx(x, 0), "vertical_pbc"))
        for y in range(L):
            raw.append((idx(L - 1, y), idx(0, y), "horizontal_pbc"))
    return raw


def build_edges(spec: HubbardSpec) -> EdgeList:
    """Nearest-neighbour bonds of ``spec`` (one spin species).

    Coinciding bonds (only possible for ``L == 2`` with periodic wraps) are
    merged into one entry whose multiplicity counts the wraps, or collapsed
    to multiplicity 1 when ``spec.l2_pbc_multiedge`` is false.  Self-loops
    from ``L == 1`` wraps are discarded.  ``tally`` counts bonds by type
    before merging.
    """
    raw = _raw_edges(spec)
    tally = Counter(kind for i, j, kind in raw if i != j)
    merged: dict[tuple[int, int], list] = {}
    for i, j, kind in raw:
        if i == j:
            continue
        key = (min(i, j), max(i, j))
        if key in merged:
            if spec.l2_pbc_multiedge:
                merged[key][0] += 1
        else:
            merged[key] = [1, kind]
    edges = tuple(Edge(i, j, m, kind) for (i, j), (m, kind) in merged.items())
    return EdgeList(edges=edges, tally=dict(tally))


def hopping_matrix(spec: HubbardSpec) -> np.ndarray:
    """Single-particle hopping matrix ``-t * A`` (A: weighted adjacency)."""
    n = spec.n_sites
    h = np.zeros((n, n))
    for e in build_edges(spec).edges:
        h[e.i, e.j] -= spec.t * e.multiplicity
        h[e.j, e.i] -= spec.t * e.multiplicity
    return h


@dataclass
class SectorBlock:
    n_up: int
    n_down: int
    basis: np.ndarray  # full occupation bitstrings, up bits low, down bits high
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@lru_cache(maxsize=None)
def fixed_number_states(n_orbitals: int, n_particles: int) -> np.ndarray:
    """Ascending bitmasks of ``n_orbitals`` bits with ``n_particles`` set."""
    masks = [sum(1 << k for k in occ) for occ in combinations(range(n_orbitals), n_particles)]
    return np.array(sorted(masks), dtype=np.int64)


def _popcount(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    count = np.zeros(a.shape, dtype=np.int64)
    while np.any(a):
        count += a & 1
        a = a >> 1
    return count


def species_hopping(n_sites: int, n_particles: int, edges, t: float) -> np.ndarray:
    """Hopping operator of one spin species restricted to ``n_particles``.

    ``edges`` is an iterable of ``(i, j, multiplicity)``.  The Jordan-Wigner
    sign of ``c_i^dag c_j`` is the parity of occupied orbitals strictly
    between ``i`` and ``j``.
    """
    states = fixed_number_states(n_sites, n_particles)
    index = {int(s): k for k, s in enumerate(states)}
    dim = len(states)
    h = np.zeros((dim, dim))
    for col, state in enumerate(states):
        state = int(state)
        for i, j, mult in edges:
            for a, b in ((i, j), (j, i)):
                # c_a^dag c_b
                if not (state >> b) & 1 or (state >> a) & 1:
                    continue
                lo, hi = min(a, b), max(a, b)
                between = (state >> (lo + 1)) & ((1 << (hi - lo - 1)) - 1)
                sign = -1.0 if bin(between).count("1") & 1 else 1.0
                new = state ^ (1 << a) ^ (1 << b)
                h[index[new], col] += -t * mult * sign
    return h


def sector_dims(n_sites: int) -> dict[tuple[int, int], int]:
    return {
        (a, b): comb(n_sites, a) * comb(n_sites, b)
        for a in range(n_sites + 1)
        for b in range(n_sites + 1)
    }


def check_size(spec: HubbardSpec, max_sites: int = DEFAULT_MAX_SITES) -> None:
    if spec.n_sites > max_sites:
        raise SpectrumSizeError(
            f"full spectrum of {spec.n_sites} sites has dimension 4^{spec.n_sites} = "
            f"{4 ** spec.n_sites}, above the cap of {max_sites} sites "
            f"(dimension {4 ** max_sites})"
        )


def sector_block(spec: HubbardSpec, n_up: int, n_down: int, edges=None) -> SectorBlock:
    """Dense Hamiltonian block with fixed ``(n_up, n_down)``.

    Basis ordering is ``up_index * dim_down + down_index``.
    """
    n = spec.n_sites
    if edges is None:
        edges = build_edges(spec).pairs()
    ups = fixed_number_states(n, n_up)
    downs = fixed_number_states(n, n_down)
    t_up = species_hopping(n, n_up, edges, spec.t)
    t_dn = t_up if n_down == n_up else species_hopping(n, n_down, edges, spec.t)
    h = np.kron(t_up, np.eye(len(downs))) + np.kron(np.eye(len(ups)), t_dn)
    doubles = _popcount(ups[:, None] & downs[None, :]).ravel()
    diag = -spec.mu * (n_up + n_down) + spec.U * doubles
    h[np.diag_indices_from(h)] += diag
    basis = (ups[:, None] | (downs[None, :] << n)).ravel()
    return SectorBlock(n_up=n_up, n_down=n_down, basis=basis, matrix=h)


def iter_sector_blocks(
    spec: HubbardSpec, max_sites: int = DEFAULT_MAX_SITES, sectors=None
) -> Iterator[SectorBlock]:
    check_size(spec, max_sites)
    edges = build_edges(spec).pairs()
    if sectors is None:
        sectors = sector_dims(spec.n_sites)
    for n_up, n_down in sectors:
        yield sector_block(spec, n_up, n_down, edges)


def build_sector_blocks(spec: HubbardSpec, max_sites: int = DEFAULT_MAX_SITES) -> list[SectorBlock]:
    """All ``(n_up, n_down)`` blocks of the Hamiltonian of ``spec``."""
    return list(iter_sector_blocks(spec, max_sites))
