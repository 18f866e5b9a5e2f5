"""Entropy accumulation under global depolarizing noise and circuit budgets.

A circuit of ``N2`` two-qubit gates with depolarizing probability ``p2``
leaves ``n`` qubits with purity
``(1 - 2^-n) ((1 - p2)^(2 N2) - 1) + 1``; its Renyi-2 entropy per qubit is
compared against an entropy-density threshold ``s_th``.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

UNBOUNDED = math.inf


class AnsatzFamily(str, enum.Enum):
    HVA = "hva"
    LDCA = "ldca"


class LdcaCount(str, enum.Enum):
    EXACT = "exact"
    PAPER = "paper"


@dataclass(frozen=True)
class NoiseBudget:
    n: int
    p2: float
    s_th: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < self.p2 < 1:
            raise ValueError(f"p2 must lie in (0, 1), got {self.p2}")
        if not 0 < self.s_th <= 1:
            raise ValueError(f"s_th must lie in (0, 1], got {self.s_th}")

    @property
    def c(self) -> float:
        return 1.0 - self.s_th

    def with_p2(self, p2: float) -> "NoiseBudget":
        return NoiseBudget(self.n, p2, self.s_th)


@dataclass(frozen=True)
class AnsatzSpec:
    family: AnsatzFamily
    L: int

    def __post_init__(self):
        object.__setattr__(self, "family", AnsatzFamily(self.family))
        if self.L < 2:
            raise ValueError("ansatz counts need L >= 2")

    @property
    def n(self) -> int:
        return 2 * self.L * self.L


def _check_p2(p2: float) -> None:
    if not 0 < p2 < 1:
        raise ValueError(f"p2 must lie in (0, 1), got {p2}")


def renyi2_density(n: int, N2: float, p2: float) -> float:
    """Renyi-2 entropy per qubit (bits) after ``N2`` noisy two-qubit gates."""
    _check_p2(p2)
    if N2 < 0:
        raise ValueError("N2 must be non-negative")
    if N2 == 0:
        return 0.0
    # purity = 2^-n + (1 - 2^-n) (1 - p2)^(2 N2), in log space
    log_mixed = -n * math.log(2.0)
    log_coherent = math.log1p(-(2.0 ** -n)) + 2.0 * N2 * math.log1p(-p2)
    log_purity = np.logaddexp(log_mixed, log_coherent)
    return float(-log_purity / (n * math.log(2.0)))


def _log_pow2_minus_one(x: float) -> float:
    """``ln(2^x - 1)`` for ``x > 0`` without overflow."""
    y = x * math.log(2.0)
    if y < 30:
        return math.log(math.expm1(y))
    return y + math.log1p(-math.exp(-y))


def cnot_bound(budget: NoiseBudget) -> float:
    """Real-valued right-hand side of ``N2 <= ln((2^{nc}-1)/(2^n-1)) / (2 ln(1-p2))``."""
    n, c = budget.n, budget.c
    if c <= 0:
        return UNBOUNDED
    num = _log_pow2_minus_one(n * c) - _log_pow2_minus_one(n)
    return num / (2.0 * math.log1p(-budget.p2))


def max_cnot_count(budget: NoiseBudget) -> int | float:
    """Largest CNOT count keeping the Renyi-2 density at or below ``s_th``.

    Returns ``UNBOUNDED`` (``math.inf``) when ``s_th = 1``.
    """
    bound = cnot_bound(budget)
    if math.isinf(bound):
        return UNBOUNDED
    N2 = max(int(math.floor(bound)), 0)
    # floor of a float can land one off an exactly-integral boundary
    while renyi2_density(budget.n, N2 + 1, budget.p2) <= budget.s_th:
        N2 += 1
    while N2 > 0 and renyi2_density(budget.n, N2, budget.p2) > budget.s_th:
        N2 -= 1
    return N2


def hva_counts(L: int) -> tuple[int, int]:
    """CNOTs for HVA reference-state preparation and for one layer."""
    if L < 2:
        raise ValueError("L must be >= 2")
    prep = 8 * L**2 * (2 * L**2 - 1)
    layer = 2 * L * (3 * L**3 + 12 * L**2 - 10 * L - 6)
    return prep, layer


def hopping_cnot_cost(distance: int) -> int:
    """SWAP network plus one XX+YY rotation between qubits ``distance`` apart."""
    return 6 * distance - 4


def hva_enumerated_counts(L: int) -> dict:
    """Per-layer HVA CNOT count by enumerating Jordan-Wigner terms.

    Uses the column-major site order with spin-up qubits first.  Reported
    next to :func:`hva_counts`; the two do not agree in general.
    """
    from .lattice import HubbardSpec, build_edges

    edges = build_edges(HubbardSpec(L, "square2d-pbc", l2_pbc_multiedge=False))
    by_kind: dict[str, int] = {}
    hopping = 0
    for e in edges.edges:
        cost = hopping_cnot_cost(abs(e.i - e.j))
        by_kind[e.kind] = by_kind.get(e.kind, 0) + 2 * cost
        hopping += 2 * cost  # both spin species
    dens = L**2 * hopping_cnot_cost(L**2)
    return {
        "hopping": hopping,
        "density_density": dens,
        "layer": hopping + dens,
        "hopping_by_kind": by_kind,
    }


def ldca_counts(L: int, exact: bool = False) -> int:
    """CNOTs per LDCA cycle: ``5 N (N-1)`` exactly, ``5 N^2 = 20 L^4`` in the large-N form."""
    if L < 2:
        raise ValueError("L must be >= 2")
    N = 2 * L * L
    return 5 * N * (N - 1) if exact else 20 * L**4


def max_layers(
    ansatz: AnsatzSpec, budget: NoiseBudget, ldca_count: LdcaCount | str = LdcaCount.PAPER
) -> int | float:
    if ansatz.n != budget.n:
        raise ValueError(f"ansatz acts on {ansatz.n} qubits, budget is for {budget.n}")
    n2 = max_cnot_count(budget)
    if ansatz.family is AnsatzFamily.HVA:
        prep, layer = hva_counts(ansatz.L)
        if math.isinf(n2):
            return UNBOUNDED
        return max((n2 - prep) // layer, 0)
    layer = ldca_counts(ansatz.L, exact=LdcaCount(ldca_count) is LdcaCount.EXACT)
    if math.isinf(n2):
        return UNBOUNDED
    return n2 // layer


@dataclass(frozen=True)
class SweepRow:
    p2: float
    n2_max: int | float
    hva_layers: int | float
    ldca_layers: int | float
    hva_ref_line: int


def p2_grid(p2_min: float, p2_max: float, points: int) -> np.ndarray:
    """Log-spaced grid, each value rounded to 6 significant digits."""
    if not (0 < p2_min <= p2_max < 1):
        raise ValueError("p2 range must satisfy 0 < p2_min <= p2_max < 1")
    if points < 1:
        raise ValueError("need at least one sweep point")
    grid = np.logspace(math.log10(p2_min), math.log10(p2_max), points)
    return np.array([float(format(p, ".6g")) for p in grid])


def p2_sweep(
    L: int,
    s_th: float,
    p2_values: Iterable[float],
    ldca_count: LdcaCount | str = LdcaCount.PAPER,
) -> list[SweepRow]:
    """Layer budgets of both ansatz families across ``p2_values``.

    ``hva_ref_line`` is the ``L^2`` layer count expected to be needed.
    """
    rows = []
    hva = AnsatzSpec(AnsatzFamily.HVA, L)
    ldca = AnsatzSpec(AnsatzFamily.LDCA, L)
    for p2 in p2_values:
        budget = NoiseBudget(hva.n, float(p2), s_th)
        rows.append(
            SweepRow(
                p2=float(p2),
                n2_max=max_cnot_count(budget),
                hva_layers=max_layers(hva, budget),
                ldca_layers=max_layers(ldca, budget, ldca_count),
                hva_ref_line=L * L,
            )
        )
    return rows


def critical_p2(
    ansatz: AnsatzSpec,
    s_th: float,
    target_layers: int,
    p2_lo: float = 1e-8,
    p2_hi: float = 0.5,
    ldca_count: LdcaCount | str = LdcaCount.PAPER,
    rel_tol: float = 1e-6,
) -> float:
    """Largest ``p2`` at which ``ansatz`` still affords ``target_layers``.

    Bisection in ``log p2`` on the nonincreasing map ``p2 -> max_layers``.
    """

    def enough(p2):
        return max_layers(ansatz, NoiseBudget(ansatz.n, p2, s_th), ldca_count) >= target_layers

    if not enough(p2_lo):
        raise ValueError(f"{target_layers} layers unreachable even at p2 = {p2_lo:g}")
    if enough(p2_hi):
        return p2_hi
    lo, hi = math.log(p2_lo), math.log(p2_hi)
    while hi - lo > rel_tol:
        mid = 0.5 * (lo + hi)
        if enough(math.exp(mid)):
            lo = mid
        else:
            hi = mid
    return math.exp(lo)


SWEEP_HEADER = "p2,hva_layers,ldca_layers,hva_ref_line"


def _fmt_count(v) -> str:
    return "inf" if isinstance(v, float) and math.isinf(v) else str(int(v))


def sweep_csv_lines(rows: Sequence[SweepRow]) -> list[str]:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(
            f"{format(r.p2, '.6g')},{_fmt_count(r.hva_layers)},{_fmt_count(r.ldca_layers)},{r.hva_ref_line}"
        )
    return lines


def write_sweep_csv(rows: Sequence[SweepRow], path: str | os.PathLike, schema_line: str | None = None) -> None:
    lines = sweep_csv_lines(rows)
    if schema_line:
        lines.insert(0, schema_line)
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
