"""Independent reference implementations used only by the tests.

The Fock-space Hamiltonian here is assembled from explicit Jordan-Wigner
matrices on the full 2^n_orbitals space; it shares no code with the
sector-block construction in the package.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

_Z = np.diag([1.0, -1.0])
_I = np.eye(2)
_A = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|: removes a particle


def annihilators(n_orb: int) -> list[np.ndarray]:
    ops = []
    for k in range(n_orb):
        factors = [_Z] * k + [_A] + [_I] * (n_orb - k - 1)
        ops.append(reduce(np.kron, factors))
    return ops


def square_bonds(L: int, periodic: bool, multiedge: bool = True) -> dict:
    """Bond weights on an L x L grid, built by walking +x and +y from each site."""
    w: dict = {}
    for x in range(L):
        for y in range(L):
            a = x * L + y
            for dx, dy in ((1, 0), (0, 1)):
                nx, ny = x + dx, y + dy
                if not periodic and (nx >= L or ny >= L):
                    continue
                b = (nx % L) * L + (ny % L)
                if a == b:
                    continue
                key = (min(a, b), max(a, b))
                w[key] = w.get(key, 0) + 1 if multiedge else 1
    return w


def ring_bonds(L: int) -> dict:
    w: dict = {}
    for a in range(L):
        b = (a + 1) % L
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        w[key] = w.get(key, 0) + 1
    return w


def fock_hamiltonian(n_sites: int, bonds: dict, t: float, U: float, mu: float) -> np.ndarray:
    c = annihilators(2 * n_sites)
    dim = 2 ** (2 * n_sites)
    H = np.zeros((dim, dim))
    for (i, j), m in bonds.items():
        for off in (0, n_sites):
            hop = c[i + off].T @ c[j + off]
            H -= t * m * (hop + hop.T)
    for i in range(n_sites):
        nu = c[i].T @ c[i]
        nd = c[i + n_sites].T @ c[i + n_sites]
        H += U * nu @ nd - mu * (nu + nd)
    return H


def fock_spectrum(n_sites, bonds, t, U, mu) -> np.ndarray:
    return np.linalg.eigvalsh(fock_hamiltonian(n_sites, bonds, t, U, mu))


def thermo_bits(eigs, beta):
    """(E, S_bits) by direct Boltzmann sums, in mpmath for safety."""
    import mpmath

    with mpmath.workdps(40):
        e0 = min(eigs)
        w = [mpmath.exp(-beta * (mpmath.mpf(float(v)) - e0)) for v in eigs]
        z = mpmath.fsum(w)
        p = [x / z for x in w]
        E = mpmath.fsum(pk * mpmath.mpf(float(v)) for pk, v in zip(p, eigs))
        S = -mpmath.fsum(pk * mpmath.log(pk) for pk in p if pk > 0) / mpmath.log(2)
        return float(E), float(S)


def boundary_energy(eigs, S_bits):
    """Gibbs energy at entropy S_bits via mpmath bisection on beta."""
    import mpmath

    lo, hi = 0.0, 1.0
    while thermo_bits(eigs, hi)[1] > S_bits:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if thermo_bits(eigs, mid)[1] > S_bits:
            lo = mid
        else:
            hi = mid
    return thermo_bits(eigs, 0.5 * (lo + hi))[0]
