"""On-disk spectrum cache, enabled by ``FHBENCH_CACHE_DIR``.

File format: the header line ``fhbench-spectrum v1`` followed by one
eigenvalue per line (ascending, 17 significant digits).
"""

from __future__ import annotations

import hashlib
import logging
import os
from pathlib import Path

import numpy as np

from .lattice import HubbardSpec

log = logging.getLogger(__name__)

HEADER = "fhbench-spectrum v1"
ENV_VAR = "FHBENCH_CACHE_DIR"


def cache_key(spec: HubbardSpec) -> str:
    return (
        f"{spec.geometry.value}|L={spec.L}|t={float(spec.t)!r}|U={float(spec.U)!r}"
        f"|mu={float(spec.mu)!r}|multiedge={int(spec.l2_pbc_multiedge)}"
    )


def cache_path(spec: HubbardSpec, root: str | os.PathLike | None = None) -> Path | None:
    root = root if root is not None else os.environ.get(ENV_VAR)
    if not root:
        return None
    digest = hashlib.sha256(cache_key(spec).encode()).hexdigest()[:20]
    return Path(root) / f"{spec.geometry.value}_L{spec.L}_{digest}.spectrum"


def write_spectrum(path: str | os.PathLike, eigenvalues) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [HEADER] + [format(float(v), ".17g") for v in np.sort(eigenvalues)]
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    tmp.replace(path)


def read_spectrum(path: str | os.PathLike) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        if header != HEADER:
            raise ValueError(f"{path}: expected header {HEADER!r}, found {header!r}")
        return np.array([float(line) for line in fh if line.strip()])


def load_spectrum(spec: HubbardSpec):
    from .gibbs import SpectrumSet

    path = cache_path(spec)
    if path is None or not path.exists():
        return None
    values = read_spectrum(path)
    if len(values) != 4 ** spec.n_sites:
        log.warning("ignoring cache file %s with %d eigenvalues", path, len(values))
        return None
    log.debug("spectrum cache hit: %s", path)
    return SpectrumSet(values, spec.n_qubits)


def store_spectrum(spec: HubbardSpec, spectrum) -> None:
    path = cache_path(spec)
    if path is None:
        return
    try:
        write_spectrum(path, spectrum.eigenvalues)
    except OSError as exc:
        log.warning("could not write spectrum cache %s: %s", path, exc)
