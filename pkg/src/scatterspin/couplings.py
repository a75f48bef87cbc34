"""Ising coupling matrices and the motional-mode data they derive from.

Couplings follow the convention that the interaction Hamiltonian carries an
explicit 1/N, i.e. the evolution phase between ions i and j is J_ij t / N.
Matrices built from mode data use

    J_ij = N * Omega_i * Omega_j * sum_m eta_im * eta_jm * omega_m / (mu^2 - omega_m^2)

with no hidden renormalization.  Crystal equilibrium and normal-mode
eigenproblems are out of scope here: mode frequencies and Lamb-Dicke
parameters arrive as data (JSON files or arrays).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ResonanceError, ValidationError

TWO_PI = 2.0 * math.pi


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric N x N matrix of pairwise couplings J_ij (rad/s), zero diagonal."""

    n: int
    j: np.ndarray
    mean_j: float = field(init=False)
    variance_j: float = field(init=False)

    def __post_init__(self):
        j = np.asarray(self.j, dtype=float)
        if self.n < 1:
            raise ValidationError(f"ion count must be >= 1, got {self.n}")
        if j.shape != (self.n, self.n):
            raise ValidationError(f"coupling matrix shape {j.shape} != ({self.n}, {self.n})")
        if not np.all(np.isfinite(j)):
            bad = np.argwhere(~np.isfinite(j))[0]
            raise ValidationError(f"non-finite coupling at ({bad[0]}, {bad[1]})")
        if np.any(np.diag(j) != 0.0):
            raise ValidationError("coupling matrix must have zero diagonal")
        if not np.array_equal(j, j.T):
            raise ValidationError("coupling matrix must be exactly symmetric")
        object.__setattr__(self, "j", _readonly(j))
        pairs = self.pair_values()
        if pairs.size == 0:
            object.__setattr__(self, "mean_j", 0.0)
            object.__setattr__(self, "variance_j", 0.0)
        elif np.ptp(pairs) == 0.0:
            # uniform couplings: keep the mean bit-exact and variance at 0
            object.__setattr__(self, "mean_j", float(pairs[0]))
            object.__setattr__(self, "variance_j", 0.0)
        else:
            mean = float(pairs.mean())
            object.__setattr__(self, "mean_j", mean)
            object.__setattr__(self, "variance_j", float(np.mean((pairs - mean) ** 2)))

    def pair_values(self) -> np.ndarray:
        """Couplings over the i < j pairs, row-major order."""
        iu = np.triu_indices(self.n, k=1)
        return self.j[iu]

    def deviations(self) -> np.ndarray:
        """delta_ij = J_ij - mean over pairs, as a full symmetric matrix."""
        d = self.j - self.mean_j
        d = d.copy()
        np.fill_diagonal(d, 0.0)
        return d


@dataclass(frozen=True)
class ModeData:
    """Axial mode spectrum and drive parameters.

    omegas      : mode angular frequencies omega_m (rad/s)
    etas        : Lamb-Dicke parameters, one row per ion, one column per mode
    omegas_rabi : per-ion drive amplitudes Omega_i (s^-1)
    mu          : beatnote angular frequency (rad/s)
    """

    n: int
    omegas: np.ndarray
    etas: np.ndarray
    omegas_rabi: np.ndarray
    mu: float

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        etas = np.asarray(self.etas, dtype=float)
        rabi = np.asarray(self.omegas_rabi, dtype=float)
        if etas.ndim != 2 or etas.shape[0] != self.n or etas.shape[1] != omegas.size:
            raise ValidationError(
                f"etas shape {etas.shape} must be ({self.n}, {omegas.size})"
            )
        if rabi.shape != (self.n,):
            raise ValidationError(f"omegas_rabi shape {rabi.shape} must be ({self.n},)")
        for name, arr in (("omegas", omegas), ("etas", etas), ("omegas_rabi", rabi)):
            if not np.all(np.isfinite(arr)):
                idx = np.argwhere(~np.isfinite(np.atleast_2d(arr)))[0]
                raise ValidationError(f"non-finite value in {name} at index {tuple(idx)}")
        if not math.isfinite(self.mu):
            raise ValidationError("mu must be finite")
        if np.any(omegas == self.mu):
            m = int(np.argwhere(omegas == self.mu)[0, 0])
            raise ResonanceError(f"beatnote mu equals mode frequency omega_{m}")
        object.__setattr__(self, "omegas", _readonly(omegas))
        object.__setattr__(self, "etas", _readonly(etas))
        object.__setattr__(self, "omegas_rabi", _readonly(rabi))


def equal_couplings(n: int, j: float) -> CouplingMatrix:
    """Uniform coupling j on every pair (variance exactly zero)."""
    if n < 2:
        raise ValidationError(f"need at least 2 ions, got {n}")
    mat = np.full((n, n), float(j))
    np.fill_diagonal(mat, 0.0)
    return CouplingMatrix(n=n, j=mat)


def couplings_from_modes(modes: ModeData) -> CouplingMatrix:
    """Pairwise couplings from the mode spectrum and Lamb-Dicke parameters."""
    if modes.n < 2:
        raise ValidationError(f"need at least 2 ions, got {modes.n}")
    denom = modes.mu**2 - modes.omegas**2
    weights = modes.omegas / denom
    # J = N * (Omega eta) diag(w) (Omega eta)^T, diagonal removed
    amp = modes.etas * modes.omegas_rabi[:, None]
    mat = modes.n * (amp * weights[None, :]) @ amp.T
    mat = 0.5 * (mat + mat.T)  # kill rounding asymmetry from the matmul
    np.fill_diagonal(mat, 0.0)
    return CouplingMatrix(n=modes.n, j=mat)


# ----------------------------------------------------------------------
# file I/O
#
# Couplings file: {"n": N, "upper": [[i, j, value], ...]} with i < j, or
# {"n": N, "matrix": [[...], ...]} (must be symmetric within 1e-12).
# Mode file: {"n": N, "omegas": [...], "etas": [[...]], "omegas_rabi": [...],
# "mu": value}.  Values are SI angular units unless "units": "hz" is present,
# in which case frequencies and couplings are multiplied by 2*pi on load.
# ----------------------------------------------------------------------


def _load_json(source) -> dict:
    if isinstance(source, dict):
        return source
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top-level JSON value must be an object")
    return doc


def _unit_factor(doc: dict) -> float:
    units = doc.get("units", "rad")
    if units == "hz":
        return TWO_PI
    if units == "rad":
        return 1.0
    raise ValidationError(f"unknown units {units!r}, expected 'hz' or 'rad'")


def _check_finite(value, where: str) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise ValidationError(f"non-finite value at {where}")
    return v


def load_couplings(source) -> CouplingMatrix:
    """Load a coupling matrix from a JSON file, path or already-parsed dict."""
    doc = _load_json(source)
    factor = _unit_factor(doc)
    if "n" not in doc:
        raise ValidationError("couplings document missing 'n'")
    n = int(doc["n"])
    if "upper" in doc:
        mat = np.zeros((n, n))
        for entry in doc["upper"]:
            if len(entry) != 3:
                raise ValidationError(f"upper entry {entry!r} must be [i, j, value]")
            i, j, value = int(entry[0]), int(entry[1]), entry[2]
            if not (0 <= i < j < n):
                raise ValidationError(f"upper entry indices ({i}, {j}) need 0 <= i < j < n")
            v = _check_finite(value, f"upper[{i},{j}]") * factor
            mat[i, j] = v
            mat[j, i] = v
        return CouplingMatrix(n=n, j=mat)
    if "matrix" in doc:
        mat = np.asarray(doc["matrix"], dtype=float) * factor
        if mat.shape != (n, n):
            raise ValidationError(f"matrix shape {mat.shape} != ({n}, {n})")
        if not np.all(np.isfinite(mat)):
            bad = np.argwhere(~np.isfinite(mat))[0]
            raise ValidationError(f"non-finite value at matrix[{bad[0]}][{bad[1]}]")
        scale = max(1.0, float(np.abs(mat).max()))
        if np.abs(mat - mat.T).max() > 1e-12 * scale:
            raise ValidationError("full matrix asymmetric beyond 1e-12")
        mat = 0.5 * (mat + mat.T)
        np.fill_diagonal(mat, 0.0)
        return CouplingMatrix(n=n, j=mat)
    raise ValidationError("couplings document needs either 'upper' or 'matrix'")


def save_couplings(couplings: CouplingMatrix, path) -> None:
    """Write the upper triangle as JSON (bit-exact round trip via repr floats)."""
    upper = [
        [i, j, couplings.j[i, j]]
        for i in range(couplings.n)
        for j in range(i + 1, couplings.n)
    ]
    doc = {"n": couplings.n, "upper": upper}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_modes(source) -> ModeData:
    """Load mode data from a JSON file, path or already-parsed dict."""
    doc = _load_json(source)
    factor = _unit_factor(doc)
    for key in ("n", "omegas", "etas", "omegas_rabi", "mu"):
        if key not in doc:
            raise ValidationError(f"mode document missing '{key}'")
    return ModeData(
        n=int(doc["n"]),
        omegas=np.asarray(doc["omegas"], dtype=float) * factor,
        etas=np.asarray(doc["etas"], dtype=float),
        omegas_rabi=np.asarray(doc["omegas_rabi"], dtype=float),
        mu=_check_finite(doc["mu"], "mu") * factor,
    )


def save_modes(modes: ModeData, path) -> None:
    doc = {
        "n": modes.n,
        "omegas": list(modes.omegas),
        "etas": [list(row) for row in modes.etas],
        "omegas_rabi": list(modes.omegas_rabi),
        "mu": modes.mu,
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")
