"""Brute-force verifiers: dense master-equation integration and a
noiseless state-vector evolver.

The master-equation integrator works on the full 3^N product space
(levels 0, 1, g per ion; N <= 4) with the non-Hermitian-Hamiltonian /
jump-operator splitting

    rho_dot = -i (H_eff rho - rho H_eff^dag) + 2 sum_k J_k rho J_k^dag,
    H_eff   = H - i sum_k J_k^dag J_k,

jump operators sqrt(rate/2) |b><a| per inelastic channel and
sqrt(gamma_el/8) sigma_z per ion for elastic scattering.  Both Ising and
light-shift-arm Hamiltonians are diagonal in the product basis, which the
integrator exploits.

This module shares no code with the expectation engine; agreement between
the two is the package's core correctness argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .couplings import CouplingMatrix
from .errors import ModelViolationError, SizeError, StepSizeError, ValidationError
from .rates import ScatteringRates

MAX_DENSE_IONS = 4
MAX_STATEVECTOR_IONS = 14

_LEVELS = "01g"


@dataclass(frozen=True)
class DensityMatrix:
    """Dense state over the 3^n product basis (site 0 most significant)."""

    n: int
    data: np.ndarray

    def __post_init__(self):
        dim = 3**self.n
        data = np.asarray(self.data, dtype=complex)
        if data.shape != (dim, dim):
            raise ValidationError(f"density matrix shape {data.shape} != ({dim}, {dim})")
        object.__setattr__(self, "data", data)

    def hermiticity_defect(self) -> float:
        return float(np.abs(self.data - self.data.conj().T).max())

    def trace(self) -> complex:
        return complex(np.trace(self.data))


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_final: float
    method: str = "rk4"

    def __post_init__(self):
        if self.dt <= 0:
            raise ValidationError(f"dt must be > 0, got {self.dt}")
        if self.t_final < 0:
            raise ValidationError(f"t_final must be >= 0, got {self.t_final}")
        if self.method not in ("rk4", "simpson_like"):
            raise ValidationError(f"unknown method {self.method!r}")


def default_dt(couplings: CouplingMatrix, rates: ScatteringRates, t_final: float) -> float:
    """Fixed step small against both the coupling and scattering scales,
    and never fewer than 2000 steps."""
    scale = float(np.abs(couplings.j).max()) / couplings.n + rates.total
    dt = math.inf if scale == 0.0 else 1.0 / (50.0 * scale)
    if t_final > 0:
        dt = min(dt, t_final / 2000.0)
    if not math.isfinite(dt):
        dt = 1.0
    return dt


def _digits(n: int) -> np.ndarray:
    """(3^n, n) array of level indices, site 0 most significant."""
    dim = 3**n
    idx = np.arange(dim)
    out = np.empty((dim, n), dtype=np.int64)
    for site in range(n - 1, -1, -1):
        out[:, site] = idx % 3
        idx //= 3
    return out


def _site_operator(op3: np.ndarray, site: int, n: int) -> sp.csr_matrix:
    mat = sp.identity(1, format="csr", dtype=complex)
    for k in range(n):
        block = sp.csr_matrix(op3) if k == site else sp.identity(3, format="csr", dtype=complex)
        mat = sp.kron(mat, block, format="csr")
    return mat


def _hamiltonian_diagonal(
    couplings: CouplingMatrix, variant: str
) -> np.ndarray:
    n = couplings.n
    digits = _digits(n)
    if variant == "ising":
        zvals = np.zeros_like(digits, dtype=float)
        zvals[digits == 0] = 1.0
        zvals[digits == 1] = -1.0
        occ = zvals
    elif variant == "light_shift_arm":
        occ = (digits == 0).astype(float)
    else:
        raise ValidationError(f"unknown hamiltonian variant {variant!r}")
    # (1/N) sum_{i<j} J_ij v_i v_j = (1/2N) v J v  (zero diagonal)
    return 0.5 / n * np.einsum("zi,ij,zj->z", occ, couplings.j, occ)


def build_lindbladian(
    couplings: CouplingMatrix,
    rates: ScatteringRates,
    hamiltonian_variant: str = "ising",
) -> Callable[[np.ndarray], np.ndarray]:
    """Return a closure computing rho_dot on the 3^n space.

    The whole generator is flattened once into a sparse superoperator
    (vec(A rho B) = (A kron B^T) vec(rho)), so each derivative evaluation
    is a single sparse matvec.
    """
    n = couplings.n
    if n > MAX_DENSE_IONS:
        raise SizeError(f"dense oracle limited to n <= {MAX_DENSE_IONS}, got {n}")
    h = _hamiltonian_diagonal(couplings, hamiltonian_variant)

    sz = np.diag([1.0, -1.0, 0.0]).astype(complex)
    channels = [
        (rates.gamma_01, np.array([[0, 0, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)),  # |1><0|
        (rates.gamma_10, np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=complex)),  # |0><1|
        (rates.gamma_0g, np.array([[0, 0, 0], [0, 0, 0], [1, 0, 0]], dtype=complex)),  # |g><0|
        (rates.gamma_1g, np.array([[0, 0, 0], [0, 0, 0], [0, 1, 0]], dtype=complex)),  # |g><1|
    ]
    jumps = []
    dim = 3**n
    asum = np.zeros(dim)
    for site in range(n):
        for rate, op3 in channels:
            if rate == 0.0:
                continue
            jop = _site_operator(math.sqrt(0.5 * rate) * op3, site, n)
            jumps.append(jop)
            asum += np.real((jop.conj().T @ jop).diagonal())
        if rates.gamma_el > 0.0:
            jop = _site_operator(math.sqrt(rates.gamma_el / 8.0) * sz, site, n)
            jumps.append(jop)
            asum += np.real((jop.conj().T @ jop).diagonal())

    # -i(H_eff rho - rho H_eff^dag) is elementwise for diagonal H:
    #   (-i (h_r - h_c) - (a_r + a_c)) * rho_rc
    lin = (-1j * (h[:, None] - h[None, :]) - (asum[:, None] + asum[None, :])).astype(complex)
    superop = sp.diags(lin.reshape(-1), format="csr")
    for jop in jumps:
        superop = superop + 2.0 * sp.kron(jop, jop.conj(), format="csr")
    superop = superop.tocsr()

    def generator(rho: np.ndarray) -> np.ndarray:
        return (superop @ rho.reshape(-1)).reshape(dim, dim)

    return generator


def product_plus_density(n: int) -> DensityMatrix:
    """rho(0) for the all-plus product state embedded in the 3^n space."""
    if n > MAX_DENSE_IONS:
        raise SizeError(f"dense oracle limited to n <= {MAX_DENSE_IONS}, got {n}")
    site = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
    vec = np.array([1.0])
    for _ in range(n):
        vec = np.kron(vec, site)
    return DensityMatrix(n=n, data=np.outer(vec, vec).astype(complex))


def _rk4_step(rho: np.ndarray, gen, h: float) -> np.ndarray:
    k1 = gen(rho)
    k2 = gen(rho + 0.5 * h * k1)
    k3 = gen(rho + 0.5 * h * k2)
    k4 = gen(rho + h * k3)
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_raw(rho: np.ndarray, gen, t_final: float, dt: float, method: str) -> np.ndarray:
    if t_final == 0.0:
        return rho.copy()
    steps = max(1, math.ceil(t_final / dt))
    h = t_final / steps
    if method == "rk4":
        for _ in range(steps):
            rho = _rk4_step(rho, gen, h)
        return rho
    # simpson_like: two-step Simpson corrector bootstrapped with RK4,
    # the quadrature-style composite scheme used as a cross-check
    if steps < 2:
        return _rk4_step(rho, gen, h)
    prev = rho
    g_prev = gen(prev)
    cur = _rk4_step(prev, gen, h)
    for _ in range(steps - 1):
        g_cur = gen(cur)
        pred = cur + h * g_cur  # Euler predictor
        nxt = prev + (h / 3.0) * (g_prev + 4.0 * g_cur + gen(pred))
        for _ in range(2):  # corrector iterations
            nxt = prev + (h / 3.0) * (g_prev + 4.0 * g_cur + gen(nxt))
        prev, g_prev, cur = cur, g_cur, nxt
    return cur


def integrate(
    rho0: DensityMatrix,
    generator: Callable[[np.ndarray], np.ndarray],
    config: IntegratorConfig,
    verify_convergence: bool = False,
) -> DensityMatrix:
    """Fixed-step integration; final state hermitized and trace-checked."""
    if rho0.hermiticity_defect() > 1e-10:
        raise ValidationError("initial state is not Hermitian")
    if abs(rho0.trace() - 1.0) > 1e-8:
        raise ValidationError("initial state does not have unit trace")
    rho = _integrate_raw(rho0.data.copy(), generator, config.t_final, config.dt, config.method)
    if verify_convergence:
        rho_half = _integrate_raw(
            rho0.data.copy(), generator, config.t_final, 0.5 * config.dt, config.method
        )
        change = float(np.abs(rho - rho_half).max())
        if change > 1e-9:
            raise StepSizeError(
                f"halving dt changes the state by {change:.3e}; decrease dt",
                suggested_dt=0.5 * config.dt,
            )
    rho = 0.5 * (rho + rho.conj().T)
    drift = abs(np.trace(rho) - 1.0)
    if drift > 1e-8:
        raise StepSizeError(
            f"trace drifted by {drift:.3e}; try dt = {0.5 * config.dt:.3e}",
            suggested_dt=0.5 * config.dt,
        )
    return DensityMatrix(n=rho0.n, data=rho)


def _pi_pulse_matrix(n: int) -> sp.csr_matrix:
    """Global pi-pulse S: swap 0 <-> 1 per site, leave g fixed."""
    x01 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=complex)
    mat = sp.identity(1, format="csr", dtype=complex)
    for _ in range(n):
        mat = sp.kron(mat, sp.csr_matrix(x01), format="csr")
    return mat


def spin_echo_sequence(
    rho0: DensityMatrix,
    couplings: CouplingMatrix,
    rates: ScatteringRates,
    t_arm: float,
    dt: float | None = None,
    method: str = "rk4",
    enforce_selection_rule: bool = True,
) -> DensityMatrix:
    """Integrate arm 1 under the light-shift Hamiltonian, apply the global
    pi-pulse, integrate arm 2, apply the pulse again."""
    if enforce_selection_rule and (rates.gamma_10 != 0.0 or rates.gamma_1g != 0.0):
        raise ModelViolationError(
            "spin-echo comparison requires gamma_10 = gamma_1g = 0"
        )
    if t_arm < 0:
        raise ValidationError(f"arm duration must be >= 0, got {t_arm}")
    gen = build_lindbladian(couplings, rates, hamiltonian_variant="light_shift_arm")
    if dt is None:
        dt = default_dt(couplings, rates, t_arm)
    config = IntegratorConfig(dt=dt, t_final=t_arm, method=method)
    pulse = _pi_pulse_matrix(rho0.n)
    rho = integrate(rho0, gen, config).data
    rho = np.asarray(pulse @ rho @ pulse.conj().T)
    rho = integrate(DensityMatrix(rho0.n, rho), gen, config).data
    rho = np.asarray(pulse @ rho @ pulse.conj().T)
    return DensityMatrix(n=rho0.n, data=rho)


def basis_words(n: int) -> list[str]:
    words = [""]
    for _ in range(n):
        words = [w + ch for w in words for ch in _LEVELS]
    return words


def density_records(rho: DensityMatrix) -> list[tuple[str, str, float, float]]:
    """Flatten to (row_word, col_word, re, im) records for golden files."""
    words = basis_words(rho.n)
    out = []
    for r, rw in enumerate(words):
        for c, cw in enumerate(words):
            v = rho.data[r, c]
            out.append((rw, cw, float(v.real), float(v.imag)))
    return out


# ----------------------------------------------------------------------
# noiseless state-vector tools (2^n qubit space)
# ----------------------------------------------------------------------


def _check_statevector_size(n: int):
    if n > MAX_STATEVECTOR_IONS:
        raise SizeError(f"state-vector tools limited to n <= {MAX_STATEVECTOR_IONS}")


def plus_state(n: int) -> np.ndarray:
    _check_statevector_size(n)
    return np.full(2**n, 2.0 ** (-0.5 * n), dtype=complex)


def _z_signs(n: int) -> np.ndarray:
    """(2^n, n) array of sigma_z eigenvalues, bit 0 = site 0 = MSB."""
    idx = np.arange(2**n)
    bits = (idx[:, None] >> np.arange(n - 1, -1, -1)[None, :]) & 1
    return 1.0 - 2.0 * bits


def ising_phase_angles(couplings: CouplingMatrix, t: float) -> np.ndarray:
    """(t/N) sum_{i<j} J_ij z_i z_j per computational basis state."""
    z = _z_signs(couplings.n)
    return 0.5 * t / couplings.n * np.einsum("zi,ij,zj->z", z, couplings.j, z)


def statevector_evolve(couplings: CouplingMatrix, t: float) -> np.ndarray:
    """Exact noiseless Ising evolution of the all-plus state."""
    _check_statevector_size(couplings.n)
    return plus_state(couplings.n) * np.exp(-1j * ising_phase_angles(couplings, t))


def overlap(a: np.ndarray, b: np.ndarray) -> complex:
    return complex(np.vdot(a, b))


def _apply_axis(state: np.ndarray, site: int, axis: str, n: int) -> np.ndarray:
    stride = 2 ** (n - 1 - site)
    v = state.reshape(-1, 2, stride)
    out = np.empty_like(v)
    if axis == "x":
        out[:, 0, :] = v[:, 1, :]
        out[:, 1, :] = v[:, 0, :]
    elif axis == "y":
        out[:, 0, :] = -1j * v[:, 1, :]
        out[:, 1, :] = 1j * v[:, 0, :]
    else:
        out[:, 0, :] = v[:, 0, :]
        out[:, 1, :] = -v[:, 1, :]
    return out.reshape(state.shape)


def pauli_expect(state: np.ndarray, entries: dict, n: int) -> float:
    """<state| prod sigma |state> for a sparse Pauli word."""
    phi = state
    for site, axis in sorted(entries.items()):
        phi = _apply_axis(phi, site, axis, n)
    value = np.vdot(state, phi)
    return float(value.real)


def xi_squared_statevector(state: np.ndarray, n: int) -> float:
    """Spin-squeezing parameter of a pure qubit state.

    Minimizes the variance of cos(theta) S_z + sin(theta) S_y in closed form
    via the smaller eigenvalue of the 2x2 (S_z, S_y) covariance matrix.
    """
    sx = 0.5 * sum(pauli_expect(state, {i: "x"}, n) for i in range(n))
    sz = 0.5 * sum(pauli_expect(state, {i: "z"}, n) for i in range(n))
    sy = 0.5 * sum(pauli_expect(state, {i: "y"}, n) for i in range(n))
    zz = yy = zy = 0.0
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            zz += pauli_expect(state, {i: "z", j: "z"}, n)
            yy += pauli_expect(state, {i: "y", j: "y"}, n)
            zy += pauli_expect(state, {i: "z", j: "y"}, n)
    var_z = 0.25 * (n + zz) - sz**2
    var_y = 0.25 * (n + yy) - sy**2
    cov = 0.25 * zy - sz * sy
    mean = 0.5 * (var_z + var_y)
    radius = math.hypot(0.5 * (var_z - var_y), cov)
    lam_min = mean - radius
    return n * lam_min / sx**2


def qaoa_statevector(couplings: CouplingMatrix, gamma: float, beta: float) -> np.ndarray:
    """exp(-i beta sum sigma_x) exp(-i gamma C) |+>^n with the normalized
    Ising cost C = (1/J) sum_{i<j} J_ij sigma_z sigma_z."""
    n = couplings.n
    _check_statevector_size(n)
    jbar = couplings.mean_j
    if jbar == 0.0:
        raise ValidationError("mean coupling must be nonzero for the QAOA cost")
    z = _z_signs(n)
    cost_diag = 0.5 / jbar * np.einsum("zi,ij,zj->z", z, couplings.j, z)
    state = plus_state(n) * np.exp(-1j * gamma * cost_diag)
    c, s = math.cos(beta), math.sin(beta)
    for site in range(n):
        flipped = _apply_axis(state, site, "x", n)
        state = c * state - 1j * s * flipped
    return state


def qaoa_statevector_cost(couplings: CouplingMatrix, gamma: float, beta: float) -> float:
    n = couplings.n
    state = qaoa_statevector(couplings, gamma, beta)
    z = _z_signs(n)
    cost_diag = 0.5 / couplings.mean_j * np.einsum("zi,ij,zj->z", z, couplings.j, z)
    return float(np.real(np.sum(np.abs(state) ** 2 * cost_diag)))


def rate_matrix(rates: ScatteringRates) -> np.ndarray:
    """Classical single-ion rate matrix over populations (p0, p1, pg)."""
    g01, g10 = rates.gamma_01, rates.gamma_10
    g0g, g1g = rates.gamma_0g, rates.gamma_1g
    return np.array(
        [
            [-(g01 + g0g), g10, 0.0],
            [g01, -(g10 + g1g), 0.0],
            [g0g, g1g, 0.0],
        ]
    )
