"""Experiment-level drivers built on the expectation engine.

Covers preparation of maximally-entangled cat states (fidelity, leakage
postselection and its sampling overhead), many-body spin-spin correlators
with the leaked-qubit effective-field plateau model, spin squeezing with a
coupling-strength scan, and a single-layer QAOA benchmark on the native
Ising cost.

Cat-state fidelities use the permutation symmetry of an equal-coupling
ensemble: matrix elements depend only on how many sites fall in each of
the four (row, col) letter classes, so the 4^N basis-pair sum collapses to
O(N^3) composition classes with multinomial weights (accumulated in log
space to avoid overflow).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .couplings import CouplingMatrix, equal_couplings
from .engine import (
    EvolutionSpec,
    PauliString,
    PlainIsing,
    SpinEcho,
    density_matrix_element,
    expect_pauli,
    no_leak_probability,
    site_factors,
)
from .errors import ConsistencyError, SizeError, ValidationError
from .rates import ScatteringRates

LN2 = math.log(2.0)


def _make_mode(mode: str, ising_time: float):
    if mode == "spin_echo":
        return SpinEcho.from_ising_time(ising_time)
    if mode == "plain":
        return PlainIsing(ising_time)
    raise ValidationError(f"unknown mode {mode!r}, expected 'plain' or 'spin_echo'")


# ----------------------------------------------------------------------
# cat-state (GHZ) preparation
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GhzResult:
    n: int
    t_cat: float
    f_scatter: float
    f_unequal: float
    f_total: float
    f_postselect: float
    p_no_leak: float
    overhead: float


def cat_phase(k: int, n: int, coupling_angle: float) -> float:
    """Phase of the z-basis amplitude with k down spins after uniform Ising
    evolution: coupling_angle * ((N - 2k)^2 - N) / 2, coupling_angle = J t / N."""
    w = n - 2 * k
    return coupling_angle * (w * w - n) / 2.0


def _ghz_class_fidelity(spec: EvolutionSpec, coupling_angle: float) -> float:
    """<cat| rho |cat> by permutation-class summation (equal couplings)."""
    n = spec.n
    jbar = spec.couplings.mean_j
    t_sc = spec.scattering_time()
    gamma_m = spec.coherence_rate()
    phases = np.array([cat_phase(k, n, coupling_angle) for k in range(n + 1)])

    # per-class kernel factors at j_eff = (d - c) * J, scaled by 2 so the
    # log-space bookkeeping reduces to a single -2N ln 2 offset
    diffs = np.arange(-n, n + 1)
    k0 = np.empty(2 * n + 1, dtype=complex)
    k1 = np.empty(2 * n + 1, dtype=complex)
    for idx, d in enumerate(diffs):
        f = site_factors(spec, float(d) * jbar)
        k0[idx] = 2.0 * f[0]
        k1[idx] = 2.0 * f[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        log_k0 = np.log(k0)
        log_k1 = np.log(k1)

    lg = gammaln(np.arange(n + 2))
    total = 0j
    for a in range(n + 1):
        for b in range(n + 1 - a):
            c = np.arange(n + 1 - a - b)
            d = n - a - b - c
            m = c + d
            idx = (d - c) + n
            logw = (
                lg[n + 1]
                - lg[a + 1]
                - lg[b + 1]
                - lg[c + 1]
                - lg[d + 1]
                - 2.0 * n * LN2
                - m * gamma_m * t_sc
            ).astype(complex)
            if a:
                logw = logw + a * log_k0[idx]
            if b:
                logw = logw + b * log_k1[idx]
            logw = logw + 1j * (phases[b + d] - phases[b + c])
            terms = np.exp(logw)
            # a vanishing kernel factor shows up as exp(-inf + i*nan);
            # those classes contribute exactly zero
            total += terms[np.isfinite(terms)].sum()
    if abs(total.imag) > 1e-9:
        raise ConsistencyError(f"imaginary residue {total.imag:.3e} in cat fidelity")
    return float(total.real)


def ghz_fidelity_bruteforce(spec: EvolutionSpec, coupling_angle: float) -> float:
    """Naive 4^N basis-pair fidelity sum; test reference for the class sum."""
    n = spec.n
    if n > 8:
        raise SizeError("brute-force cat fidelity limited to n <= 8")
    words = ["".join(bits) for bits in itertools.product("01", repeat=n)]
    amps = np.array(
        [
            2.0 ** (-0.5 * n) * np.exp(-1j * cat_phase(w.count("1"), n, coupling_angle))
            for w in words
        ]
    )
    total = 0j
    for r, row in enumerate(words):
        for c, col in enumerate(words):
            total += np.conj(amps[r]) * amps[c] * density_matrix_element(row, col, spec)
    return float(total.real)


def ghz_state_3level(n: int, coupling_angle: float) -> np.ndarray:
    """The noiseless equal-coupling cat state embedded in the 3^n basis."""
    dim = 3**n
    vec = np.zeros(dim, dtype=complex)
    for bits in itertools.product((0, 1), repeat=n):
        index = 0
        for digit in bits:
            index = 3 * index + digit
        k = sum(bits)
        vec[index] = 2.0 ** (-0.5 * n) * np.exp(-1j * cat_phase(k, n, coupling_angle))
    return vec


def ghz_fidelity(
    n: int,
    couplings: CouplingMatrix,
    rates: ScatteringRates,
    mode: str = "spin_echo",
) -> GhzResult:
    """Cat-state preparation fidelity at t_cat = pi N / (4 J).

    Scattering error is evaluated with all couplings set to their mean
    (permutation-class sum); coupling nonuniformity enters through the
    separate overlap factor, and the total is their product.  Postselection
    on zero leakage renormalizes the scattering part by the no-leak
    probability exactly (the cat state has no ground-level component), so
    the expected sampling overhead is 1 / P_no_leak.
    """
    if couplings.n != n:
        raise ValidationError(f"couplings are for {couplings.n} ions, asked for {n}")
    if n < 2:
        raise ValidationError("need at least 2 ions")
    jbar = couplings.mean_j
    if jbar <= 0:
        raise ValidationError(f"mean coupling must be > 0, got {jbar}")
    t_cat = math.pi * n / (4.0 * jbar)
    coupling_angle = jbar * t_cat / n
    spec = EvolutionSpec(equal_couplings(n, jbar), rates, _make_mode(mode, t_cat))
    f_scatter = _ghz_class_fidelity(spec, coupling_angle)
    p_no_leak = no_leak_probability(spec)
    f_uneq = f_unequal(couplings, t_cat)
    f_total = f_scatter * f_uneq
    f_postselect = (f_scatter / p_no_leak) * f_uneq
    return GhzResult(
        n=n,
        t_cat=t_cat,
        f_scatter=f_scatter,
        f_unequal=f_uneq,
        f_total=f_total,
        f_postselect=f_postselect,
        p_no_leak=p_no_leak,
        overhead=1.0 / p_no_leak,
    )


# ----------------------------------------------------------------------
# coupling-nonuniformity fidelity
# ----------------------------------------------------------------------


def f_unequal_terms(couplings: CouplingMatrix, t: float) -> tuple[float, float, float]:
    """(second-order, fourth-order, Gaussian-estimate) pieces of the overlap
    between equal-coupling and true-coupling noiseless evolution.

    With c_ij = cos(t delta_ij / N) and s_ij = sin(t delta_ij / N) the
    second-order term is prod c_ij^2 and the fourth-order term sums, over
    every 4-subset, the three 4-cycles of sines times the cosines of all
    untouched pairs.
    """
    if t < 0:
        raise ValidationError(f"time must be >= 0, got {t}")
    n = couplings.n
    theta = t * couplings.deviations() / n
    cmat = np.cos(theta)
    smat = np.sin(theta)
    np.fill_diagonal(cmat, 1.0)
    c2 = cmat * cmat
    iu = np.triu_indices(n, k=1)
    f2 = float(np.prod(c2[iu]))
    sigma2 = couplings.variance_j
    gaussian = math.exp(-(t * t) * sigma2 * math.comb(n, 2) / n**2)

    if n < 4:
        return f2, 0.0, gaussian

    row_prod = np.prod(c2, axis=1)  # includes the unit diagonal
    f4 = 0.0
    combos = itertools.combinations(range(n), 4)
    while True:
        chunk = np.array(list(itertools.islice(combos, 200_000)), dtype=np.int64)
        if chunk.size == 0:
            break
        k, l, m, q = chunk.T
        inside = (
            c2[k, l] * c2[k, m] * c2[k, q] * c2[l, m] * c2[l, q] * c2[m, q]
        )
        denom = row_prod[k] * row_prod[l] * row_prod[m] * row_prod[q]
        if np.any(denom == 0.0):
            raise ValidationError(
                "a pairwise deviation angle hit pi/2; fourth-order term undefined"
            )
        untouched = f2 * inside / denom
        cycles = (
            smat[k, l] * smat[l, m] * smat[m, q] * smat[q, k]
            + smat[k, m] * smat[k, q] * smat[m, l] * smat[q, l]
            + smat[k, l] * smat[k, m] * smat[l, q] * smat[m, q]
        )
        f4 += float(np.sum(2.0 * cycles * untouched))
    return f2, f4, gaussian


def f_unequal(couplings: CouplingMatrix, t: float) -> float:
    f2, f4, _ = f_unequal_terms(couplings, t)
    return f2 + f4


# ----------------------------------------------------------------------
# spin-spin correlators and the leakage plateau model
# ----------------------------------------------------------------------


def correlation_plateau(m: int) -> float:
    """Average of sin^(2m) over a uniform phase: Gamma(1/2 + m) / (sqrt(pi) Gamma(1 + m))."""
    if m < 1:
        raise ValidationError(f"need m >= 1, got {m}")
    return math.exp(gammaln(0.5 + m) - gammaln(1.0 + m)) / math.sqrt(math.pi)


@dataclass(frozen=True)
class CorrelatorCurve:
    n: int
    m: int
    axis: str
    times: np.ndarray
    exact: np.ndarray
    exact_perp: np.ndarray
    model: np.ndarray
    model_perp: np.ndarray
    single_ion_bound: np.ndarray
    p_leak: np.ndarray


def correlator_curves(
    n: int,
    m: int,
    rates: ScatteringRates,
    j: float,
    times,
    subset_average: bool = False,
) -> CorrelatorCurve:
    """2m-body correlators along the cat polarization axis vs. evolution time.

    Exact values come from the spin-echo engine with equal couplings; the
    model splits the ensemble into a no-leak part (ideal, weight
    exp(-N gamma_0g t_arm)) and a leaked part whose randomized effective
    fields contribute the plateau value.  The perpendicular axis picks up a
    correlator from leakage alone.
    """
    if m < 1:
        raise ValidationError(f"need m >= 1, got {m}")
    if 2 * m > n:
        raise ValidationError(f"need 2m <= n, got m={m}, n={n}")
    couplings = equal_couplings(n, j)
    axis = "x" if n % 2 == 0 else "y"
    perp = "y" if axis == "x" else "x"
    times = np.asarray(times, dtype=float)

    windows = [list(range(2 * m))]
    if subset_average:
        windows = [[(start + k) % n for k in range(2 * m)] for start in range(n)]

    plateau = correlation_plateau(m)
    gamma_0 = rates.gamma_01 + rates.gamma_0g
    coh_rate = gamma_0 + rates.gamma_el

    exact = np.empty_like(times)
    exact_perp = np.empty_like(times)
    model = np.empty_like(times)
    model_perp = np.empty_like(times)
    bound = np.empty_like(times)
    p_leak = np.empty_like(times)
    for i, t in enumerate(times):
        spec = EvolutionSpec(couplings, rates, SpinEcho.from_ising_time(t))
        exact[i] = np.mean(
            [expect_pauli(PauliString(n, {s: axis for s in w}), spec) for w in windows]
        )
        exact_perp[i] = np.mean(
            [expect_pauli(PauliString(n, {s: perp for s in w}), spec) for w in windows]
        )
        t_arm = 2.0 * t
        survive = math.exp(-n * rates.gamma_0g * t_arm)
        model[i] = survive + (1.0 - survive) * plateau
        model_perp[i] = (1.0 - survive) * plateau
        bound[i] = math.exp(-2 * m * coh_rate * t_arm)
        p_leak[i] = 1.0 - no_leak_probability(spec)
    return CorrelatorCurve(
        n=n,
        m=m,
        axis=axis,
        times=times,
        exact=exact,
        exact_perp=exact_perp,
        model=model,
        model_perp=model_perp,
        single_ion_bound=bound,
        p_leak=p_leak,
    )


# ----------------------------------------------------------------------
# spin squeezing
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SqueezeResult:
    n: int
    coupling_scan: list  # (J * t_scatter / N, xi^2) pairs with scattering
    noiseless_scan: list
    optimal: tuple
    noiseless_optimal: tuple
    p_leak_at_opt: float


def xi_squared(spec: EvolutionSpec) -> float:
    """Squeezing parameter N * min_theta Var(S^theta) / <Sx>^2.

    The minimization over the squeezing angle is the smaller eigenvalue of
    the 2x2 covariance matrix of (S_z, S_y).  Returns inf when <Sx> = 0
    (the point is unusable, not an error).
    """
    n = spec.n
    uniform = spec.couplings.variance_j == 0.0

    if uniform:
        ex = expect_pauli(PauliString(n, {0: "x"}), spec)
        ez = expect_pauli(PauliString(n, {0: "z"}), spec)
        ey = expect_pauli(PauliString(n, {0: "y"}), spec)
        f0 = site_factors(spec, 0.0)
        q = (f0[0] + f0[1]).real
        czz = expect_pauli(PauliString(n, {0: "z", 1: "z"}), spec)
        cyy = expect_pauli(PauliString(n, {0: "y", 1: "y"}), spec)
        czy = expect_pauli(PauliString(n, {0: "z", 1: "y"}), spec)
        cyz = expect_pauli(PauliString(n, {0: "y", 1: "z"}), spec)
        sx = 0.5 * n * ex
        sz = 0.5 * n * ez
        sy = 0.5 * n * ey
        qsum = n * q
        zz_sum = n * (n - 1) * czz
        yy_sum = n * (n - 1) * cyy
        zy_sum = n * (n - 1) * 0.5 * (czy + cyz)
    else:
        ex = [expect_pauli(PauliString(n, {i: "x"}), spec) for i in range(n)]
        ez = [expect_pauli(PauliString(n, {i: "z"}), spec) for i in range(n)]
        ey = [expect_pauli(PauliString(n, {i: "y"}), spec) for i in range(n)]
        f0 = site_factors(spec, 0.0)
        qsum = n * (f0[0] + f0[1]).real
        sx = 0.5 * sum(ex)
        sz = 0.5 * sum(ez)
        sy = 0.5 * sum(ey)
        zz_sum = yy_sum = zy_sum = 0.0
        for i in range(n):
            for jdx in range(n):
                if i == jdx:
                    continue
                zz_sum += expect_pauli(PauliString(n, {i: "z", jdx: "z"}), spec)
                yy_sum += expect_pauli(PauliString(n, {i: "y", jdx: "y"}), spec)
                zy_sum += expect_pauli(PauliString(n, {i: "z", jdx: "y"}), spec)

    var_z = 0.25 * (qsum + zz_sum) - sz * sz
    var_y = 0.25 * (qsum + yy_sum) - sy * sy
    cov = 0.25 * zy_sum - sz * sy
    lam_min = 0.5 * (var_z + var_y) - math.hypot(0.5 * (var_z - var_y), cov)
    if sx == 0.0:
        return math.inf
    return n * lam_min / (sx * sx)


def default_squeezing_scan(n: int, points: int = 60, span: float = 6.0) -> np.ndarray:
    """Log-spaced scan of J * t_scatter / N bracketing the empirical optimum
    scale 0.85 * N^-0.62."""
    center = 0.85 * n ** (-0.62)
    return np.geomspace(center / span, center * span, points)


def spin_squeezing(
    n: int,
    rates: ScatteringRates,
    couplings: CouplingMatrix,
    scan=None,
    mode: str = "spin_echo",
) -> SqueezeResult:
    """Scan the coupling-time product and report squeezing optima.

    Scan values are x = J * t_scatter / N (t_scatter = arm duration for the
    spin-echo mode); each maps to an absolute time via the mean coupling.
    The noiseless scan reruns the same points with all rates zeroed.
    """
    if couplings.n != n:
        raise ValidationError(f"couplings are for {couplings.n} ions, asked for {n}")
    jbar = couplings.mean_j
    if jbar <= 0:
        raise ValidationError(f"mean coupling must be > 0, got {jbar}")
    if scan is None:
        scan = default_squeezing_scan(n)
    scan = np.asarray(scan, dtype=float)
    zero = ScatteringRates()

    def mode_at(x: float):
        t_scatter = x * n / jbar
        if mode == "spin_echo":
            return SpinEcho(t_arm=t_scatter)
        if mode == "plain":
            return PlainIsing(t_scatter)
        raise ValidationError(f"unknown mode {mode!r}")

    noisy = [(float(x), xi_squared(EvolutionSpec(couplings, rates, mode_at(x)))) for x in scan]
    free = [(float(x), xi_squared(EvolutionSpec(couplings, zero, mode_at(x)))) for x in scan]

    def best(points):
        usable = [(x, v) for x, v in points if math.isfinite(v)]
        if not usable:
            raise ConsistencyError("no usable scan point (<Sx> vanished everywhere)")
        return min(usable, key=lambda p: p[1])

    optimal = best(noisy)
    noiseless_optimal = best(free)
    p_leak = 1.0 - no_leak_probability(EvolutionSpec(couplings, rates, mode_at(optimal[0])))
    return SqueezeResult(
        n=n,
        coupling_scan=noisy,
        noiseless_scan=free,
        optimal=optimal,
        noiseless_optimal=noiseless_optimal,
        p_leak_at_opt=p_leak,
    )


# ----------------------------------------------------------------------
# single-layer QAOA on the native Ising cost
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class QaoaResult:
    n: int
    gammas: np.ndarray
    betas: np.ndarray
    costs: np.ndarray  # shape (len(gammas), len(betas))
    noiseless_costs: np.ndarray
    best_cost: float
    best_params: tuple
    noiseless_best_cost: float
    noiseless_best_params: tuple


def _qaoa_pair_sums(spec: EvolutionSpec, weights: np.ndarray) -> tuple[float, float, float]:
    """Weighted pair sums (zz, yz + zy, yy) entering the cost."""
    n = spec.n
    if spec.couplings.variance_j == 0.0:
        wsum = float(np.sum(weights[np.triu_indices(n, k=1)]))
        czz = expect_pauli(PauliString(n, {0: "z", 1: "z"}), spec)
        cyy = expect_pauli(PauliString(n, {0: "y", 1: "y"}), spec)
        cyz = expect_pauli(PauliString(n, {0: "y", 1: "z"}), spec)
        czy = expect_pauli(PauliString(n, {0: "z", 1: "y"}), spec)
        return wsum * czz, wsum * (cyz + czy), wsum * cyy
    a = b = c = 0.0
    for i in range(n):
        for jdx in range(i + 1, n):
            w = weights[i, jdx]
            if w == 0.0:
                continue
            a += w * expect_pauli(PauliString(n, {i: "z", jdx: "z"}), spec)
            b += w * (
                expect_pauli(PauliString(n, {i: "y", jdx: "z"}), spec)
                + expect_pauli(PauliString(n, {i: "z", jdx: "y"}), spec)
            )
            c += w * expect_pauli(PauliString(n, {i: "y", jdx: "y"}), spec)
    return a, b, c


def qaoa_single_layer(
    n: int,
    rates: ScatteringRates,
    couplings: CouplingMatrix,
    grid_points: int = 101,
    mode: str = "spin_echo",
) -> QaoaResult:
    """Grid-search the single-layer cost landscape, noisy and noiseless.

    The cost is the normalized Ising energy after the mixer rotation,

        <C> = (1/J) sum_{i<j} J_ij [ cos^2(2b) <zz> + sin(4b)/2 (<yz> + <zy>)
                                     + sin^2(2b) <yy> ],

    with the two-body expectations evaluated under noisy Ising evolution at
    the effective time t = gamma N / J, so scattering exposure grows with
    the cost angle exactly as it would on hardware where angle = time.
    """
    if couplings.n != n:
        raise ValidationError(f"couplings are for {couplings.n} ions, asked for {n}")
    if grid_points < 2:
        raise ValidationError(f"need at least 2 grid points, got {grid_points}")
    jbar = couplings.mean_j
    if jbar <= 0:
        raise ValidationError(f"mean coupling must be > 0, got {jbar}")
    gammas = np.linspace(0.0, math.pi / math.sqrt(n), grid_points)
    betas = np.linspace(-math.pi / 4.0, math.pi / 4.0, grid_points)
    weights = couplings.j / jbar
    zero = ScatteringRates()

    cos2 = np.cos(2.0 * betas) ** 2
    sin4 = np.sin(4.0 * betas)
    sin2 = np.sin(2.0 * betas) ** 2

    def landscape(r: ScatteringRates) -> np.ndarray:
        costs = np.empty((len(gammas), len(betas)))
        for gi, g in enumerate(gammas):
            t_eff = g * n / jbar
            spec = EvolutionSpec(couplings, r, _make_mode(mode, t_eff))
            azz, byz, cyy = _qaoa_pair_sums(spec, weights)
            costs[gi] = cos2 * azz + 0.5 * sin4 * byz + sin2 * cyy
        return costs

    costs = landscape(rates)
    noiseless = landscape(zero)

    def best(grid: np.ndarray) -> tuple:
        gi, bi = np.unravel_index(np.argmin(grid), grid.shape)
        return float(grid[gi, bi]), (float(gammas[gi]), float(betas[bi]))

    best_cost, best_params = best(costs)
    nl_cost, nl_params = best(noiseless)
    return QaoaResult(
        n=n,
        gammas=gammas,
        betas=betas,
        costs=costs,
        noiseless_costs=noiseless,
        best_cost=best_cost,
        best_params=best_params,
        noiseless_best_cost=nl_cost,
        noiseless_best_params=nl_params,
    )
