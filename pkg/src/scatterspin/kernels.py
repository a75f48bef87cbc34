"""Trajectory-class kernels for decoherent Ising dynamics.

Every operator expectation factors into per-ion complex kernels that sum
the contributions of four trajectory classes: ideal evolution, sequences
of Raman transitions inside the qubit manifold, leakage to the ground
level, and Raman followed by leakage.  This module evaluates those kernels
and their end-state splits, plus the integral primitives

    f(G, chi, t) = int_0^t exp((i chi - G) u) du
    a(G, chi, t) = int_0^t exp(-G u) cos(chi u) du
    b(G, chi, t) = int_0^t exp(-G u) u sinc(chi u) du

stably over the full parameter range, including the removable
singularities at chi -> 0 and zeta -> 0.

A second kernel set covers the spin-echo realization for Ca+ metastable
qubits, where scattering from one qubit level is forbidden and the
trajectory sum truncates to seven types.  Those kernels take the coupling
as J/N per arm (half the plain-Ising 2J/N) and are evaluated at the arm
duration.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ModelViolationError, ValidationError
from .rates import DerivedRates, ScatteringRates, derive_rates

_SINC_SERIES_CUTOFF = 1e-4
_B_SERIES_RADIUS = 1.0  # |chi * t| below this uses the moment series


def csinc(z: complex) -> complex:
    """sin(z)/z for complex z; series below |z| = 1e-4 keeps ~1e-15 accuracy."""
    z = complex(z)
    if abs(z) < _SINC_SERIES_CUTOFF:
        z2 = z * z
        return 1.0 - z2 / 6.0 * (1.0 - z2 / 20.0)
    return cmath.sin(z) / z


def _cexpm1(z: complex) -> complex:
    """exp(z) - 1 without cancellation for small |z| (complex argument)."""
    x, y = z.real, z.imag
    ex = math.exp(x)
    sin_half = math.sin(0.5 * y)
    return complex(math.expm1(x) - 2.0 * ex * sin_half * sin_half, ex * math.sin(y))


def f_kernel(gamma: complex, chi: complex, t: float) -> complex:
    """int_0^t exp((i chi - gamma) u) du, exact limit t at (chi, gamma) = (0, 0).

    Equals exp(i(chi + i gamma)t/2) * t * sinc[(chi + i gamma)t/2]; evaluated
    here through expm1 to stay accurate when the exponent is small.
    """
    if t < 0:
        raise ValidationError(f"duration must be >= 0, got {t}")
    w = 1j * complex(chi) - complex(gamma)
    wt = w * t
    if wt == 0:
        return complex(t)
    return _cexpm1(wt) / w


def a_kernel(gamma: complex, chi: complex, t: float) -> complex:
    """int_0^t exp(-gamma u) cos(chi u) du = [f(chi) + f(-chi)] / 2."""
    return 0.5 * (f_kernel(gamma, chi, t) + f_kernel(gamma, -chi, t))


def _odd_moments(gamma: float, t: float, count: int) -> list[float]:
    """M_k = int_0^t u^k exp(-gamma u) du for k = 1, 3, ..., 2*count - 1."""
    kmax = 2 * count - 1
    gt = gamma * t
    if gt < 2.0:
        # alternating series in (gamma t); converges fast for gt < 2
        out = []
        for k in range(1, kmax + 1, 2):
            total, term, j = 1.0 / (k + 1), 1.0, 0
            while True:
                j += 1
                term *= -gt / j
                contrib = term / (k + j + 1)
                total += contrib
                if abs(contrib) < 1e-18 * abs(total) or j > 80:
                    break
            out.append(total * t ** (k + 1))
        return out
    # upward recursion, stable for gt >= 2
    emt = math.exp(-gt)
    m_prev = (1.0 - emt) / gamma
    moments = []
    tk = 1.0
    for k in range(1, kmax + 1):
        tk *= t
        m_k = (k * m_prev - tk * emt) / gamma
        if k % 2 == 1:
            moments.append(m_k)
        m_prev = m_k
    return moments


def b_kernel(gamma: float, chi: complex, t: float) -> complex:
    """int_0^t exp(-gamma u) u sinc(chi u) du.

    The difference form -i[f(chi) - f(-chi)]/(2 chi) cancels catastrophically
    as chi -> 0, so below |chi t| = 1 the moment series
    sum_p (-1)^p chi^(2p) M_(2p+1) / (2p+1)!  is used instead.
    """
    if t < 0:
        raise ValidationError(f"duration must be >= 0, got {t}")
    gamma = float(gamma)
    if gamma < 0:
        raise ValidationError(f"decay rate must be >= 0, got {gamma}")
    chi = complex(chi)
    if abs(chi) * t <= _B_SERIES_RADIUS:
        moments = _odd_moments(gamma, t, 12)
        chi2 = chi * chi
        total = 0.0 + 0.0j
        power = 1.0 + 0.0j
        fact = 1.0
        for p, m in enumerate(moments):
            if p > 0:
                power *= -chi2
                fact *= (2 * p) * (2 * p + 1)
            term = power * m / fact
            total += term
            if abs(term) < 1e-17 * max(abs(total), 1e-300):
                break
        return total
    return -0.5j * (f_kernel(gamma, chi, t) - f_kernel(gamma, -chi, t)) / chi


def _damped_cos(gamma: float, chi: complex, t: float) -> complex:
    """exp(-gamma t) cos(chi t) via exponential sums (no overflow for
    physically admissible |Im chi| <= gamma)."""
    return 0.5 * (cmath.exp((1j * chi - gamma) * t) + cmath.exp((-1j * chi - gamma) * t))


def _damped_sinc(gamma: float, chi: complex, t: float) -> complex:
    """exp(-gamma t) * t * sinc(chi t), same conditioning strategy."""
    z = chi * t
    if abs(z) < 1e-2:
        z2 = z * z
        return math.exp(-gamma * t) * t * (1.0 - z2 / 6.0 * (1.0 - z2 / 20.0))
    return (
        cmath.exp((1j * chi - gamma) * t) - cmath.exp((-1j * chi - gamma) * t)
    ) / (2j * chi)


@dataclass(frozen=True)
class KernelArgs:
    """Inputs for one kernel evaluation.

    j_eff is the signed coupling sum seen by a spectator ion (the per-site
    sign bookkeeping happens in the expectation engine, not here); it enters
    the plain-Ising kernels as 2 * j_eff / n.
    """

    j_eff: float
    n: int
    t: float
    derived: DerivedRates
    raw: ScatteringRates

    def __post_init__(self):
        if self.t < 0:
            raise ValidationError(f"duration must be >= 0, got {self.t}")
        if self.n < 1:
            raise ValidationError(f"ion count must be >= 1, got {self.n}")

    @classmethod
    def build(cls, j_eff: float, n: int, t: float, rates: ScatteringRates) -> "KernelArgs":
        return cls(j_eff=j_eff, n=n, t=t, derived=derive_rates(rates), raw=rates)


@dataclass(frozen=True)
class KernelSet:
    """The four trajectory-class kernels and their end-state splits.

    i_val = i0 + i1, r_val = r0 + r1 and l_val = l0g + l1g hold exactly
    because the totals are constructed as those sums.
    """

    i_val: complex
    r_val: complex
    l_val: complex
    b_val: complex
    i0: complex
    i1: complex
    r0: complex
    r1: complex
    l0g: complex
    l1g: complex

    @property
    def total(self) -> complex:
        return self.i_val + self.r_val + self.l_val + self.b_val

    @property
    def qubit0(self) -> complex:
        return self.i0 + self.r0

    @property
    def qubit1(self) -> complex:
        return self.i1 + self.r1

    @property
    def ground(self) -> complex:
        return self.l_val + self.b_val


def _plain_terms(
    x: float, t: float, raw: ScatteringRates, der: DerivedRates, zeta: complex
) -> KernelSet:
    """Assemble the kernel set given x = 2 j_eff / n and a zeta branch."""
    s = complex(x, der.delta)
    i0 = 0.5 * cmath.exp(complex(-der.gamma_0 * t, x * t))
    i1 = 0.5 * cmath.exp(complex(-der.gamma_1 * t, -x * t))

    dc_zeta = _damped_cos(der.lam, zeta, t)
    dc_s = _damped_cos(der.lam, s, t)
    ds_zeta = _damped_sinc(der.lam, zeta, t)
    ds_s = _damped_sinc(der.lam, s, t)
    cross = 1j * s * (ds_zeta - ds_s)
    r0 = 0.5 * (dc_zeta - dc_s + raw.gamma_10 * ds_zeta + cross)
    r1 = 0.5 * (dc_zeta - dc_s + raw.gamma_01 * ds_zeta - cross)

    l0g = 0.5 * raw.gamma_0g * f_kernel(der.gamma_0, x, t)
    l1g = 0.5 * raw.gamma_1g * f_kernel(der.gamma_1, -x, t)

    if der.gamma_l == 0.0 and der.gamma_b == 0.0 and der.delta_l == 0.0:
        b_val = 0j
    else:
        a_zeta = a_kernel(der.lam, zeta, t)
        a_s = a_kernel(der.lam, s, t)
        b_zeta = b_kernel(der.lam, zeta, t)
        b_s = b_kernel(der.lam, s, t)
        b_val = (
            der.gamma_l * (a_zeta - a_s)
            + der.gamma_b * b_zeta
            + 1j * s * der.delta_l * (b_zeta - b_s)
        )

    return KernelSet(
        i_val=i0 + i1,
        r_val=r0 + r1,
        l_val=l0g + l1g,
        b_val=b_val,
        i0=i0,
        i1=i1,
        r0=r0,
        r1=r1,
        l0g=l0g,
        l1g=l1g,
    )


def kernel_set(args: KernelArgs) -> KernelSet:
    """Evaluate the plain-Ising kernel set.

    Uses the damped oscillation frequencies s = 2 j_eff/n + i*delta and
    zeta = sqrt(s^2 - gamma_01 gamma_10) on the principal branch; every
    appearance of zeta is an even function, so the branch choice is
    immaterial (asserted numerically by tests).
    """
    x = 2.0 * args.j_eff / args.n
    s = complex(x, args.derived.delta)
    zeta = cmath.sqrt(s * s - args.raw.gamma_01 * args.raw.gamma_10)
    return _plain_terms(x, args.t, args.raw, args.derived, zeta)


@dataclass(frozen=True)
class SpinEchoKernelSet:
    """Kernels for the two-arm spin-echo sequence with one-sided scattering.

    Evaluated at the arm duration; describe the state after the full
    sequence (two arms, two global pi-pulses).
    """

    i0: complex
    i1: complex
    r0: complex
    r1: complex
    l_val: complex
    b_val: complex

    @property
    def total(self) -> complex:
        return self.i0 + self.i1 + self.r0 + self.r1 + self.l_val + self.b_val

    @property
    def qubit0(self) -> complex:
        return self.i0 + self.r0

    @property
    def qubit1(self) -> complex:
        return self.i1 + self.r1

    @property
    def ground(self) -> complex:
        return self.l_val + self.b_val


def spin_echo_kernel_set(
    j_eff: float, n: int, t_arm: float, rates: ScatteringRates
) -> SpinEchoKernelSet:
    """Evaluate the spin-echo kernel set at arm duration t_arm.

    Requires gamma_10 = gamma_1g = 0 (no scattering from the dark level);
    that selection rule is what truncates the trajectory sum.  Note the
    coupling enters as j_eff/n, half the plain-Ising 2 j_eff/n, because the
    echo halves the effective Ising interaction per unit arm time.
    """
    if rates.gamma_10 != 0.0 or rates.gamma_1g != 0.0:
        raise ModelViolationError(
            "spin-echo kernels require gamma_10 = gamma_1g = 0 "
            f"(got {rates.gamma_10}, {rates.gamma_1g})"
        )
    if t_arm < 0:
        raise ValidationError(f"arm duration must be >= 0, got {t_arm}")
    y = j_eff / n
    g01 = rates.gamma_01
    g0g = rates.gamma_0g
    gamma_0 = g01 + g0g
    i0 = 0.5 * cmath.exp(complex(-gamma_0 * t_arm, y * t_arm))
    i1 = 0.5 * cmath.exp(complex(-gamma_0 * t_arm, -y * t_arm))
    f_plus = f_kernel(gamma_0, y, t_arm)
    f_minus = f_kernel(gamma_0, -y, t_arm)
    r0 = 0.5 * (g01 * f_minus + g01 * g01 * f_plus * f_minus)
    r1 = 0.5 * g01 * f_plus * cmath.exp(complex(-gamma_0 * t_arm, -y * t_arm))
    l_val = 0.5 * g0g * (f_plus + f_minus)
    b_val = 0.5 * g01 * g0g * f_minus * f_plus
    return SpinEchoKernelSet(i0=i0, i1=i1, r0=r0, r1=r1, l_val=l_val, b_val=b_val)
