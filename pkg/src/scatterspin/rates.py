"""Photon-scattering jump rates and the derived-rate algebra.

Five physical jump rates define the dissipator: the two Raman channels
0->1 and 1->0 within the qubit manifold, the two leakage channels 0->g
and 1->g into the atomic ground level, and elastic (Rayleigh) scattering.
Everything else used by the trajectory kernels is an algebraic combination
of these five numbers.

A calculator for Ca+ metastable qubits is included: a pi-polarized beam
far detuned from the D5/2 -> P3/2 transition Stark-shifts only one qubit
level, and the off-resonant scattering it induces splits into leakage,
elastic and Raman channels by fixed branching fractions.  Selection rules
forbid scattering from the other qubit level entirely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import C_LIGHT, HBAR
from .errors import ValidationError

# Fractions of spontaneous decays per channel for the pi-polarized Ca+ setup.
DEFAULT_CA_BRANCHING = {"leak": 0.945, "elastic": 0.016, "raman": 0.039}

# D5/2 -> P3/2 spontaneous decay rate (s^-1) and 854 nm transition k-vector.
DEFAULT_A_P32_D52 = 8.48e6
DEFAULT_K_DP = 2.0 * math.pi / 854.209e-9


@dataclass(frozen=True)
class ScatteringRates:
    """The five single-ion jump rates, all in s^-1.

    gamma_01 : Raman 0 -> 1
    gamma_10 : Raman 1 -> 0
    gamma_0g : leakage 0 -> g
    gamma_1g : leakage 1 -> g
    gamma_el : elastic
    """

    gamma_01: float = 0.0
    gamma_10: float = 0.0
    gamma_0g: float = 0.0
    gamma_1g: float = 0.0
    gamma_el: float = 0.0

    def __post_init__(self):
        for name in ("gamma_01", "gamma_10", "gamma_0g", "gamma_1g", "gamma_el"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v!r}")

    @property
    def total(self) -> float:
        return self.gamma_01 + self.gamma_10 + self.gamma_0g + self.gamma_1g + self.gamma_el

    def scaled(self, factor: float) -> "ScatteringRates":
        return ScatteringRates(
            self.gamma_01 * factor,
            self.gamma_10 * factor,
            self.gamma_0g * factor,
            self.gamma_1g * factor,
            self.gamma_el * factor,
        )


@dataclass(frozen=True)
class DerivedRates:
    """Algebraic combinations of the jump rates used by every kernel.

    gamma_0 / gamma_1 are the total scattering rates out of levels 0 and 1,
    lam and delta their half-sum and half-difference, gamma the full
    single-ion decoherence rate (elastic counts at half weight), and
    gamma_b the bilinear Raman-then-leak rate (units s^-2).
    """

    gamma: float
    gamma_l: float
    gamma_r: float
    gamma_b: float
    gamma_0: float
    gamma_1: float
    lam: float
    delta: float
    delta_l: float


def derive_rates(rates: ScatteringRates) -> DerivedRates:
    """Evaluate all derived decoherence rates from the five jump rates."""
    g01, g10 = rates.gamma_01, rates.gamma_10
    g0g, g1g = rates.gamma_0g, rates.gamma_1g
    gamma_0 = g01 + g0g
    gamma_1 = g10 + g1g
    lam = 0.5 * (gamma_0 + gamma_1)
    delta = 0.5 * (gamma_0 - gamma_1)
    gamma_l = 0.5 * (g0g + g1g)
    gamma_r = 0.5 * (g01 + g10)
    gamma_b = 0.5 * (g01 * g1g + g10 * g0g)
    delta_l = 0.5 * (g0g - g1g)
    gamma = gamma_l + gamma_r + 0.5 * rates.gamma_el
    return DerivedRates(
        gamma=gamma,
        gamma_l=gamma_l,
        gamma_r=gamma_r,
        gamma_b=gamma_b,
        gamma_0=gamma_0,
        gamma_1=gamma_1,
        lam=lam,
        delta=delta,
        delta_l=delta_l,
    )


@dataclass(frozen=True)
class CaLaserParams:
    """Shifting-beam parameters for the Ca+ metastable-qubit setup.

    power      : total beam power (W)
    waist      : beam waist (m)
    detuning   : detuning from the P3/2 level (rad/s)
    decay_p32_d52 : P3/2 -> D5/2 spontaneous decay rate (s^-1)
    k_dp       : magnitude of the D5/2 -> P3/2 transition k-vector (m^-1)
    branching  : fractions of spontaneous decays per channel
                 {leak, elastic, raman}; must sum to 1
    """

    power: float
    waist: float
    detuning: float = 2.0 * math.pi * 1.0e12
    decay_p32_d52: float = DEFAULT_A_P32_D52
    k_dp: float = DEFAULT_K_DP
    branching: dict = field(default_factory=lambda: dict(DEFAULT_CA_BRANCHING))

    def __post_init__(self):
        if self.detuning == 0.0:
            raise ValidationError("detuning must be nonzero")
        if self.waist <= 0.0:
            raise ValidationError("waist must be positive")
        if self.power < 0.0:
            raise ValidationError("power must be >= 0")
        missing = {"leak", "elastic", "raman"} - set(self.branching)
        if missing:
            raise ValidationError(f"branching is missing channels {sorted(missing)}")
        total = sum(self.branching[k] for k in ("leak", "elastic", "raman"))
        if abs(total - 1.0) > 1e-6:
            raise ValidationError(f"branching fractions sum to {total}, expected 1")

    @classmethod
    def representative(cls, power: float = 0.05, waist: float = 150e-6) -> "CaLaserParams":
        """A representative configuration (single-ion scattering ~ a few s^-1).

        The beam power and waist behind published simulation curves are not
        public, so these defaults reproduce the right *regime*, not any
        particular curve.
        """
        return cls(power=power, waist=waist)


def ca_stark_and_rates(params: CaLaserParams) -> tuple[float, ScatteringRates]:
    """Differential AC Stark shift and scattering rates for the Ca+ setup.

    The shift on the bright qubit level is
        (6/5) * A_P32D52 / (hbar c k_DP^3 Delta) * P / w0^2   [s^-1]
    and the total scattering rate is A_total * |shift / Delta|, split into
    leakage / elastic / Raman channels by the branching fractions.  Decays
    back into D5/2 are the elastic + Raman share, so the total decay rate
    follows from the D5/2 partial rate alone:
        A_total = A_P32D52 / (f_elastic + f_raman).

    Scattering from the dark level is forbidden by selection rules, so
    gamma_10 = gamma_1g = 0 identically.
    """
    stark = (
        1.2
        * params.decay_p32_d52
        / (HBAR * C_LIGHT * params.k_dp**3 * params.detuning)
        * (params.power / params.waist**2)
    )
    f_leak = params.branching["leak"]
    f_el = params.branching["elastic"]
    f_raman = params.branching["raman"]
    a_total = params.decay_p32_d52 / (f_el + f_raman)
    gamma_tot = a_total * abs(stark / params.detuning)
    rates = ScatteringRates(
        gamma_01=f_raman * gamma_tot,
        gamma_10=0.0,
        gamma_0g=f_leak * gamma_tot,
        gamma_1g=0.0,
        gamma_el=f_el * gamma_tot,
    )
    return stark, rates


def representative_ca_rates(power: float = 0.05, waist: float = 150e-6) -> ScatteringRates:
    """Scattering rates for the representative Ca+ configuration."""
    return ca_stark_and_rates(CaLaserParams.representative(power, waist))[1]
