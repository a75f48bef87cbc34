"""Exact expectation values of operator strings under noisy Ising dynamics.

An operator string assigns one symbol per ion: a level projector (p0, p1,
pg), a coherence operator (raise = |0><1|, lower = |1><0|), or identity.
Starting from the all-plus product state, the expectation of any such
string is a product of per-ion kernels evaluated at the signed coupling
sum each spectator ion sees from the raise/lower set, times a global
coherence-decay prefactor.  That product form is what makes hundreds of
ions tractable.

Two evolution modes are supported: plain Ising evolution for a time t, and
the two-arm spin-echo realization (arm duration t_arm, effective Ising
time t_arm / 2, wall-clock 2 * t_arm) with the one-sided scattering rule.

There is never coherence between the ground level and the qubit manifold,
so density-matrix elements pairing g with 0/1 vanish identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

import numpy as np

from .couplings import CouplingMatrix
from .errors import ConsistencyError, SizeError, ValidationError
from .kernels import KernelArgs, kernel_set, spin_echo_kernel_set
from .rates import DerivedRates, ScatteringRates, derive_rates

SYMBOLS = ("identity", "p0", "p1", "pg", "raise", "lower")

IMAG_RESIDUE_TOL = 1e-10  # absolute, for observables that must be real

# per-ion factor tuple: (ends in 0, ends in 1, ground, any)
Factors = tuple


@dataclass(frozen=True)
class PlainIsing:
    """Evolve exp(-i H t) with the 1/N-normalized Ising Hamiltonian."""

    t: float

    def __post_init__(self):
        if self.t < 0:
            raise ValidationError(f"time must be >= 0, got {self.t}")


@dataclass(frozen=True)
class SpinEcho:
    """Two-arm spin-echo light-shift sequence, arm duration t_arm.

    The echo halves the Ising interaction, so the effective Ising time is
    t_arm / 2 and the wall-clock experiment time is 2 * t_arm.
    """

    t_arm: float

    def __post_init__(self):
        if self.t_arm < 0:
            raise ValidationError(f"arm duration must be >= 0, got {self.t_arm}")

    @classmethod
    def from_ising_time(cls, t: float) -> "SpinEcho":
        return cls(t_arm=2.0 * t)

    @property
    def ising_time(self) -> float:
        return 0.5 * self.t_arm

    @property
    def t_expt(self) -> float:
        return 2.0 * self.t_arm


Mode = Union[PlainIsing, SpinEcho]


@dataclass(frozen=True)
class EvolutionSpec:
    """Couplings + scattering rates + evolution mode, with a kernel cache.

    Immutable apart from the internal cache, which is only ever populated
    with values that are pure functions of the frozen fields (safe under
    concurrent read/insert in CPython).
    """

    couplings: CouplingMatrix
    rates: ScatteringRates
    mode: Mode
    derived: DerivedRates = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "derived", derive_rates(self.rates))
        if isinstance(self.mode, SpinEcho):
            # fail early instead of on first kernel evaluation
            spin_echo_kernel_set(0.0, self.couplings.n, 0.0, self.rates)

    @property
    def n(self) -> int:
        return self.couplings.n

    def scattering_time(self) -> float:
        """The timescale scattering acts over (t, or t_arm for the echo)."""
        return self.mode.t_arm if isinstance(self.mode, SpinEcho) else self.mode.t

    def coherence_rate(self) -> float:
        """Decay rate of each raise/lower site in the string prefactor."""
        if isinstance(self.mode, SpinEcho):
            return self.derived.gamma_0 + self.rates.gamma_el
        return self.derived.gamma


def site_factors(spec: EvolutionSpec, j_eff: float) -> Factors:
    """Per-ion kernel factors at a signed coupling sum, memoized.

    Returns (factor if projected onto 0, onto 1, onto g, spectator factor).
    The cache key is the float value itself, i.e. the exact bit pattern.
    """
    cached = spec._cache.get(j_eff)
    if cached is not None:
        return cached
    if isinstance(spec.mode, SpinEcho):
        ks = spin_echo_kernel_set(j_eff, spec.n, spec.mode.t_arm, spec.rates)
    else:
        ks = kernel_set(KernelArgs(j_eff, spec.n, spec.mode.t, spec.derived, spec.rates))
    factors = (ks.qubit0, ks.qubit1, ks.ground, ks.total)
    spec._cache[j_eff] = factors
    return factors


@dataclass(frozen=True)
class OperatorString:
    """One symbol per ion; the object whose expectation the engine computes."""

    n: int
    symbols: tuple

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(symbols) != self.n:
            raise ValidationError(f"need {self.n} symbols, got {len(symbols)}")
        for s in symbols:
            if s not in SYMBOLS:
                raise ValidationError(f"unknown symbol {s!r}")


@dataclass(frozen=True)
class PauliString:
    """Sparse Pauli word: map site -> axis in {'x', 'y', 'z'}."""

    n: int
    entries: Mapping[int, str]

    def __post_init__(self):
        entries = dict(self.entries)
        object.__setattr__(self, "entries", entries)
        for site, axis in entries.items():
            if not 0 <= site < self.n:
                raise ValidationError(f"site {site} out of range for n={self.n}")
            if axis not in ("x", "y", "z"):
                raise ValidationError(f"unknown Pauli axis {axis!r}")


def _string_prefactor(spec: EvolutionSpec, m: int) -> float:
    return math.exp(-m * spec.coherence_rate() * spec.scattering_time()) / 2.0**m


def expect_string(op: OperatorString, spec: EvolutionSpec) -> complex:
    """Expectation of an operator string from the all-plus initial state."""
    if op.n != spec.n:
        raise ValidationError(f"operator is on {op.n} ions, couplings on {spec.n}")
    jmat = spec.couplings.j
    m_sites = []
    nu = []
    for site, sym in enumerate(op.symbols):
        if sym == "raise":
            m_sites.append(site)
            nu.append(1.0)
        elif sym == "lower":
            m_sites.append(site)
            nu.append(-1.0)
    value = complex(_string_prefactor(spec, len(m_sites)))
    for site, sym in enumerate(op.symbols):
        if sym in ("raise", "lower"):
            continue
        j_eff = 0.0
        for k, msite in enumerate(m_sites):
            j_eff += nu[k] * jmat[site, msite]
        p0f, p1f, pgf, allf = site_factors(spec, j_eff)
        if sym == "p0":
            value *= p0f
        elif sym == "p1":
            value *= p1f
        elif sym == "pg":
            value *= pgf
        else:
            value *= allf
    return value


def expect_pauli(p: PauliString, spec: EvolutionSpec) -> float:
    """Expectation of a sparse Pauli word (real by construction).

    x and y expand into raise/lower (2^k terms over the x/y sites); z sites
    contract directly into (ends-in-0 minus ends-in-1) kernel factors, so
    they cost nothing extra.  An imaginary residue above 1e-10 means the
    kernel algebra is inconsistent and raises.
    """
    if p.n != spec.n:
        raise ValidationError(f"operator is on {p.n} ions, couplings on {spec.n}")
    jmat = spec.couplings.j
    xy_sites = [site for site, ax in sorted(p.entries.items()) if ax in ("x", "y")]
    axes = [p.entries[site] for site in xy_sites]
    z_sites = [site for site, ax in sorted(p.entries.items()) if ax == "z"]
    others = [site for site in range(spec.n) if site not in p.entries]
    k = len(xy_sites)
    prefactor = _string_prefactor(spec, k)
    total = 0j
    for mask in range(1 << k):
        nu = [1.0 if (mask >> i) & 1 == 0 else -1.0 for i in range(k)]
        phase = 1.0 + 0.0j
        for i, ax in enumerate(axes):
            if ax == "y":
                phase *= -1j if nu[i] > 0 else 1j
        term = prefactor * phase
        for site in z_sites:
            j_eff = 0.0
            for i, msite in enumerate(xy_sites):
                j_eff += nu[i] * jmat[site, msite]
            p0f, p1f, _, _ = site_factors(spec, j_eff)
            term *= p0f - p1f
        for site in others:
            j_eff = 0.0
            for i, msite in enumerate(xy_sites):
                j_eff += nu[i] * jmat[site, msite]
            term *= site_factors(spec, j_eff)[3]
        total += term
    if abs(total.imag) > IMAG_RESIDUE_TOL:
        raise ConsistencyError(
            f"imaginary residue {total.imag:.3e} on a Pauli expectation"
        )
    return total.real


_PAIR_SYMBOL = {
    ("0", "0"): "p0",
    ("1", "1"): "p1",
    ("g", "g"): "pg",
    ("1", "0"): "raise",  # |0><1|
    ("0", "1"): "lower",  # |1><0|
}


def density_matrix_element(z_row: str, z_col: str, spec: EvolutionSpec) -> complex:
    """<z_row| rho |z_col> for basis words over the letters {0, 1, g}.

    Words pairing g with a qubit level are forbidden coherences and return
    exactly 0.
    """
    row = tuple(z_row)
    col = tuple(z_col)
    if len(row) != len(col):
        raise ValidationError("row and column words must have equal length")
    if len(row) != spec.n:
        raise ValidationError(f"words are on {len(row)} ions, couplings on {spec.n}")
    symbols = []
    for r, c in zip(row, col):
        sym = _PAIR_SYMBOL.get((r, c))
        if sym is None:
            if r in "01g" and c in "01g":
                return 0j  # g paired with a qubit level
            raise ValidationError(f"invalid basis letters ({r!r}, {c!r})")
        symbols.append(sym)
    return expect_string(OperatorString(spec.n, tuple(symbols)), spec)


def no_leak_probability(spec: EvolutionSpec) -> float:
    """Probability that no ion has leaked: <prod_i (P0_i + P1_i)>.

    Equals the per-ion qubit-manifold weight at zero coupling sum raised to
    the N-th power, and 1 - P_leak by definition.
    """
    p0f, p1f, _, _ = site_factors(spec, 0.0)
    per_ion = (p0f + p1f).real
    return per_ion**spec.n


def full_density_matrix(spec: EvolutionSpec, max_n: int = 4) -> np.ndarray:
    """Dense rho over the 3^N product basis (site 0 most significant).

    Exponential in N; guarded to small systems where the brute-force
    verifier lives.
    """
    if spec.n > max_n:
        raise SizeError(f"full density matrix limited to n <= {max_n}")
    words = _basis_words(spec.n)
    dim = len(words)
    rho = np.zeros((dim, dim), dtype=complex)
    for r, row in enumerate(words):
        for c, col in enumerate(words):
            rho[r, c] = density_matrix_element(row, col, spec)
    return rho


def _basis_words(n: int) -> list:
    letters = "01g"
    words = [""]
    for _ in range(n):
        words = [w + ch for w in words for ch in letters]
    return words


def diagonal_words(n: int) -> Iterable[str]:
    return _basis_words(n)
