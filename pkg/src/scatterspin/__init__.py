"""scatterspin: light-scattering and leakage errors in trapped-ion Ising
dynamics, solved in closed form and cross-checked by brute force.

The expectation engine evaluates arbitrary operator-string expectations by
multiplying per-ion trajectory kernels, in both plain-Ising and spin-echo
modes; the oracle module integrates the same master equation densely on
up to four ions so every closed form can be verified element by element.
Experiment drivers cover cat-state preparation, spin-spin correlators,
spin squeezing, and single-layer QAOA.
"""

from .couplings import (
    CouplingMatrix,
    ModeData,
    couplings_from_modes,
    equal_couplings,
    load_couplings,
    load_modes,
    save_couplings,
    save_modes,
)
from .engine import (
    EvolutionSpec,
    OperatorString,
    PauliString,
    PlainIsing,
    SpinEcho,
    density_matrix_element,
    expect_pauli,
    expect_string,
    full_density_matrix,
    no_leak_probability,
)
from .errors import (
    ConfigError,
    ConsistencyError,
    ModelViolationError,
    ResonanceError,
    ScatterSpinError,
    SizeError,
    StepSizeError,
    ValidationError,
)
from .experiments import (
    CorrelatorCurve,
    GhzResult,
    QaoaResult,
    SqueezeResult,
    correlation_plateau,
    correlator_curves,
    f_unequal,
    f_unequal_terms,
    ghz_fidelity,
    qaoa_single_layer,
    spin_squeezing,
    xi_squared,
)
from .kernels import (
    KernelArgs,
    KernelSet,
    SpinEchoKernelSet,
    a_kernel,
    b_kernel,
    csinc,
    f_kernel,
    kernel_set,
    spin_echo_kernel_set,
)
from .rates import (
    CaLaserParams,
    DerivedRates,
    ScatteringRates,
    ca_stark_and_rates,
    derive_rates,
    representative_ca_rates,
)

__version__ = "0.1.0"
