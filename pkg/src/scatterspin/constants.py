"""Physical constants (CODATA 2018) used by the Stark-shift calculator."""

HBAR = 1.054571817e-34  # J s
C_LIGHT = 299792458.0   # m / s
