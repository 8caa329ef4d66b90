"""Physical constants (SI, CODATA 2018) used by the Hamiltonian builders."""

import math

H_PLANCK = 6.62607015e-34      # J s
HBAR = H_PLANCK / (2 * math.pi)
PHI0 = 2.067833848e-15         # flux quantum h/2e, Wb
E_CHARGE = 1.602176634e-19     # C
