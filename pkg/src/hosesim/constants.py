"""Physical constants (CODATA, SI)."""

import math

MU0 = 4e-7 * math.pi  # vacuum permeability, H/m (pre-2019 exact value)
PHI0 = 2.067833848e-15  # magnetic flux quantum, Wb
C0 = 2.99792458e8  # speed of light, m/s
