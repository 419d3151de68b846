"""Physical constants (CODATA 2018, exact SI where defined)."""
from scipy import constants as _c

C = _c.c
HBAR = _c.hbar
EPSILON_0 = _c.epsilon_0

CONSTANTS = {"c": C, "hbar": HBAR, "epsilon_0": EPSILON_0}
