"""Numerical constants shared across modules"""

# |sin(zeta)|, |sin(theta)| and EG - F^2 below this are singular
EPS_SING = 1e-9

# Absolute floor for relative residual denominators
RESIDUAL_FLOOR = 1e-300

DEFAULT_SEED = 0x4519

# 17 significant digits round-trip binary64 exactly
FLOAT_FORMAT = "%.17g"

MAX_SAMPLES = 10_000_000
MIN_CURVE_SAMPLES = 8
