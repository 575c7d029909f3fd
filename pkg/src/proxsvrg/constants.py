"""Numerical tolerances shared by the library, the validators and the tests."""

# generic absolute tolerance for float comparisons
ATOL = 1e-9

# inequality checks: a residual counts as a violation below -(SLACK_ABS + SLACK_REL * scale)
SLACK_ABS = 1e-9
SLACK_REL = 1e-9

# identities that should hold up to rounding (reductions, collapses, idempotence)
IDENTITY_TOL = 1e-12

# nonexpansiveness of prox maps
NONEXPANSIVE_TOL = 1e-10

# brute-force prox oracle agreement
ORACLE_TOL = 1e-4

# component gradients vs central finite differences
FD_STEP = 1e-5
FD_REL_TOL = 1e-6

# unit-norm checks after row normalization
UNIT_NORM_TOL = 1e-10

# full gradient vs average of component gradients
AVERAGE_TOL = 1e-10

# reference ProxGD solve for PL instances
REFERENCE_STEP_TOL = 1e-12
REFERENCE_MAX_ITERS = 100_000

# iterates beyond this magnitude are treated as divergence
DIVERGENCE_BOUND = 1e12

# standard errors allowed between Monte Carlo and exact expectations
MC_SE_MULTIPLIER = 3.0
