"""Default parameter values for the numerical solvers."""

# Dense linear algebra
PIVOT_THRESHOLD = 1e-13
PERRON_TOLERANCE = 1e-13
PERRON_MAX_ITERATIONS = 100_000

# Model validation
STOCHASTIC_TOLERANCE = 1e-10
POLE_TOLERANCE = 1e-12

# Fixed-point iteration for G
G_TOLERANCE = 1e-14
G_MAX_ITERATIONS = 1_000_000

# Bracketing and bisection for theta
THETA_TOLERANCE = 1e-12
THETA_GRID_POINTS = 64
THETA_RADIUS_CAP = 1e6
THETA_BOUNDARY_STEPS = 40
THETA_RADIUS_MARGIN = 1e-6

# Step for the finite-difference check of the Perron curve derivative
FINITE_DIFFERENCE_STEP = 1e-6

# Residues with modulus below ZERO_TOLERANCE * |c(1)| are treated as zero
ZERO_TOLERANCE = 1e-9
AT_RB_TOLERANCE = 1e-9

# Determinants below this value mark a root of unity in the period check
PERIOD_DETERMINANT_TOLERANCE = 1e-8

# Comparison against the exact stationary prefix
NOISE_FLOOR = 1e-12
REMAINDER_TOLERANCE = 1e-14
DEFAULT_LEVELS = 200

# Condition estimates of I - U(0) above this value are logged
CONDITION_WARNING = 1e8

# Tolerances that can be overridden from the command line
DEFAULT_TOLERANCES = {
    "perron": PERRON_TOLERANCE,
    "g_matrix": G_TOLERANCE,
    "theta": THETA_TOLERANCE,
    "zero": ZERO_TOLERANCE,
    "at_rb": AT_RB_TOLERANCE,
    "noise_floor": NOISE_FLOOR,
    "remainder": REMAINDER_TOLERANCE,
    "stochastic": STOCHASTIC_TOLERANCE,
}
