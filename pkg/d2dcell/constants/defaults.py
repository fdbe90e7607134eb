""" Repository for the default system parameters used across d2dcell.
Units at this level are the ones users type: meters, users/m², dBm, dB """

# Main system parameter values
CELL_RADIUS = 500.0
D2D_RANGE = 35.0
DENSITY = 5e-5
RHO_BS_DBM = -80.0
RHO_D_DBM = -70.0
GAMMA_DB = 0.0
XI_DB = 0.0
ALPHA_C = 4.0
ALPHA_D = 4.0

# Number of terms of the Gamma approximation for unequal exponents
GAMMA_APPROX_N = 6

# Rayleigh on both desired links unless a figure says otherwise
M_CELLULAR = 1
M_D2D = 1

# Highest derivative order of an MGF, i.e. Nakagami m <= 5
MAX_DERIVATIVE_ORDER = 4

MGF_QUADRATURE = {
    "rel_tol": 1e-9,
    "abs_tol": 1e-12,
    "max_subdivisions": 2000,
}
METRIC_QUADRATURE = {
    "rel_tol": 1e-6,
    "abs_tol": 1e-9,
    "max_subdivisions": 200,
}

# Search interval of the QoS solver, as xi / rho_D
QOS_XI_RATIO_BOUNDS = (1e-6, 1e6)
QOS_OUTAGE_TOLERANCE = 1e-4

MC_SEED = 20240101
MC_MIN_REALIZATIONS = 100
CI_Z_SCORE = 1.96

# Relative tolerance under which xi is treated as equal to rho_D and
# alpha_C as equal to alpha_D
EQUALITY_RTOL = 1e-12
