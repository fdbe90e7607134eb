""" Enums and lookup tables shared across d2dcell """
from enum import Enum


class Target(Enum):
    """ Receiver at which interference is evaluated """

    BS = "bs"
    DRX = "drx"


class Method(Enum):
    """ Evaluation path of an order-0 MGF """

    AUTO = "auto"
    CLOSED_FORM = "closed_form"
    SEMI_CLOSED = "semi_closed"
    QUADRATURE = "quadrature"


class Quantity(Enum):
    """ Metric names understood by sweeps and the Monte Carlo estimator """

    OUTAGE_BS = "outage_bs"
    OUTAGE_DRX_AT_D = "outage_drx_at_d"
    M_BAR = "m_bar"
    M_BAR_D2D = "m_bar_d2d"
    TAU = "tau"
    TAU_PER_REALIZATION = "tau_per_realization"
    P_D2D = "p_d2d"
    XI_DB = "xi_db"
    MGF_SINGLE_BS = "mgf_single_bs"
    MGF_SINGLE_DRX = "mgf_single_drx"
    MGF_CUE_DRX = "mgf_cue_drx"


class SweptParameter(Enum):
    XI_DB = "xi_db"
    D = "d"
    LAMBDA = "lambda"
    RHO_D_DBM = "rho_d_dbm"


# Quantities with an analytic counterpart in sweeps
ANALYTIC_QUANTITIES = (
    Quantity.OUTAGE_BS,
    Quantity.OUTAGE_DRX_AT_D,
    Quantity.M_BAR,
    Quantity.M_BAR_D2D,
    Quantity.TAU,
    Quantity.P_D2D,
    Quantity.XI_DB,
)

# Quantities that only the simulator produces
MONTE_CARLO_ONLY = (Quantity.TAU_PER_REALIZATION,)

# Tolerances of the validate verb: (absolute, relative)
VALIDATION_TOLERANCES = {
    Quantity.OUTAGE_BS: (0.005, 0.0),
    Quantity.P_D2D: (0.005, 0.0),
    Quantity.OUTAGE_DRX_AT_D: (0.01, 0.0),
    Quantity.M_BAR_D2D: (0.0, 0.01),
    Quantity.M_BAR: (0.0, 0.03),
    Quantity.TAU: (0.0, 0.03),
    Quantity.TAU_PER_REALIZATION: (0.0, 0.03),
}

# CLI exit codes
EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VALIDATION = 3
