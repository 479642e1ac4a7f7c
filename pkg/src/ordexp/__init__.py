"""Improved estimation of ordered scale powers for two shifted-exponential samples."""
from .errors import (
    BracketError,
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    IOFailure,
    NumericError,
    OrdexpError,
    ValidationError,
)
from .kernel import baee_constant, constants, pcaee_constant, psi_solve, umvue_constant
from .losses import (
    ENTROPY,
    QUADRATIC,
    SYMMETRIC,
    CustomLoss,
    LossSpec,
    loss_deriv,
    loss_eval,
    parse_loss,
    validate_loss_domain,
)
from .mcrisk import RiskRow, SimConfig, gpc_estimate, simulate_risk
from .model import (
    EstimationConfig,
    RawDataset,
    SufficientStats,
    ks_test,
    pivots,
    proschan_dataset,
    summarize,
)
from .sigma1 import EstimateReport

__version__ = "0.1.0"

__all__ = [
    "BracketError", "ConvergenceError", "DegenerateDataError", "DomainError", "IOFailure", "NumericError",
    "OrdexpError", "ValidationError", "baee_constant", "constants", "pcaee_constant",
    "psi_solve", "umvue_constant", "ENTROPY", "QUADRATIC", "SYMMETRIC", "CustomLoss",
    "LossSpec", "loss_deriv", "loss_eval", "parse_loss", "validate_loss_domain", "RiskRow",
    "SimConfig", "gpc_estimate", "simulate_risk", "EstimationConfig", "RawDataset",
    "SufficientStats", "ks_test", "pivots", "proschan_dataset", "summarize", "EstimateReport",
]
