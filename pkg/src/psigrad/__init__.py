"""Gradient descent with psi-weighted spectral stepsizes and rate certificates."""
from .asymptotics import ComponentProfile, ZigzagReport, predicted_limits, zigzag_analysis
from .certificates import (
    ElsProofCertificate,
    PolyakCase,
    PolyakProofCertificate,
    RateCheck,
    check_general_rate,
    check_quadratic_rate,
    els_certificate,
    els_proof_parameters,
    els_rate,
    els_residual_decomposition,
    polyak_case1_certificate,
    polyak_case2_certificate,
    polyak_case2_minimizer,
    polyak_case_split,
    theoretical_rate,
    worst_case_start,
)
from .errors import *  # noqa: F401,F403
from .oracles import (
    SmoothStronglyConvexOracle,
    dense_quadratic_oracle,
    interpolation_residual,
    lse_ridge_oracle,
    quadratic_as_oracle,
)
from .solver import IterateRecord, Metric, StoppingRule, Termination, Trace, contraction_series, run
from .spectral import (
    QuadraticProblem,
    RelaxedSpectrum,
    SpectralWeight,
    Spectrum,
    kantorovich_bound,
    kantorovich_ratio,
)
from .stepsizes import (
    ExactLineSearchNumeric,
    PolyakGeneral,
    PsiFamily,
    compute_step,
    family_step,
    parse_rule,
    parse_weight,
)

__version__ = "0.1.0"
