"""oraclebench: oracle-inequality machinery and desk-scale rate experiments.

The package has three layers:

* primitives: empirical risk and ERM over finite dictionaries (``model``),
  empirical Orlicz-norm and concentration evaluators (``concentration``),
  localization, peeling and chaining complexity (``complexity``);
* solvers: l1-power penalized regression with certified optimality gaps and
  the closed-form penalty/residual builders (``solvers``);
* harness: seeded Monte Carlo scenarios that measure exact and nonexact
  oracle-inequality slacks and fit their decay rates (``harness``), with a
  CLI front end (``cli``).
"""

from .complexity import (
    ComplexityProfile,
    LocalizedSupInput,
    PeelingBound,
    covering_number,
    dudley_gamma2,
    expected_localized_sup,
    fixed_point_lambda,
    l1_complexity_profile,
    localized_star_hull_sup,
    lq_localized_bound,
    maurey_l1_gamma2,
    peeling_bound,
    sup_deviation,
)
from .concentration import (
    BernsteinCertificate,
    PsiNormEstimate,
    adamczak_bound,
    bernstein_from_psi1,
    bernstein_verify,
    envelope_psi1,
    psi_alpha_norm,
    single_function_bound,
    weak_variance,
)
from .errors import BracketError, InvalidInputError, InvalidProfileError, IterationLimitError
from .harness import (
    BetaStarSpec,
    NoiseSpec,
    OracleReport,
    RateFit,
    ScenarioConfig,
    ScenarioResult,
    config_from_mapping,
    derive_seed,
    rate_fit,
    run_finite_gap,
    run_isomorphy,
    run_lq_rerm,
    run_scenario,
    run_square_lasso,
    write_rows_csv,
    write_summary_csv,
)
from .model import (
    FiniteModel,
    L1BallModel,
    LossSpec,
    RiskEstimate,
    Sample,
    empirical_risk,
    erm_finite,
    prediction_risk,
    risk_estimate,
)
from .solvers import (
    RermSolution,
    ResidualSpec,
    criterion_bound,
    erm_residual,
    generalized_inverse,
    l1_penalty_level,
    project_l1_ball,
    rerm_regularizer,
    rerm_residual,
    solve_lasso,
    solve_lq_rerm,
    solve_square_lasso,
    vc_rate,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "BetaStarSpec",
    "BernsteinCertificate",
    "BracketError",
    "ComplexityProfile",
    "FiniteModel",
    "InvalidInputError",
    "InvalidProfileError",
    "IterationLimitError",
    "L1BallModel",
    "LocalizedSupInput",
    "LossSpec",
    "NoiseSpec",
    "OracleReport",
    "PeelingBound",
    "PsiNormEstimate",
    "RateFit",
    "RermSolution",
    "ResidualSpec",
    "RiskEstimate",
    "Sample",
    "ScenarioConfig",
    "ScenarioResult",
    "adamczak_bound",
    "bernstein_from_psi1",
    "bernstein_verify",
    "config_from_mapping",
    "covering_number",
    "criterion_bound",
    "derive_seed",
    "dudley_gamma2",
    "empirical_risk",
    "envelope_psi1",
    "erm_finite",
    "erm_residual",
    "expected_localized_sup",
    "fixed_point_lambda",
    "generalized_inverse",
    "l1_complexity_profile",
    "l1_penalty_level",
    "localized_star_hull_sup",
    "lq_localized_bound",
    "maurey_l1_gamma2",
    "peeling_bound",
    "prediction_risk",
    "project_l1_ball",
    "psi_alpha_norm",
    "rate_fit",
    "rerm_regularizer",
    "rerm_residual",
    "risk_estimate",
    "run_finite_gap",
    "run_isomorphy",
    "run_lq_rerm",
    "run_scenario",
    "run_square_lasso",
    "single_function_bound",
    "solve_lasso",
    "solve_lq_rerm",
    "solve_square_lasso",
    "sup_deviation",
    "vc_rate",
    "weak_variance",
    "write_rows_csv",
    "write_summary_csv",
]
