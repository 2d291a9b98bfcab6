"""Delta-method prediction uncertainty for parametric regression models.

The package fits small parametric models (regressor expansions, fully
connected networks, fixed closed-form curves) by least squares, propagates
the parameter covariance to a per-input prediction variance through the
model's gradient, and certifies numerically that overparameterization
never shrinks that variance: redundant parameters leave it unchanged,
genuinely added flexibility strictly inflates it.
"""

from .estimation import Dataset, FitOptions, FitResult, fit, residual_variance
from .exceptions import (
    Category1DependenceError,
    ConsistencyError,
    NumericalError,
    RankDeficiencyError,
    RegressorCompatibilityError,
    ValidationError,
)
from .experiments import (
    DataConfig,
    EvalConfig,
    ExperimentConfig,
    ScenarioResult,
    emit_csv,
    generate_dataset,
    load_config,
    run_scenario,
)
from .linalg import (
    PseudoInverseResult,
    block_inverse,
    pseudo_inverse,
    solve_symmetric_psd,
)
from .models import (
    BasisTerm,
    FixedModel,
    LinearModel,
    MagicFormulaParams,
    MlpModel,
    ModelSpec,
    affine,
    cat1_parameter_transform,
    evaluate,
    jacobian,
    magic_formula,
    model_from_dict,
    model_to_dict,
    poly,
    reference_model,
    regressor_matrix,
    sigmoid,
    sigmoid_basis,
)
from .uncertainty import (
    BlockDecomposition,
    Category1Transform,
    EquivalenceReport,
    PredictionVariance,
    UncertaintyReport,
    block_decomposition,
    category1_equivalence,
    category2_excess,
    information_matrix,
    mean_prediction_variance,
    parameter_covariance,
    prediction_variance,
)

__version__ = "0.1.0"

__all__ = [
    "BasisTerm",
    "BlockDecomposition",
    "Category1DependenceError",
    "Category1Transform",
    "ConsistencyError",
    "DataConfig",
    "Dataset",
    "EquivalenceReport",
    "EvalConfig",
    "ExperimentConfig",
    "FitOptions",
    "FitResult",
    "FixedModel",
    "LinearModel",
    "MagicFormulaParams",
    "MlpModel",
    "ModelSpec",
    "NumericalError",
    "PredictionVariance",
    "PseudoInverseResult",
    "RankDeficiencyError",
    "RegressorCompatibilityError",
    "ScenarioResult",
    "UncertaintyReport",
    "ValidationError",
    "affine",
    "block_decomposition",
    "block_inverse",
    "cat1_parameter_transform",
    "category1_equivalence",
    "category2_excess",
    "emit_csv",
    "evaluate",
    "fit",
    "generate_dataset",
    "information_matrix",
    "jacobian",
    "load_config",
    "magic_formula",
    "mean_prediction_variance",
    "model_from_dict",
    "model_to_dict",
    "parameter_covariance",
    "poly",
    "prediction_variance",
    "pseudo_inverse",
    "reference_model",
    "regressor_matrix",
    "residual_variance",
    "run_scenario",
    "sigmoid",
    "sigmoid_basis",
    "solve_symmetric_psd",
]
