"""Delta-method prediction uncertainty and its behavior under overparameterization.

The pipeline: an information matrix accumulated from model gradients, the
parameter covariance ``residual_variance * pinv(information)``, and the
per-input prediction variance ``grad' P grad``. On top of that sit the two
certification tools:

* :func:`category1_equivalence` -- checks that a model whose extra
  parameters add no flexibility (they are a full-row-rank linear transform
  away from a canonical model) yields the *same* prediction variance.
* :func:`block_decomposition` / :func:`category2_excess` -- splits an
  extended linear model's variance into the canonical variance plus a
  provably nonnegative excess term, certifying that extra flexibility
  always inflates the calculated uncertainty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models
from .estimation import Dataset, residual_variance
from .exceptions import (
    Category1DependenceError,
    ConsistencyError,
    RankDeficiencyError,
    RegressorCompatibilityError,
    ValidationError,
)
from .linalg import SYMMETRY_RTOL, as_matrix, default_rank_tolerance, pseudo_inverse

# Rounding slack: quadratic forms this far below zero are clamped to zero,
# anything lower is treated as upstream corruption.
NEGATIVE_VARIANCE_SLACK = 1e-14


@dataclass(frozen=True)
class UncertaintyReport:
    """Information matrix, parameter covariance, and the rank decision."""

    information_matrix: np.ndarray
    parameter_covariance: np.ndarray
    information_rank: int
    residual_variance: float
    used_pseudo_inverse: bool


@dataclass(frozen=True)
class PredictionVariance:
    """Per-input delta-method variances and their arithmetic mean."""

    values: np.ndarray
    mean_variance: float
    eval_inputs: np.ndarray


@dataclass(frozen=True)
class Category1Transform:
    """Full-row-rank matrix T sending extended parameters to canonical ones
    (theta_canonical = T theta_extended)."""

    matrix: np.ndarray
    validated_full_row_rank: bool = False

    def __post_init__(self):
        m = as_matrix(self.matrix, "transform")
        if m.shape[0] > m.shape[1]:
            raise ValidationError(
                f"transform must be wide (rows <= cols), got shape {m.shape}"
            )
        object.__setattr__(self, "matrix", m)

    @classmethod
    def validated(cls, matrix) -> "Category1Transform":
        t = cls(matrix)
        rank = pseudo_inverse(t.matrix).numerical_rank
        if rank < t.matrix.shape[0]:
            raise RankDeficiencyError(
                f"transform has numerical rank {rank} < {t.matrix.shape[0]} rows"
            )
        return cls(t.matrix, validated_full_row_rank=True)


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of a category-1 variance comparison."""

    max_rel_diff: float
    worst_input: float
    passed: bool
    tolerance: float
    eval_inputs: np.ndarray
    canonical_variances: np.ndarray
    extended_variances: np.ndarray


@dataclass(frozen=True)
class BlockDecomposition:
    """Pieces of the block inverse of an extended linear model's gram matrix.

    For canonical regressors Phi_c (canonical_dim x N) and added regressors
    Phi_o (extra_dim x N):

    * ``canonical_gram_inverse``: (Phi_c Phi_c^T)^-1.
    * ``canonical_projector``: orthogonal projector onto the span of the
      canonical regressors (idempotent, N x N).
    * ``cross_map``: maps canonical-regressor coordinates to the best
      linear prediction of the added ones.
    * ``added_precision``: inverse gram of the added regressors after the
      canonical span is projected out (the Schur complement inverse);
      positive definite exactly when the extension genuinely adds
      flexibility.
    * ``excess_form``: the PSD quadratic form [[R, -R], [-R, R]] built from
      ``added_precision``; evaluated on :meth:`excess_coordinates` it gives
      the variance excess of the extended model.
    * ``assembled_inverse``: the block inverse of the full gram matrix.
    """

    canonical_gram_inverse: np.ndarray
    canonical_projector: np.ndarray
    cross_map: np.ndarray
    added_precision: np.ndarray
    excess_form: np.ndarray
    assembled_inverse: np.ndarray
    canonical_dim: int
    extra_dim: int

    def excess_coordinates(self, phi_c_x, phi_o_x) -> np.ndarray:
        """Stack [cross_map @ phi_c(x), phi_o(x)] for one evaluation input."""
        pc = _check_vector(phi_c_x, self.canonical_dim, "phi_c_x")
        po = _check_vector(phi_o_x, self.extra_dim, "phi_o_x")
        return np.concatenate([self.cross_map @ pc, po])


def _check_vector(v, expected: int, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.ndim != 1 or a.size != expected:
        raise ValidationError(f"{name} must be a vector of length {expected}, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains NaN or infinite entries")
    return a


def information_matrix(model, theta, data: Dataset) -> np.ndarray:
    """Sum of gradient outer products over the dataset (symmetrized)."""
    jac = models.jacobian(model, theta, data.inputs)
    info = jac.T @ jac
    return 0.5 * (info + info.T)


def parameter_covariance(
    info, res_variance: float, rank_tolerance: float | None = None
) -> UncertaintyReport:
    """Parameter covariance ``res_variance * pinv(info)``.

    The pseudo-inverse replaces the plain inverse so rank-deficient
    information matrices (category-1 overparameterization) are handled;
    ``used_pseudo_inverse`` records whether that mattered.
    """
    a = as_matrix(info, "information matrix")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValidationError(f"information matrix must be square, got {a.shape}")
    scale = np.max(np.abs(a))
    if scale > 0 and np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise ValidationError("information matrix is asymmetric beyond tolerance")
    if not np.isfinite(res_variance) or res_variance < 0:
        raise ValidationError(f"residual variance must be >= 0, got {res_variance}")
    a = 0.5 * (a + a.T)
    pr = pseudo_inverse(a, rank_tolerance)
    cov = res_variance * pr.pinv
    cov = 0.5 * (cov + cov.T)
    return UncertaintyReport(
        information_matrix=a,
        parameter_covariance=cov,
        information_rank=pr.numerical_rank,
        residual_variance=float(res_variance),
        used_pseudo_inverse=pr.numerical_rank < n,
    )


def _clamp_variance(value: float, context: str) -> float:
    if value < 0.0:
        if value < -NEGATIVE_VARIANCE_SLACK:
            raise ConsistencyError(
                f"{context} produced variance {value:.3e}, below the rounding "
                f"slack {-NEGATIVE_VARIANCE_SLACK:.0e}; covariance is corrupt"
            )
        return 0.0
    return float(value)


def prediction_variance(model, theta, covariance, x) -> float:
    """Delta-method variance grad' P grad at one input (clamped at zero)."""
    cov = as_matrix(covariance, "covariance")
    k = model.param_count
    if cov.shape != (k, k):
        raise ValidationError(f"covariance must be {k}x{k}, got {cov.shape}")
    grad = models.jacobian(model, theta, float(x))
    return _clamp_variance(float(grad @ cov @ grad), "prediction_variance")


def _variance_curve(model, theta, covariance, eval_inputs) -> np.ndarray:
    jac = models.jacobian(model, theta, eval_inputs)
    raw = np.einsum("ij,jk,ik->i", jac, covariance, jac)
    return np.array([_clamp_variance(v, "prediction_variance") for v in raw])


def mean_prediction_variance(model, theta, covariance, eval_inputs) -> PredictionVariance:
    """Variance at each evaluation input plus the arithmetic mean."""
    xs = np.asarray(eval_inputs, dtype=float)
    if xs.ndim != 1 or xs.size < 1:
        raise ValidationError("eval_inputs must be a nonempty 1-d array")
    if not np.all(np.isfinite(xs)):
        raise ValidationError("eval_inputs contains NaN or infinite entries")
    cov = as_matrix(covariance, "covariance")
    values = _variance_curve(model, theta, cov, xs)
    return PredictionVariance(
        values=values, mean_variance=float(values.mean()), eval_inputs=xs
    )


def category1_equivalence(
    canonical_model,
    canonical_theta,
    extended_model,
    extended_theta,
    transform: Category1Transform | np.ndarray,
    data: Dataset,
    eval_inputs,
    tolerance: float = 1e-8,
    compatibility_rtol: float = 1e-8,
) -> EquivalenceReport:
    """Compare prediction-variance curves of a canonical model and an
    extended model whose parameters map onto it via ``transform``.

    The structural precondition -- the extended model's gradient equals
    T' times the canonical gradient evaluated at the mapped parameters --
    is checked on the evaluation inputs, not assumed. Each side then runs
    the full pipeline (residual variance, information matrix, covariance,
    variance curve) and the maximum relative pointwise difference is
    reported against ``tolerance``.
    """
    if not isinstance(transform, Category1Transform):
        transform = Category1Transform.validated(transform)
    elif not transform.validated_full_row_rank:
        transform = Category1Transform.validated(transform.matrix)
    t = transform.matrix
    kc, ko = canonical_model.param_count, extended_model.param_count
    if t.shape != (kc, ko):
        raise ValidationError(
            f"transform shape {t.shape} does not match models ({kc}, {ko})"
        )
    xs = np.asarray(eval_inputs, dtype=float)
    if xs.ndim != 1 or xs.size < 1:
        raise ValidationError("eval_inputs must be a nonempty 1-d array")

    theta_o = np.asarray(extended_theta, dtype=float)
    jac_o = models.jacobian(extended_model, theta_o, xs)
    jac_mapped = models.jacobian(canonical_model, t @ theta_o, xs) @ t
    scale = max(np.max(np.abs(jac_o)), np.max(np.abs(jac_mapped)), 1e-300)
    row_err = np.max(np.abs(jac_o - jac_mapped), axis=1) / scale
    worst = int(np.argmax(row_err))
    if row_err[worst] > compatibility_rtol:
        raise RegressorCompatibilityError(
            f"extended regressor is not transform-compatible with the canonical "
            f"one: relative error {row_err[worst]:.3e} at input {xs[worst]!r}",
            worst_input=float(xs[worst]),
            worst_error=float(row_err[worst]),
        )

    curves = []
    for model, theta in (
        (canonical_model, canonical_theta),
        (extended_model, extended_theta),
    ):
        lam = residual_variance(model, theta, data)
        report = parameter_covariance(information_matrix(model, theta, data), lam)
        curves.append(_variance_curve(model, theta, report.parameter_covariance, xs))
    v_c, v_o = curves

    denom = np.maximum(v_c, v_o)
    rel = np.where(denom > 0, np.abs(v_c - v_o) / np.where(denom > 0, denom, 1.0), 0.0)
    worst = int(np.argmax(rel))
    return EquivalenceReport(
        max_rel_diff=float(rel[worst]),
        worst_input=float(xs[worst]),
        passed=bool(rel[worst] <= tolerance),
        tolerance=tolerance,
        eval_inputs=xs,
        canonical_variances=v_c,
        extended_variances=v_o,
    )


def block_decomposition(
    phi_c_matrix,
    phi_o_matrix,
    rank_tolerance: float | None = None,
    verify_rtol: float = 1e-8,
) -> BlockDecomposition:
    """Schur-complement decomposition of the stacked regressor gram matrix.

    ``phi_c_matrix`` (canonical_dim x N) and ``phi_o_matrix``
    (extra_dim x N) hold the regressors as columns. Raises
    :class:`Category1DependenceError` when the added regressors lie in the
    span of the canonical ones (the extension adds no flexibility, so no
    positive-definite Schur complement exists). The assembled block inverse
    is verified against the directly inverted full gram matrix.
    """
    phi_c = as_matrix(phi_c_matrix, "phi_c_matrix")
    phi_o = as_matrix(phi_o_matrix, "phi_o_matrix")
    if phi_c.shape[1] != phi_o.shape[1]:
        raise ValidationError(
            f"regressor matrices disagree on N: {phi_c.shape[1]} vs {phi_o.shape[1]}"
        )
    kc, n = phi_c.shape
    ko = phi_o.shape[0]

    gram_c = phi_c @ phi_c.T
    pr_c = pseudo_inverse(gram_c, rank_tolerance)
    if pr_c.numerical_rank < kc:
        raise RankDeficiencyError(
            f"canonical gram matrix is singular (rank {pr_c.numerical_rank} < {kc}); "
            "the canonical regressors are not independent on this data"
        )
    gram_c_inv = 0.5 * (pr_c.pinv + pr_c.pinv.T)
    projector = phi_c.T @ gram_c_inv @ phi_c

    inner = phi_o @ (np.eye(n) - projector) @ phi_o.T
    inner = 0.5 * (inner + inner.T)
    # Rank of the projected gram must be judged against the unprojected
    # scale: if every added regressor lies in the canonical span, inner is
    # uniformly tiny and a cutoff relative to its own largest singular
    # value could never notice.
    tol = (
        default_rank_tolerance(inner.shape)
        if rank_tolerance is None
        else float(rank_tolerance)
    )
    scale_o = np.linalg.norm(phi_o @ phi_o.T, 2)
    s_inner = np.linalg.svd(inner, compute_uv=False)
    effective_rank = int(np.sum(s_inner > tol * scale_o))
    if effective_rank < ko:
        raise Category1DependenceError(
            f"added regressors are linearly dependent on the canonical ones "
            f"(residual gram rank {effective_rank} < {ko}); the extension "
            "adds no flexibility -- compare via category1_equivalence instead"
        )
    pr_i = pseudo_inverse(inner, rank_tolerance)
    added_precision = 0.5 * (pr_i.pinv + pr_i.pinv.T)
    cross_map = phi_o @ phi_c.T @ gram_c_inv

    excess_form = np.block(
        [[added_precision, -added_precision], [-added_precision, added_precision]]
    )
    assembled = np.block(
        [
            [
                gram_c_inv + cross_map.T @ added_precision @ cross_map,
                -cross_map.T @ added_precision,
            ],
            [-added_precision @ cross_map, added_precision],
        ]
    )

    full = np.vstack([phi_c, phi_o])
    direct = pseudo_inverse(full @ full.T, rank_tolerance).pinv
    err = np.max(np.abs(assembled - direct))
    if err > verify_rtol * max(np.max(np.abs(direct)), 1e-300):
        raise ConsistencyError(
            f"assembled block inverse deviates from the direct inverse by "
            f"{err:.3e} (relative tolerance {verify_rtol:.0e})"
        )
    return BlockDecomposition(
        canonical_gram_inverse=gram_c_inv,
        canonical_projector=projector,
        cross_map=cross_map,
        added_precision=added_precision,
        excess_form=excess_form,
        assembled_inverse=assembled,
        canonical_dim=kc,
        extra_dim=ko,
    )


def category2_excess(
    decomp: BlockDecomposition,
    phi_c_x,
    phi_o_x,
    noise_variance: float,
    verify_rtol: float = 1e-8,
) -> float:
    """Variance excess of the extended model at one input.

    Computes ``noise_variance * chi' Q chi`` with chi the stacked excess
    coordinates; always >= 0, and zero exactly when the added regressor
    value equals its best linear prediction from the canonical one. The
    identity (extended variance = canonical variance + excess) is
    re-derived from the decomposition and checked before returning.
    """
    if not np.isfinite(noise_variance) or noise_variance < 0:
        raise ValidationError(f"noise variance must be >= 0, got {noise_variance}")
    pc = _check_vector(phi_c_x, decomp.canonical_dim, "phi_c_x")
    po = _check_vector(phi_o_x, decomp.extra_dim, "phi_o_x")
    chi = decomp.excess_coordinates(pc, po)
    excess = _clamp_variance(
        noise_variance * float(chi @ decomp.excess_form @ chi), "category2_excess"
    )

    full = np.concatenate([pc, po])
    direct = noise_variance * float(full @ decomp.assembled_inverse @ full)
    canonical = noise_variance * float(pc @ decomp.canonical_gram_inverse @ pc)
    err = abs(direct - (canonical + excess))
    if err > verify_rtol * max(abs(direct), abs(canonical) + excess, 1e-300):
        raise ConsistencyError(
            f"variance split identity violated: direct {direct:.6e} vs "
            f"canonical + excess {canonical + excess:.6e}"
        )
    return excess
