"""Least-squares parameter estimation.

Linear-in-parameters models are solved exactly (least-norm via the SVD
pseudo-inverse, no iteration). Nonlinear models run seeded multi-start
Levenberg-Marquardt with analytic jacobians; given a seed the whole
procedure is bit-reproducible, restart r drawing its start point from
``numpy.random.default_rng((seed, r))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models
from .exceptions import NumericalError, ValidationError
from .linalg import pseudo_inverse

# LM damping schedule: x10 on rejected steps, /10 on accepted ones.
_DAMPING_INIT = 1e-3
_DAMPING_GROW = 10.0
_DAMPING_SHRINK = 10.0
_DAMPING_MAX = 1e12


@dataclass(frozen=True)
class Dataset:
    """Paired scalar inputs and noisy outputs."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.outputs, dtype=float)
        if x.ndim != 1 or y.ndim != 1:
            raise ValidationError("dataset inputs and outputs must be 1-d")
        if x.size != y.size:
            raise ValidationError(
                f"inputs ({x.size}) and outputs ({y.size}) differ in length"
            )
        if x.size < 1:
            raise ValidationError("dataset must contain at least one point")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValidationError("dataset contains NaN or infinite entries")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "outputs", y)

    @property
    def size(self) -> int:
        return int(self.inputs.size)


@dataclass(frozen=True)
class FitOptions:
    restarts: int = 20
    seed: int = 0
    max_iterations: int = 500
    rel_step_tol: float = 1e-10
    rel_grad_tol: float = 1e-8
    init_stddev: float = 1.5

    @classmethod
    def from_dict(cls, d: dict) -> "FitOptions":
        known = {f: d[f] for f in cls.__dataclass_fields__ if f in d}
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValidationError(f"unknown fit options: {sorted(unknown)}")
        return cls(**known)

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in self.__dataclass_fields__}


@dataclass(frozen=True)
class FitResult:
    """Estimated parameters and diagnostics.

    ``residual_variance`` is the mean squared residual, exactly
    ``loss / N``. ``design_rank`` is only set for linear models (numerical
    rank of the regressor matrix); a value below param_count means the
    least-norm solution was selected from an affine set of minimizers.
    """

    theta: np.ndarray
    loss: float
    residual_variance: float
    converged: bool
    iterations: int
    restarts_used: int
    best_restart_seed: int | None = None
    design_rank: int | None = None

    @property
    def rank_deficient(self) -> bool:
        return self.design_rank is not None and self.design_rank < self.theta.size


def residual_variance(model: models.ModelSpec, theta, data: Dataset) -> float:
    """Mean squared prediction error (1/N) sum (y_n - f(x_n; theta))^2."""
    res = data.outputs - models.evaluate(model, theta, data.inputs)
    return float(res @ res) / data.size


def fit(model: models.ModelSpec, data: Dataset, opts: FitOptions | None = None) -> FitResult:
    """Minimize the sum of squared residuals over theta.

    Linear models get the exact least-norm least-squares solution. Nonlinear
    models run ``opts.restarts`` Levenberg-Marquardt descents from seeded
    normal(0, init_stddev^2) start points; the lowest final loss wins, ties
    broken by the lowest restart index.

    Raises :class:`NumericalError` if every restart diverges.
    """
    opts = opts or FitOptions()
    if isinstance(model, models.LinearModel):
        return _fit_linear(model, data)
    return _fit_nonlinear(model, data, opts)


def _fit_linear(model: models.LinearModel, data: Dataset) -> FitResult:
    design = models.jacobian(model, np.zeros(model.param_count), data.inputs)
    pr = pseudo_inverse(design)
    theta = pr.pinv @ data.outputs
    res = data.outputs - design @ theta
    loss = float(res @ res)
    return FitResult(
        theta=theta,
        loss=loss,
        residual_variance=loss / data.size,
        converged=True,
        iterations=0,
        restarts_used=0,
        best_restart_seed=None,
        design_rank=pr.numerical_rank,
    )


def _fit_nonlinear(model: models.ModelSpec, data: Dataset, opts: FitOptions) -> FitResult:
    if opts.restarts < 1:
        raise ValidationError("at least one restart is required")
    k = model.param_count
    best: FitResult | None = None
    failures: list[str] = []
    for r in range(opts.restarts):
        rng = np.random.default_rng((opts.seed, r))
        theta0 = rng.normal(0.0, opts.init_stddev, k)
        try:
            theta, loss, converged, iters = _levenberg_marquardt(
                model, data, theta0, opts
            )
        except NumericalError as exc:
            failures.append(f"restart {r}: {exc}")
            continue
        if best is None or loss < best.loss:
            best = FitResult(
                theta=theta,
                loss=loss,
                residual_variance=loss / data.size,
                converged=converged,
                iterations=iters,
                restarts_used=opts.restarts,
                best_restart_seed=r,
            )
    if best is None:
        raise NumericalError(
            f"all {opts.restarts} restarts diverged fitting "
            f"{type(model).__name__}: " + "; ".join(failures[:3])
        )
    return best


def _sum_of_squares(res) -> float:
    # overflow to inf is the divergence signal handled by the caller
    with np.errstate(over="ignore"):
        return float(res @ res)


def _levenberg_marquardt(model, data, theta0, opts):
    """One damped Gauss-Newton descent; returns (theta, loss, converged, iters)."""
    x, y = data.inputs, data.outputs
    theta = np.asarray(theta0, dtype=float)
    res = y - models.evaluate(model, theta, x)
    loss = _sum_of_squares(res)
    if not np.isfinite(loss):
        raise NumericalError("non-finite loss at the start point")
    jac = models.jacobian(model, theta, x)
    grad = jac.T @ res  # half the negative loss gradient
    grad_norm0 = float(np.linalg.norm(grad))
    damping = _DAMPING_INIT
    eye = np.eye(theta.size)
    converged = False
    iterations = 0

    def step_small(step):
        return np.linalg.norm(step) < opts.rel_step_tol * (
            np.linalg.norm(theta) + np.finfo(float).tiny
        )

    while iterations < opts.max_iterations:
        iterations += 1
        try:
            step = np.linalg.solve(jac.T @ jac + damping * eye, grad)
        except np.linalg.LinAlgError:
            damping *= _DAMPING_GROW
            if damping > _DAMPING_MAX:
                break
            continue
        candidate = theta + step
        res_new = y - models.evaluate(model, candidate, x)
        loss_new = _sum_of_squares(res_new)
        if np.isfinite(loss_new) and loss_new < loss:
            theta, res, loss = candidate, res_new, loss_new
            jac = models.jacobian(model, theta, x)
            grad = jac.T @ res
            damping = max(damping / _DAMPING_SHRINK, 1e-15)
            grad_small = np.linalg.norm(grad) <= opts.rel_grad_tol * grad_norm0
            if step_small(step) or grad_small:
                converged = True
                break
        else:
            # Rejected step below the step tolerance: the parameters cannot
            # move at float resolution, which is the step criterion too.
            if step_small(step):
                converged = True
                break
            damping *= _DAMPING_GROW
            if damping > _DAMPING_MAX:
                # stalled: no acceptable step at any damping
                break
    return theta, loss, converged, iterations
