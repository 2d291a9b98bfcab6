"""Least-squares fitting: exact linear path and multistart nonlinear path."""

import numpy as np
import pytest

import deltauq as dq
from deltauq import Dataset, FitOptions, NumericalError, ValidationError
from deltauq.linalg import pseudo_inverse


def study_dataset(seed=18):
    cfg = dq.ExperimentConfig(data=dq.DataConfig(seed=seed))
    return dq.generate_dataset(cfg)


class TestDataset:
    def test_validation(self):
        with pytest.raises(ValidationError):
            Dataset([1.0, 2.0], [1.0])
        with pytest.raises(ValidationError):
            Dataset([], [])
        with pytest.raises(ValidationError):
            Dataset([1.0, np.nan], [0.0, 0.0])

    def test_size(self):
        assert Dataset([0.0, 1.0], [1.0, 2.0]).size == 2


class TestResidualVariance:
    def test_perfect_fit_is_zero(self):
        model = dq.LinearModel((dq.poly(0), dq.poly(1)))
        data = Dataset([0.0, 1.0, 2.0], [1.0, 3.0, 5.0])
        assert dq.residual_variance(model, [1.0, 2.0], data) == 0.0

    def test_constant_zero_model_mean_of_squares(self):
        model = dq.LinearModel((dq.poly(0),))
        data = Dataset([0.0, 1.0], [1.0, -1.0])
        assert dq.residual_variance(model, [0.0], data) == 1.0

    def test_true_parameters_recover_noise_level(self):
        # at the data-generating coefficients the residuals are exactly the
        # injected noise, so the value sits near its 0.01 variance
        data = study_dataset()
        model = dq.FixedModel("magic_formula")
        lam = dq.residual_variance(model, [14.0, 0.1, 0.6, -0.2], data)
        assert 0.006 <= lam <= 0.015


class TestLinearFit:
    def test_exact_noise_free_line(self):
        model = dq.LinearModel((dq.poly(0), dq.poly(1)))
        data = Dataset([0.0, 1.0, 2.0], [1.0, 3.0, 5.0])
        result = dq.fit(model, data)
        np.testing.assert_allclose(result.theta, [1.0, 2.0], atol=1e-12)
        assert result.loss <= 1e-24
        assert result.converged
        assert result.iterations == 0
        assert result.restarts_used == 0
        assert result.design_rank == 2
        assert not result.rank_deficient

    def test_least_norm_solution_on_redundant_basis(self):
        # quadratic truth fitted with the redundant basis [1, x, x+1, x^2]:
        # the minimizers form an affine set; the fit must pick the one the
        # pseudo-inverse picks (minimum norm, orthogonal to the null space)
        rng = np.random.default_rng(8)
        x = rng.uniform(-1, 1, 30)
        y = 1.0 + 6.0 * x + x**2
        model = dq.LinearModel((dq.poly(0), dq.poly(1), dq.affine(1.0, 1.0), dq.poly(2)))
        data = Dataset(x, y)
        result = dq.fit(model, data)
        assert result.loss <= 1e-20
        assert result.design_rank == 3
        assert result.rank_deficient
        # oracle: least-norm solution from the pseudo-inverse of the design
        design = dq.jacobian(model, np.zeros(4), x)
        expected = pseudo_inverse(design).pinv @ y
        np.testing.assert_allclose(result.theta, expected, atol=1e-12)
        # any solution satisfies [t0 + t2, t1 + t2, t3] = [1, 6, 1]
        t = result.theta
        np.testing.assert_allclose(
            [t[0] + t[2], t[1] + t[2], t[3]], [1.0, 6.0, 1.0], atol=1e-10
        )
        # minimum norm means no component along the null direction (1,1,-1,0)
        assert abs(t @ np.array([1.0, 1.0, -1.0, 0.0])) < 1e-10

    def test_repeated_calls_bitwise_identical(self):
        data = study_dataset()
        model = dq.reference_model("over_cat2_linear(2)")
        a = dq.fit(model, data)
        b = dq.fit(model, data)
        assert np.array_equal(a.theta, b.theta)
        assert a.loss == b.loss

    def test_degenerate_data_carries_rank_flag(self):
        model = dq.LinearModel((dq.poly(0), dq.poly(1)))
        data = Dataset([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        result = dq.fit(model, data)
        assert result.rank_deficient
        assert result.design_rank == 1


class TestNonlinearFit:
    def test_study_fit_recovers_noise_variance(self):
        data = study_dataset()
        result = dq.fit(dq.FixedModel("canonical_nonlinear"), data, FitOptions(seed=0))
        assert 0.005 <= result.residual_variance <= 0.02
        assert result.converged
        assert result.best_restart_seed is not None
        assert result.residual_variance == result.loss / data.size

    def test_fixed_seed_bitwise_reproducible(self):
        data = study_dataset()
        model = dq.MlpModel((1, 2, 1))
        opts = FitOptions(seed=7, restarts=5)
        a = dq.fit(model, data, opts)
        b = dq.fit(model, data, opts)
        assert np.array_equal(a.theta, b.theta)
        assert a.loss == b.loss
        assert a.best_restart_seed == b.best_restart_seed

    def test_fitted_curve_tracks_truth(self):
        # the fitted two-unit model should sit within noise of the true curve
        data = study_dataset()
        result = dq.fit(dq.FixedModel("canonical_nonlinear"), data, FitOptions(seed=0))
        grid = np.linspace(-0.6, 0.6, 50)
        fitted = dq.evaluate(dq.FixedModel("canonical_nonlinear"), result.theta, grid)
        rmse = np.sqrt(np.mean((fitted - dq.magic_formula(grid)) ** 2))
        assert rmse < 0.05

    def test_converged_fit_meets_gradient_criterion(self):
        data = study_dataset()
        model = dq.FixedModel("canonical_nonlinear")
        opts = FitOptions(seed=0)
        result = dq.fit(model, data, opts)
        assert result.converged

        def grad_norm(theta):
            jac = dq.jacobian(model, theta, data.inputs)
            res = data.outputs - dq.evaluate(model, theta, data.inputs)
            return np.linalg.norm(jac.T @ res)

        # reconstruct the winning restart's start point from its seed
        rng = np.random.default_rng((opts.seed, result.best_restart_seed))
        theta0 = rng.normal(0.0, opts.init_stddev, model.param_count)
        assert grad_norm(result.theta) <= opts.rel_grad_tol * grad_norm(theta0)

    def test_nested_linear_losses_monotone(self):
        data = study_dataset()
        losses = []
        for tag in (
            "canonical_linear",
            "over_cat2_linear(1)",
            "over_cat2_linear(2)",
            "over_cat2_linear(3)",
        ):
            losses.append(dq.fit(dq.reference_model(tag), data).loss)
        # a larger nested basis can always reproduce the smaller fit
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_all_restarts_diverging_raises(self):
        # outputs this large overflow the squared loss at every start point
        data = Dataset([0.0, 1.0, 2.0], [1e200, -1e200, 1e200])
        with pytest.raises(NumericalError, match="diverged"):
            dq.fit(dq.MlpModel((1, 2, 1)), data, FitOptions(restarts=3, seed=0))

    def test_restart_count_validated(self):
        data = study_dataset()
        with pytest.raises(ValidationError):
            dq.fit(dq.MlpModel((1, 2, 1)), data, FitOptions(restarts=0))


class TestFitOptions:
    def test_from_dict_round_trip(self):
        opts = FitOptions(restarts=7, seed=3, init_stddev=0.5)
        assert FitOptions.from_dict(opts.to_dict()) == opts

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValidationError):
            FitOptions.from_dict({"restarts": 5, "momentum": 0.9})
