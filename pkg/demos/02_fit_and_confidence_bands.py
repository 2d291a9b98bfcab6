"""Fit the tire-slip curve and compute delta-method confidence bands.

Generates the simulation dataset (traction force vs wheel slip plus
Gaussian noise), fits the minimal two-unit sigmoid model by multistart
Levenberg-Marquardt, and propagates the parameter covariance to a
pointwise prediction variance. The printed band is the 95% interval
that predictions.csv carries.
"""

import numpy as np

import deltauq as dq

cfg = dq.ExperimentConfig()
data = dq.generate_dataset(cfg)
print(f"dataset: {data.size} points, x in [{data.inputs.min():.2f}, {data.inputs.max():.2f}]")

model = dq.reference_model("canonical_nonlinear")
result = dq.fit(model, data, cfg.fit)
print(
    f"fit: loss {result.loss:.4f}, residual variance {result.residual_variance:.5f} "
    f"(true noise variance {cfg.data.noise_variance}), converged {result.converged}, "
    f"best restart {result.best_restart_seed}"
)

info = dq.information_matrix(model, result.theta, data)
report = dq.parameter_covariance(info, result.residual_variance)
print(f"information rank {report.information_rank}/{model.param_count}")

grid = np.linspace(-0.6, 0.6, 13)
pred = dq.mean_prediction_variance(model, result.theta, report.parameter_covariance, grid)
fitted = dq.evaluate(model, result.theta, grid)
truth = dq.magic_formula(grid, cfg.magic)

print(f"\nmean prediction variance {pred.mean_variance:.3e}")
print(f"{'x':>6} {'truth':>9} {'fit':>9} {'std':>9}  95% band")
for x, t, f, v in zip(grid, truth, fitted, pred.values):
    s = np.sqrt(v)
    print(f"{x:6.2f} {t:9.4f} {f:9.4f} {s:9.4f}  [{f - 1.96 * s:8.4f}, {f + 1.96 * s:8.4f}]")
