"""Numerical certification suites behind the ``verify`` CLI command.

Each suite re-derives one of the package's headline claims from scratch on
freshly generated random instances and reports pass/fail with a measured
worst case. Exit-code handling lives in the CLI; these functions just
compute.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import models as m
from .estimation import Dataset, fit
from .experiments import ExperimentConfig, run_scenario
from .linalg import pseudo_inverse
from .uncertainty import block_decomposition, category1_equivalence, category2_excess


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def penrose_suite(seed: int = 0, n_cases: int = 40, tol: float = 1e-10) -> CheckResult:
    """Four Penrose conditions on random matrices up to 20x20, half of them
    constructed rank-deficient."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for case in range(n_cases):
        rows = int(rng.integers(1, 21))
        cols = int(rng.integers(1, 21))
        if case % 2 == 0:
            a = rng.normal(size=(rows, cols))
        else:
            inner = int(rng.integers(1, min(rows, cols) + 1))
            a = rng.normal(size=(rows, inner)) @ rng.normal(size=(inner, cols))
        p = pseudo_inverse(a).pinv
        na = max(np.linalg.norm(a), 1e-300)
        np_ = max(np.linalg.norm(p), 1e-300)
        worst = max(
            worst,
            np.linalg.norm(a @ p @ a - a) / na,
            np.linalg.norm(p @ a @ p - p) / np_,
            np.max(np.abs(a @ p - (a @ p).T)),
            np.max(np.abs(p @ a - (p @ a).T)),
        )
    return CheckResult(
        "penrose_pseudoinverse",
        worst <= tol,
        f"worst residual {worst:.3e} (tolerance {tol:.0e}, {n_cases} matrices)",
    )


def cat1_linear_suite(
    seed: int = 0, n_datasets: int = 50, n_eval: int = 50, tol: float = 1e-8
) -> CheckResult:
    """Polynomial canonical basis vs its redundant extension: the two fitted
    models must give identical prediction-variance curves."""
    canonical = m.LinearModel((m.poly(0), m.poly(1), m.poly(2)))
    extended = m.LinearModel((m.poly(0), m.poly(1), m.affine(1.0, 1.0), m.poly(2)))
    transform = np.array(
        [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
    )
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_datasets):
        x = rng.uniform(-1.0, 1.0, 30)
        noise_std = rng.uniform(0.01, 0.5)
        y = 1.0 + 6.0 * x + x**2 + rng.normal(0.0, noise_std, x.size)
        data = Dataset(x, y)
        fc = fit(canonical, data)
        fo = fit(extended, data)
        report = category1_equivalence(
            canonical,
            fc.theta,
            extended,
            fo.theta,
            transform,
            data,
            rng.uniform(-1.0, 1.0, n_eval),
            tolerance=tol,
        )
        worst = max(worst, report.max_rel_diff)
    return CheckResult(
        "cat1_equivalence_linear",
        worst <= tol,
        f"max relative variance difference {worst:.3e} over {n_datasets} datasets "
        f"(tolerance {tol:.0e})",
    )


def variance_split_suite(
    seed: int = 0, n_instances: int = 100, tol: float = 1e-8
) -> CheckResult:
    """Extended-model variance must equal canonical variance + excess term,
    on random well-conditioned regressor matrices."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        kc = int(rng.integers(2, 6))
        ko = int(rng.integers(1, 4))
        n = int(rng.integers(kc + ko + 5, 41))
        phi_c = rng.normal(size=(kc, n))
        phi_o = rng.normal(size=(ko, n))
        decomp = block_decomposition(phi_c, phi_o)
        lam = rng.uniform(0.001, 1.0)
        pc = rng.normal(size=kc)
        po = rng.normal(size=ko)
        excess = category2_excess(decomp, pc, po, lam)
        full = np.concatenate([pc, po])
        direct = lam * full @ decomp.assembled_inverse @ full
        canonical = lam * pc @ decomp.canonical_gram_inverse @ pc
        err = abs(direct - (canonical + excess)) / max(direct, 1e-300)
        worst = max(worst, err)
        if excess < 0:
            return CheckResult("variance_split_identity", False, "negative excess term")
    return CheckResult(
        "variance_split_identity",
        worst <= tol,
        f"worst relative identity error {worst:.3e} over {n_instances} instances "
        f"(tolerance {tol:.0e})",
    )


def cat2_linear_suite(cfg: ExperimentConfig | None = None) -> CheckResult:
    """Mean prediction variance of the nested linear families must strictly
    increase with every added regressor."""
    cfg = replace(cfg or ExperimentConfig(), scenario="cat2_linear")
    result = run_scenario(cfg)
    means = np.array([run.prediction.mean_variance for run in result.runs])
    steps = np.diff(means)
    passed = bool(np.all(steps > 0))
    return CheckResult(
        "cat2_monotonicity_linear",
        passed,
        "mean variances " + " -> ".join(f"{v:.4e}" for v in means),
    )


def cat1_nonlinear_suite(cfg: ExperimentConfig | None = None) -> CheckResult:
    """Fitted canonical vs redundant two-unit sigmoid models: variance curves
    must agree within the nonlinear tolerance, given comparable losses."""
    cfg = replace(cfg or ExperimentConfig(), scenario="cat1_nonlinear")
    result = run_scenario(cfg)
    lc = result.runs[0].fit_result.loss
    lo = result.runs[1].fit_result.loss
    loss_gap = abs(lc - lo) / max(lc, lo)
    comp = result.comparison
    passed = loss_gap <= 0.01 and comp.passed
    return CheckResult(
        "cat1_equivalence_nonlinear",
        passed,
        f"loss gap {loss_gap:.2e}, max variance difference {comp.max_rel_diff:.2%} "
        f"(tolerance {comp.tolerance:.0%})",
    )


def cat2_mlp_suite(cfg: ExperimentConfig | None = None) -> CheckResult:
    """Width sweep: the minimal-width network must have the smallest mean
    prediction variance, and the widest must exceed it."""
    cfg = replace(cfg or ExperimentConfig(), scenario="cat2_mlp")
    result = run_scenario(cfg)
    means = np.array([run.prediction.mean_variance for run in result.runs])
    passed = bool(np.argmin(means) == 0 and means[-1] > means[0])
    widths = [run.model.layer_sizes[1] for run in result.runs]
    return CheckResult(
        "cat2_mlp_width_trend",
        passed,
        "mean variance by width "
        + ", ".join(f"{w}: {v:.3e}" for w, v in zip(widths, means)),
    )


def run_checks(cfg: ExperimentConfig | None = None, full: bool = False) -> list[CheckResult]:
    """The fast deterministic suites; ``full`` adds the nonlinear fits."""
    checks = [
        penrose_suite(),
        cat1_linear_suite(),
        variance_split_suite(),
        cat2_linear_suite(cfg),
    ]
    if full:
        checks.append(cat1_nonlinear_suite(cfg))
        checks.append(cat2_mlp_suite(cfg))
    return checks
