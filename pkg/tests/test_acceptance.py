"""Acceptance suite: every release-gating criterion with its tolerance.

Each test prints one PASS/FAIL line (run with ``pytest -s`` to see them
live). Criteria that need the fitted study scenarios share module-scoped
fixtures so each scenario runs once.
"""

import time

import numpy as np
import pytest

import deltauq as dq
from deltauq import Dataset, ExperimentConfig


def report(number, name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    print(f"{status} criterion {number} ({name}): {detail}")
    assert passed, f"criterion {number} ({name}) failed: {detail}"


@pytest.fixture(scope="module")
def cat1_result():
    return dq.run_scenario(ExperimentConfig(scenario="cat1_nonlinear"))


@pytest.fixture(scope="module")
def cat2_linear_result():
    return dq.run_scenario(ExperimentConfig(scenario="cat2_linear"))


@pytest.fixture(scope="module")
def cat2_mlp_result():
    return dq.run_scenario(ExperimentConfig(scenario="cat2_mlp"))


def test_criterion_1_cat1_linear_exact():
    canonical = dq.LinearModel((dq.poly(0), dq.poly(1), dq.poly(2)))
    extended = dq.LinearModel((dq.poly(0), dq.poly(1), dq.affine(1.0, 1.0), dq.poly(2)))
    transform = np.array(
        [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
    )
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        x = rng.uniform(-1.0, 1.0, 30)
        noise = rng.uniform(0.0, 0.5)
        y = 1.0 + 6.0 * x + x**2 + rng.normal(0.0, noise, 30)
        data = Dataset(x, y)
        fc = dq.fit(canonical, data)
        fo = dq.fit(extended, data)
        comp = dq.category1_equivalence(
            canonical, fc.theta, extended, fo.theta, transform,
            data, rng.uniform(-1.0, 1.0, 50), tolerance=1e-8,
        )
        worst = max(worst, comp.max_rel_diff)
    elapsed = time.perf_counter() - start
    report(
        1,
        "category-1 equivalence, linear exact",
        worst <= 1e-8 and elapsed < 1.0,
        f"max relative difference {worst:.3e} over 50 datasets in {elapsed:.2f}s",
    )


def test_criterion_2_cat1_nonlinear(cat1_result):
    result = cat1_result
    lc = result.runs[0].fit_result.loss
    lo = result.runs[1].fit_result.loss
    loss_gap = abs(lc - lo) / max(lc, lo)
    comp = result.comparison
    curves_close = comp.max_rel_diff <= 0.05
    report(
        2,
        "category-1 equivalence, nonlinear",
        loss_gap <= 0.01 and curves_close,
        f"loss gap {loss_gap:.2e} (<= 1%), max variance difference "
        f"{comp.max_rel_diff:.2%} at every grid point (<= 5%)",
    )


def test_criterion_2_runtime():
    start = time.perf_counter()
    dq.run_scenario(ExperimentConfig(scenario="cat1_nonlinear"))
    elapsed = time.perf_counter() - start
    report(
        2,
        "category-1 nonlinear runtime",
        elapsed < 30.0,
        f"scenario with restarts completed in {elapsed:.1f}s (< 30s)",
    )


def test_criterion_3_cat2_linear():
    start = time.perf_counter()
    result = dq.run_scenario(ExperimentConfig(scenario="cat2_linear"))
    elapsed = time.perf_counter() - start
    means = np.array([r.prediction.mean_variance for r in result.runs])
    steps = np.diff(means)
    ok = bool(np.all(steps > -1e-12) and np.all(steps > 0))
    report(
        3,
        "category-2 monotonicity, linear",
        ok and elapsed < 1.0,
        "mean variances "
        + " -> ".join(f"{v:.4e}" for v in means)
        + f" in {elapsed:.2f}s",
    )


def test_criterion_4_cat2_mlp(cat2_mlp_result):
    means = np.array([r.prediction.mean_variance for r in cat2_mlp_result.runs])
    widths = [r.model.layer_sizes[1] for r in cat2_mlp_result.runs]
    ok = bool(np.argmin(means) == 0 and means[-1] > means[0])
    report(
        4,
        "category-2 width sweep, mlp",
        ok,
        "mean variance by width "
        + ", ".join(f"{w}:{v:.2e}" for w, v in zip(widths, means)),
    )


def test_criterion_4_runtime():
    start = time.perf_counter()
    dq.run_scenario(ExperimentConfig(scenario="cat2_mlp"))
    elapsed = time.perf_counter() - start
    report(
        4,
        "category-2 mlp runtime",
        elapsed < 120.0,
        f"width sweep completed in {elapsed:.1f}s (< 2min)",
    )


def test_criterion_5_decomposition_identity():
    rng = np.random.default_rng(77)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        kc = int(rng.integers(2, 6))
        ko = int(rng.integers(1, 4))
        n = int(rng.integers(kc + ko + 5, 41))
        phi_c = rng.normal(size=(kc, n))
        phi_o = rng.normal(size=(ko, n))
        decomp = dq.block_decomposition(phi_c, phi_o)
        lam = rng.uniform(0.001, 1.0)
        pc = rng.normal(size=kc)
        po = rng.normal(size=ko)
        excess = dq.category2_excess(decomp, pc, po, lam)
        full = np.concatenate([pc, po])
        direct = lam * full @ decomp.assembled_inverse @ full
        canonical = lam * pc @ decomp.canonical_gram_inverse @ pc
        worst = max(worst, abs(direct - (canonical + excess)) / max(direct, 1e-300))
    elapsed = time.perf_counter() - start
    report(
        5,
        "decomposition identity",
        worst <= 1e-8 and elapsed < 1.0,
        f"worst relative identity error {worst:.3e} over 100 instances "
        f"in {elapsed:.2f}s",
    )


def test_criterion_6_noise_variance_recovery(
    cat1_result, cat2_linear_result, cat2_mlp_result
):
    rows = []
    ok = True
    for result in (cat1_result, cat2_linear_result, cat2_mlp_result):
        for run in result.runs:
            fr = run.fit_result
            if not fr.converged:
                continue
            inside = 0.005 <= fr.residual_variance <= 0.02
            ok = ok and inside
            rows.append(f"{run.model_id}={fr.residual_variance:.4f}")
    report(6, "noise variance recovery", ok and rows, "; ".join(rows))


def test_criterion_7_jacobian_correctness():
    rng = np.random.default_rng(4242)
    kinds = [
        dq.LinearModel((dq.poly(0), dq.poly(1), dq.poly(2))),
        dq.LinearModel((dq.poly(0), dq.affine(2.0, -1.0), dq.sigmoid_basis(3.0, 0.5))),
        dq.reference_model("canonical_linear"),
        dq.reference_model("over_cat2_linear(3)"),
        dq.MlpModel((1, 2, 1)),
        dq.MlpModel((1, 5, 1)),
        dq.MlpModel((1, 3, 2, 1)),
        dq.MlpModel((1, 4, 1), activation="tanh"),
        dq.FixedModel("magic_formula"),
        dq.FixedModel("canonical_nonlinear"),
        dq.FixedModel("over_cat1_nonlinear"),
    ]
    h = 1e-6
    worst = 0.0
    triples = 0
    while triples < 100:
        model = kinds[triples % len(kinds)]
        theta = rng.normal(0.0, 1.5, model.param_count)
        x = rng.uniform(-0.6, 0.6)
        analytic = dq.jacobian(model, theta, x)
        numeric = np.zeros_like(analytic)
        for i in range(theta.size):
            tp = theta.copy()
            tm = theta.copy()
            tp[i] += h
            tm[i] -= h
            numeric[i] = (dq.evaluate(model, tp, x) - dq.evaluate(model, tm, x)) / (2 * h)
        scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-12)
        worst = max(worst, np.abs(analytic - numeric).max() / scale)
        triples += 1
    report(
        7,
        "jacobian correctness",
        worst <= 1e-5,
        f"worst relative error {worst:.3e} over 100 (model, theta, x) triples",
    )


def test_criterion_8_penrose_property_suite():
    rng = np.random.default_rng(515)
    worst = 0.0
    for case in range(60):
        rows = int(rng.integers(1, 21))
        cols = int(rng.integers(1, 21))
        if case % 2 == 0:
            a = rng.normal(size=(rows, cols))
        else:
            inner = int(rng.integers(1, min(rows, cols) + 1))
            a = rng.normal(size=(rows, inner)) @ rng.normal(size=(inner, cols))
        p = dq.pseudo_inverse(a).pinv
        na = max(np.linalg.norm(a), 1e-300)
        np_ = max(np.linalg.norm(p), 1e-300)
        worst = max(
            worst,
            np.linalg.norm(a @ p @ a - a) / na,
            np.linalg.norm(p @ a @ p - p) / np_,
            np.max(np.abs(a @ p - (a @ p).T)),
            np.max(np.abs(p @ a - (p @ a).T)),
        )
    report(
        8,
        "pseudo-inverse Penrose suite",
        worst <= 1e-10,
        f"worst Penrose residual {worst:.3e} over 60 matrices up to 20x20",
    )


def test_criterion_9_rank_diagnostics(cat1_result, cat2_linear_result):
    over_run = cat1_result.runs[1]
    redundant_rank_deficient = (
        over_run.report.information_rank < over_run.model.param_count
    )
    extended_full = all(
        run.report.information_rank == run.model.param_count
        for run in cat2_linear_result.runs[1:]
    )
    detail = (
        f"redundant model rank {over_run.report.information_rank}/"
        f"{over_run.model.param_count}; extended linear ranks "
        + ", ".join(
            f"{r.report.information_rank}/{r.model.param_count}"
            for r in cat2_linear_result.runs[1:]
        )
    )
    report(9, "rank diagnostics", redundant_rank_deficient and extended_full, detail)


def test_criterion_10_determinism(tmp_path):
    ok = True
    details = []
    for scenario in ("cat2_linear", "cat1_nonlinear"):
        cfg = ExperimentConfig(scenario=scenario)
        a = dq.emit_csv(dq.run_scenario(cfg), tmp_path / f"{scenario}_a")
        b = dq.emit_csv(dq.run_scenario(cfg), tmp_path / f"{scenario}_b")
        same = all(a[k].read_bytes() == b[k].read_bytes() for k in a)
        ok = ok and same
        details.append(f"{scenario}: {'identical' if same else 'DIFFER'}")
    report(10, "byte-identical reruns", ok, "; ".join(details))
