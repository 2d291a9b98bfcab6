"""Simulation-study harness: seeded data generation, the three scenario
pipelines, and deterministic CSV output.

Everything emitted is a pure function of (config, seed): the RNG is numpy's
default PCG64 generator seeded explicitly, fits derive per-model seeds from
the fit seed, and CSV floats are written with round-trip ``repr``. Two runs
with the same config produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import models as m
from .estimation import Dataset, FitOptions, FitResult, fit
from .exceptions import NumericalError, ValidationError
from .models import MagicFormulaParams, magic_formula
from .uncertainty import (
    EquivalenceReport,
    PredictionVariance,
    UncertaintyReport,
    category1_equivalence,
    information_matrix,
    mean_prediction_variance,
    parameter_covariance,
)

SCENARIOS = ("cat1_nonlinear", "cat2_linear", "cat2_mlp", "custom")

# Half width of the 95% Gaussian interval written to predictions.csv.
BAND_MULTIPLIER = 1.96


@dataclass(frozen=True)
class DataConfig:
    n_points: int = 200
    x_range: tuple[float, float] = (-0.6, 0.6)
    noise_variance: float = 0.01
    seed: int = 18


@dataclass(frozen=True)
class EvalConfig:
    n_points: int = 100


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "cat1_nonlinear"
    data: DataConfig = field(default_factory=DataConfig)
    magic: MagicFormulaParams = field(default_factory=MagicFormulaParams)
    fit: FitOptions = field(default_factory=FitOptions)
    eval: EvalConfig = field(default_factory=EvalConfig)
    models: tuple = ()
    output: str = "out"
    cat1_tolerance: float = 0.05
    mlp_max_width: int = 8

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValidationError(
                f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}"
            )
        lo, hi = self.data.x_range
        if not lo < hi:
            raise ValidationError(f"x_range must satisfy lo < hi, got {self.data.x_range}")
        if self.data.noise_variance < 0:
            raise ValidationError("noise_variance must be >= 0")
        if self.eval.n_points < 1:
            raise ValidationError("eval grid needs at least one point")
        if self.mlp_max_width < 2:
            raise ValidationError("mlp_max_width must be at least 2")

    def eval_grid(self) -> np.ndarray:
        lo, hi = self.data.x_range
        return np.linspace(lo, hi, self.eval.n_points)


def _build_section(cls, values: dict, section: str):
    try:
        return cls(**values)
    except TypeError:
        known = set(cls.__dataclass_fields__)
        raise ValidationError(
            f"unknown keys in config section {section!r}: {sorted(set(values) - known)}"
        ) from None


def config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    kwargs = {}
    if "data" in d:
        data = dict(d.pop("data"))
        if "x_range" in data:
            data["x_range"] = tuple(data["x_range"])
        kwargs["data"] = _build_section(DataConfig, data, "data")
    if "magic" in d:
        kwargs["magic"] = _build_section(MagicFormulaParams, d.pop("magic"), "magic")
    if "fit" in d:
        kwargs["fit"] = FitOptions.from_dict(d.pop("fit"))
    if "eval" in d:
        kwargs["eval"] = _build_section(EvalConfig, d.pop("eval"), "eval")
    if "models" in d:
        kwargs["models"] = tuple(d.pop("models"))
    for key in ("scenario", "output", "cat1_tolerance", "mlp_max_width"):
        if key in d:
            kwargs[key] = d.pop(key)
    if d:
        raise ValidationError(f"unknown config keys: {sorted(d)}")
    return ExperimentConfig(**kwargs)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "scenario": cfg.scenario,
        "data": {
            "n_points": cfg.data.n_points,
            "x_range": list(cfg.data.x_range),
            "noise_variance": cfg.data.noise_variance,
            "seed": cfg.data.seed,
        },
        "magic": {"B": cfg.magic.B, "C": cfg.magic.C, "D": cfg.magic.D, "E": cfg.magic.E},
        "fit": cfg.fit.to_dict(),
        "eval": {"n_points": cfg.eval.n_points},
        "models": list(cfg.models),
        "output": cfg.output,
        "cat1_tolerance": cfg.cat1_tolerance,
        "mlp_max_width": cfg.mlp_max_width,
    }


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"could not parse config {path}: {exc}") from None
    return config_from_dict(raw)


def generate_dataset(cfg: ExperimentConfig) -> Dataset:
    """Draw inputs uniformly over x_range and outputs from the magic-formula
    curve plus Gaussian noise; fully determined by ``cfg.data.seed``.

    Inputs are drawn first, then the noise vector, from one PCG64 stream.
    """
    if cfg.data.n_points < 1:
        raise ValidationError("n_points must be positive")
    rng = np.random.default_rng(cfg.data.seed)
    lo, hi = cfg.data.x_range
    x = rng.uniform(lo, hi, cfg.data.n_points)
    noise = rng.normal(0.0, np.sqrt(cfg.data.noise_variance), cfg.data.n_points)
    y = magic_formula(x, cfg.magic) + noise
    return Dataset(inputs=x, outputs=y)


@dataclass(frozen=True)
class ModelRun:
    """One fitted model with its uncertainty analysis on the eval grid."""

    model_id: str
    model: m.ModelSpec
    fit_result: FitResult
    report: UncertaintyReport
    prediction: PredictionVariance
    fitted_curve: np.ndarray


@dataclass(frozen=True)
class ScenarioResult:
    scenario: str
    dataset: Dataset
    eval_grid: np.ndarray
    runs: tuple[ModelRun, ...]
    comparison: EquivalenceReport | None
    config: ExperimentConfig


def scenario_models(cfg: ExperimentConfig) -> list[tuple[str, m.ModelSpec]]:
    """The (model_id, spec) list a scenario fits, in fixed order."""
    if cfg.scenario == "cat1_nonlinear":
        return [
            ("canonical_nonlinear", m.reference_model("canonical_nonlinear")),
            ("over_cat1_nonlinear", m.reference_model("over_cat1_nonlinear")),
        ]
    if cfg.scenario == "cat2_linear":
        out = [("canonical_linear", m.reference_model("canonical_linear"))]
        out += [
            (f"over_cat2_linear_j{j}", m.reference_model(f"over_cat2_linear({j})"))
            for j in (1, 2, 3)
        ]
        return out
    if cfg.scenario == "cat2_mlp":
        return [
            (f"mlp_hidden_{k}", m.reference_model(f"mlp_hidden({k})"))
            for k in range(2, cfg.mlp_max_width + 1)
        ]
    if not cfg.models:
        raise ValidationError("custom scenario needs a nonempty models list")
    out = []
    for i, entry in enumerate(cfg.models):
        if isinstance(entry, str):
            out.append((entry, m.reference_model(entry)))
        else:
            spec = m.model_from_dict(entry)
            out.append((f"custom_{i}_{spec.kind}", spec))
    return out


def analyze_model(model_id, model, dataset, cfg, fit_seed) -> ModelRun:
    """Fit one model and run the delta-method pipeline on the eval grid."""
    opts = replace(cfg.fit, seed=fit_seed)
    try:
        result = fit(model, dataset, opts)
    except NumericalError as exc:
        raise NumericalError(f"fit failed for model {model_id!r}: {exc}") from exc
    info = information_matrix(model, result.theta, dataset)
    report = parameter_covariance(info, result.residual_variance)
    grid = cfg.eval_grid()
    pred = mean_prediction_variance(model, result.theta, report.parameter_covariance, grid)
    curve = m.evaluate(model, result.theta, grid)
    return ModelRun(
        model_id=model_id,
        model=model,
        fit_result=result,
        report=report,
        prediction=pred,
        fitted_curve=curve,
    )


def run_scenario(cfg: ExperimentConfig) -> ScenarioResult:
    """Generate the dataset, fit every scenario model on it, and analyze.

    Per-model fit seeds are ``cfg.fit.seed + index`` so the fits are
    independent but reproducible. A failing fit aborts the scenario with
    the model named; already-completed runs ride along on the exception's
    ``partial`` attribute.
    """
    pairs = scenario_models(cfg)
    largest = max(model.param_count for _, model in pairs)
    if cfg.data.n_points < largest:
        raise ValidationError(
            f"n_points={cfg.data.n_points} is below the largest model's "
            f"{largest} parameters"
        )
    dataset = generate_dataset(cfg)
    grid = cfg.eval_grid()
    runs: list[ModelRun] = []
    for i, (model_id, model) in enumerate(pairs):
        try:
            runs.append(analyze_model(model_id, model, dataset, cfg, cfg.fit.seed + i))
        except NumericalError as exc:
            exc.partial = tuple(runs)
            raise
    comparison = None
    if cfg.scenario == "cat1_nonlinear":
        canonical, extended = runs[0], runs[1]
        comparison = category1_equivalence(
            canonical.model,
            canonical.fit_result.theta,
            extended.model,
            extended.fit_result.theta,
            m.cat1_parameter_transform(),
            dataset,
            grid,
            tolerance=cfg.cat1_tolerance,
        )
    return ScenarioResult(
        scenario=cfg.scenario,
        dataset=dataset,
        eval_grid=grid,
        runs=tuple(runs),
        comparison=comparison,
        config=cfg,
    )


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    return repr(float(v))


def _header_comment(cfg: ExperimentConfig) -> str:
    return f"# seed={cfg.data.seed} scenario={cfg.scenario} rng=numpy-PCG64\n"


def write_dataset_csv(dataset: Dataset, cfg: ExperimentConfig, path) -> Path:
    path = Path(path)
    lines = [_header_comment(cfg), "x,y\n"]
    for xv, yv in zip(dataset.inputs, dataset.outputs):
        lines.append(f"{_fmt(xv)},{_fmt(yv)}\n")
    _write(path, lines)
    return path


def emit_csv(result: ScenarioResult, out_dir) -> dict[str, Path]:
    """Write dataset.csv, predictions.csv, and summary.csv under ``out_dir``.

    predictions.csv rows are ordered model by model, x ascending, with the
    95% band columns f_hat +/- 1.96 sqrt(variance). All floats use
    round-trip formatting so identical runs give identical bytes.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot create output directory {out}: {exc}") from exc
    cfg = result.config
    paths = {"dataset": write_dataset_csv(result.dataset, cfg, out / "dataset.csv")}

    lines = [
        _header_comment(cfg),
        "x,model_id,f_hat,variance,stddev_band_lo,stddev_band_hi\n",
    ]
    for run in result.runs:
        for xv, fv, vv in zip(result.eval_grid, run.fitted_curve, run.prediction.values):
            half = BAND_MULTIPLIER * np.sqrt(vv)
            lines.append(
                f"{_fmt(xv)},{run.model_id},{_fmt(fv)},{_fmt(vv)},"
                f"{_fmt(fv - half)},{_fmt(fv + half)}\n"
            )
    _write(out / "predictions.csv", lines)
    paths["predictions"] = out / "predictions.csv"

    lines = [_header_comment(cfg), "model_id,n_params,lambda_N,info_rank,mean_variance\n"]
    for run in result.runs:
        lines.append(
            f"{run.model_id},{run.model.param_count},"
            f"{_fmt(run.fit_result.residual_variance)},{run.report.information_rank},"
            f"{_fmt(run.prediction.mean_variance)}\n"
        )
    _write(out / "summary.csv", lines)
    paths["summary"] = out / "summary.csv"
    return paths


def _write(path: Path, lines: list[str]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.writelines(lines)
    except OSError as exc:
        raise ValidationError(f"could not write {path}: {exc}") from None
