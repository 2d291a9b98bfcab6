"""Parametric scalar-output models with exact forward and gradient evaluation.

Three model families share one interface (``evaluate`` / ``jacobian``):

* :class:`LinearModel` -- linear-in-parameters regressor expansions,
* :class:`MlpModel` -- fully connected networks with scalar input/output,
* :class:`FixedModel` -- closed-form curves (the tire-slip "magic formula"
  and the two-unit sigmoid networks used in the overparameterization
  comparisons).

All jacobians are analytic. Parameter vectors are plain 1-d float arrays;
:class:`MlpModel` documents its weight flattening so parameter indices are
stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import ValidationError


def sigmoid(a):
    """Logistic function 1 / (1 + exp(-a)), stable for large |a|."""
    a = np.asarray(a, dtype=float)
    z = np.exp(-np.abs(a))
    return np.where(a >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


# activation name -> (value from preactivation, derivative from value)
_ACTIVATIONS = {
    "sigmoid": (sigmoid, lambda h: h * (1.0 - h)),
    "tanh": (np.tanh, lambda h: 1.0 - h * h),
}


def _check_theta(theta, expected: int) -> np.ndarray:
    t = np.asarray(theta, dtype=float)
    if t.ndim != 1 or t.size != expected:
        raise ValidationError(
            f"parameter vector must have length {expected}, got shape {t.shape}"
        )
    if not np.all(np.isfinite(t)):
        raise ValidationError("parameter vector contains NaN or infinite entries")
    return t


def _check_inputs(x):
    """Return (values as 1-d array, was_scalar flag)."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("model input contains NaN or infinite entries")
    if arr.ndim == 0:
        return arr.reshape(1), True
    if arr.ndim != 1:
        raise ValidationError(f"model input must be scalar or 1-d, got shape {arr.shape}")
    return arr, False


# ---------------------------------------------------------------------------
# magic formula (simulation ground truth)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MagicFormulaParams:
    """Coefficients of the tire-slip curve: B stiffness, C shape, D peak,
    E curvature."""

    B: float = 14.0
    C: float = 0.1
    D: float = 0.6
    E: float = -0.2

    def __post_init__(self):
        for name in ("B", "C", "D", "E"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValidationError(f"magic formula coefficient {name} is not finite")

    def as_vector(self) -> np.ndarray:
        return np.array([self.B, self.C, self.D, self.E], dtype=float)


def magic_formula(x, params: MagicFormulaParams = MagicFormulaParams()):
    """Normalized traction force as a function of wheel slip:
    ``D sin(C arctan(Bx - E(Bx - arctan(Bx))))``.

    Odd in x; accepts scalars or arrays.
    """
    arr, scalar = _check_inputs(x)
    bx = params.B * arr
    inner = bx - params.E * (bx - np.arctan(bx))
    out = params.D * np.sin(params.C * np.arctan(inner))
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# linear-in-parameters models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BasisTerm:
    """One regressor: "poly" is x**degree, "affine" is scale*x + offset,
    "sigmoid"/"tanh" apply that squashing to scale*x + offset."""

    kind: str
    degree: int = 0
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in ("poly", "affine", "sigmoid", "tanh"):
            raise ValidationError(f"unknown basis term kind {self.kind!r}")
        if self.kind == "poly" and self.degree < 0:
            raise ValidationError("polynomial degree must be nonnegative")
        if not (np.isfinite(self.scale) and np.isfinite(self.offset)):
            raise ValidationError("basis term coefficients must be finite")

    def values(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "poly":
            return x ** self.degree
        z = self.scale * x + self.offset
        if self.kind == "affine":
            return z
        if self.kind == "sigmoid":
            return sigmoid(z)
        return np.tanh(z)


def poly(degree: int) -> BasisTerm:
    return BasisTerm("poly", degree=degree)


def affine(scale: float, offset: float) -> BasisTerm:
    return BasisTerm("affine", scale=scale, offset=offset)


def sigmoid_basis(scale: float, offset: float) -> BasisTerm:
    return BasisTerm("sigmoid", scale=scale, offset=offset)


@dataclass(frozen=True)
class LinearModel:
    """f(x; theta) = theta . phi(x) with regressor phi built from ``terms``.

    With ``mix`` set (shape: param_count x len(terms)), the regressor is
    ``mix @ term_values(x)`` -- each parameter weights a linear combination
    of the base terms. That is how overparameterized variants of a canonical
    basis are constructed.
    """

    terms: tuple[BasisTerm, ...]
    mix: np.ndarray | None = None

    kind = "linear_in_parameters"
    input_dim = 1

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if len(self.terms) == 0:
            raise ValidationError("linear model needs at least one basis term")
        if self.mix is not None:
            m = np.asarray(self.mix, dtype=float)
            if m.ndim != 2 or m.shape[1] != len(self.terms):
                raise ValidationError(
                    f"mix must have {len(self.terms)} columns, got shape {m.shape}"
                )
            if not np.all(np.isfinite(m)):
                raise ValidationError("mix contains NaN or infinite entries")
            object.__setattr__(self, "mix", m)

    @property
    def param_count(self) -> int:
        return len(self.terms) if self.mix is None else self.mix.shape[0]

    def basis(self, x: np.ndarray) -> np.ndarray:
        """Regressor values, shape (param_count, len(x))."""
        vals = np.vstack([t.values(x) for t in self.terms])
        return vals if self.mix is None else self.mix @ vals


# ---------------------------------------------------------------------------
# fully connected networks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MlpModel:
    """Fully connected network, scalar input and output, no output activation.

    ``layer_sizes`` is (1, hidden_1, ..., hidden_k, 1). Layer l maps
    h -> [h, 1] @ W_l, so W_l has shape (layer_sizes[l] + 1,
    layer_sizes[l+1]) with the bias as its last row.

    Parameter flattening (the theta <-> weights bijection): theta
    concatenates Vec(W_last), ..., Vec(W_0) -- output layer first -- where
    Vec stacks the columns of each weight matrix.
    """

    layer_sizes: tuple[int, ...]
    activation: str = "sigmoid"

    kind = "mlp"
    input_dim = 1

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2:
            raise ValidationError("layer_sizes needs at least input and output")
        if sizes[0] != 1 or sizes[-1] != 1:
            raise ValidationError(
                f"scalar input and output required, got layer_sizes {sizes}"
            )
        if any(s < 1 for s in sizes):
            raise ValidationError(f"layer sizes must be positive, got {sizes}")
        if self.activation not in _ACTIVATIONS:
            raise ValidationError(
                f"unknown activation {self.activation!r}; "
                f"choose from {sorted(_ACTIVATIONS)}"
            )

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes) - 1

    @property
    def param_count(self) -> int:
        return sum(
            (self.layer_sizes[l] + 1) * self.layer_sizes[l + 1]
            for l in range(self.n_layers)
        )

    def unflatten(self, theta: np.ndarray) -> list[np.ndarray]:
        """Split theta into weight matrices [W_0, ..., W_last]."""
        mats: list[np.ndarray] = []
        pos = 0
        # theta stores the output layer first
        for l in reversed(range(self.n_layers)):
            rows = self.layer_sizes[l] + 1
            cols = self.layer_sizes[l + 1]
            block = theta[pos : pos + rows * cols]
            mats.append(block.reshape((rows, cols), order="F"))
            pos += rows * cols
        mats.reverse()
        return mats

    def flatten(self, weights: list[np.ndarray]) -> np.ndarray:
        """Inverse of :meth:`unflatten`."""
        if len(weights) != self.n_layers:
            raise ValidationError(
                f"expected {self.n_layers} weight matrices, got {len(weights)}"
            )
        parts = []
        for l in reversed(range(self.n_layers)):
            w = np.asarray(weights[l], dtype=float)
            expected = (self.layer_sizes[l] + 1, self.layer_sizes[l + 1])
            if w.shape != expected:
                raise ValidationError(
                    f"weight matrix {l} must have shape {expected}, got {w.shape}"
                )
            parts.append(w.flatten(order="F"))
        return np.concatenate(parts)


def _mlp_forward(model: MlpModel, theta: np.ndarray, x: np.ndarray):
    """Forward pass; returns (output (N,), preactivation/activation stacks)."""
    act, _ = _ACTIVATIONS[model.activation]
    weights = model.unflatten(theta)
    hs = [x[:, None]]  # inputs to each layer
    out = None
    for l, w in enumerate(weights):
        pre = hs[-1] @ w[:-1] + w[-1]
        if l < model.n_layers - 1:
            hs.append(act(pre))
        else:
            out = pre[:, 0]
    return out, hs, weights


def _mlp_jacobian(model: MlpModel, theta: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Analytic d f / d theta, shape (N, param_count), in flattening order."""
    _, deriv = _ACTIVATIONS[model.activation]
    _, hs, weights = _mlp_forward(model, theta, x)
    n = x.shape[0]
    # gradient of the scalar output w.r.t. each layer's preactivation
    d_pre = np.ones((n, 1))
    blocks: list[np.ndarray] = []
    for l in reversed(range(model.n_layers)):
        inp = np.concatenate([hs[l], np.ones((n, 1))], axis=1)
        # per-sample dW_l = [h, 1]^T d_pre; column-stacked flattening
        dw = inp[:, :, None] * d_pre[:, None, :]
        blocks.append(np.transpose(dw, (0, 2, 1)).reshape(n, -1))
        if l > 0:
            d_hidden = d_pre @ weights[l][:-1].T
            d_pre = d_hidden * deriv(hs[l])
    return np.concatenate(blocks, axis=1)


# ---------------------------------------------------------------------------
# fixed closed-form models
# ---------------------------------------------------------------------------

_FIXED_PARAM_COUNTS = {
    "magic_formula": 4,
    "canonical_nonlinear": 7,
    "over_cat1_nonlinear": 8,
}


@dataclass(frozen=True)
class FixedModel:
    """Closed-form parametric curves.

    * ``magic_formula``: theta = [B, C, D, E] of :func:`magic_formula`.
    * ``canonical_nonlinear``: t1*s(t2 x + t3) + t4*s(t5 x + t6) + t7, the
      minimal two-unit sigmoid network in explicit form.
    * ``over_cat1_nonlinear``: t1*s(t2(x+1) + t3(2-x) + 5 t4) +
      t5*s(t6 x + t7) + t8 -- same flexibility with one redundant
      parameter folded into the first unit's preactivation.
    """

    tag: str

    kind = "fixed_function"
    input_dim = 1

    def __post_init__(self):
        if self.tag not in _FIXED_PARAM_COUNTS:
            raise ValidationError(
                f"unknown fixed model tag {self.tag!r}; "
                f"choose from {sorted(_FIXED_PARAM_COUNTS)}"
            )

    @property
    def param_count(self) -> int:
        return _FIXED_PARAM_COUNTS[self.tag]


def _fixed_evaluate(model: FixedModel, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    if model.tag == "magic_formula":
        return magic_formula(x, MagicFormulaParams(*t))
    if model.tag == "canonical_nonlinear":
        return t[0] * sigmoid(t[1] * x + t[2]) + t[3] * sigmoid(t[4] * x + t[5]) + t[6]
    u = t[1] * (x + 1.0) + t[2] * (2.0 - x) + 5.0 * t[3]
    return t[0] * sigmoid(u) + t[4] * sigmoid(t[5] * x + t[6]) + t[7]


def _fixed_jacobian(model: FixedModel, t: np.ndarray, x: np.ndarray) -> np.ndarray:
    one = np.ones_like(x)
    if model.tag == "magic_formula":
        b, c, d, e = t
        bx = b * x
        at = np.arctan(bx)
        g = bx - e * (bx - at)
        u = np.arctan(g)
        cos_cu = np.cos(c * u)
        df_dg = d * cos_cu * c / (1.0 + g * g)
        dg_db = x - e * (x - x / (1.0 + bx * bx))
        dg_de = -(bx - at)
        return np.stack(
            [df_dg * dg_db, d * cos_cu * u, np.sin(c * u), df_dg * dg_de], axis=-1
        )
    if model.tag == "canonical_nonlinear":
        s1 = sigmoid(t[1] * x + t[2])
        s2 = sigmoid(t[4] * x + t[5])
        d1 = s1 * (1.0 - s1)
        d2 = s2 * (1.0 - s2)
        return np.stack(
            [s1, t[0] * d1 * x, t[0] * d1, s2, t[3] * d2 * x, t[3] * d2, one], axis=-1
        )
    u = t[1] * (x + 1.0) + t[2] * (2.0 - x) + 5.0 * t[3]
    s1 = sigmoid(u)
    s2 = sigmoid(t[5] * x + t[6])
    d1 = s1 * (1.0 - s1)
    d2 = s2 * (1.0 - s2)
    return np.stack(
        [
            s1,
            t[0] * d1 * (x + 1.0),
            t[0] * d1 * (2.0 - x),
            5.0 * t[0] * d1,
            s2,
            t[4] * d2 * x,
            t[4] * d2,
            one,
        ],
        axis=-1,
    )


ModelSpec = Union[LinearModel, MlpModel, FixedModel]


# ---------------------------------------------------------------------------
# shared interface
# ---------------------------------------------------------------------------


def evaluate(model: ModelSpec, theta, x):
    """Forward value f(x; theta). Scalar x gives a float, arrays map elementwise."""
    t = _check_theta(theta, model.param_count)
    arr, scalar = _check_inputs(x)
    if isinstance(model, LinearModel):
        out = t @ model.basis(arr)
    elif isinstance(model, MlpModel):
        out, _, _ = _mlp_forward(model, t, arr)
    elif isinstance(model, FixedModel):
        out = _fixed_evaluate(model, t, arr)
    else:
        raise ValidationError(f"unknown model type {type(model).__name__}")
    return float(out[0]) if scalar else out


def jacobian(model: ModelSpec, theta, x):
    """Analytic gradient of f w.r.t. theta.

    Returns shape (param_count,) for scalar x, or (len(x), param_count)
    with one gradient per row for 1-d x. For linear models this is the
    regressor itself, independent of theta.
    """
    t = _check_theta(theta, model.param_count)
    arr, scalar = _check_inputs(x)
    if isinstance(model, LinearModel):
        jac = model.basis(arr).T
    elif isinstance(model, MlpModel):
        jac = _mlp_jacobian(model, t, arr)
    elif isinstance(model, FixedModel):
        jac = _fixed_jacobian(model, t, arr)
    else:
        raise ValidationError(f"unknown model type {type(model).__name__}")
    return jac[0] if scalar else jac


def regressor_matrix(model: ModelSpec, theta, inputs) -> np.ndarray:
    """Regressors stacked as columns: shape (param_count, N).

    For nonlinear models these are the gradients at theta, i.e. the local
    linearization used by the delta method.
    """
    arr, scalar = _check_inputs(inputs)
    if scalar:
        raise ValidationError("regressor_matrix expects a 1-d array of inputs")
    return jacobian(model, theta, arr).T


# ---------------------------------------------------------------------------
# model zoo for the simulation study
# ---------------------------------------------------------------------------

_CANONICAL_LINEAR_TERMS = (
    sigmoid_basis(-40.0, 0.0061),
    sigmoid_basis(-6.8, 0.0036),
    poly(0),
)


def reference_model(tag: str) -> ModelSpec:
    """Build one of the named study models.

    Accepted tags: ``canonical_nonlinear``, ``over_cat1_nonlinear``,
    ``canonical_linear``, ``over_cat2_linear(j)`` for j in 1..3, and
    ``mlp_hidden(k)`` for k >= 2.

    ``over_cat2_linear(j)`` appends the sigmoid regressors sigmoid(o*x + o)
    for o = 1..j to the canonical linear basis, so the families are nested:
    each j contains every regressor of j-1.
    """
    name, arg = _parse_tag(tag)
    if name == "canonical_nonlinear":
        _reject_arg(tag, arg)
        return FixedModel("canonical_nonlinear")
    if name == "over_cat1_nonlinear":
        _reject_arg(tag, arg)
        return FixedModel("over_cat1_nonlinear")
    if name == "canonical_linear":
        _reject_arg(tag, arg)
        return LinearModel(_CANONICAL_LINEAR_TERMS)
    if name == "over_cat2_linear":
        if arg is None or not 1 <= arg <= 3:
            raise ValidationError(
                f"over_cat2_linear takes an extension count in 1..3, got {tag!r}"
            )
        extra = tuple(sigmoid_basis(float(o), float(o)) for o in range(1, arg + 1))
        return LinearModel(_CANONICAL_LINEAR_TERMS + extra)
    if name == "mlp_hidden":
        if arg is None or arg < 2:
            raise ValidationError(
                f"mlp_hidden takes a hidden width of at least 2, got {tag!r}"
            )
        return MlpModel((1, arg, 1))
    raise ValidationError(f"unknown model tag {tag!r}")


def _parse_tag(tag: str) -> tuple[str, int | None]:
    if not isinstance(tag, str):
        raise ValidationError(f"model tag must be a string, got {type(tag).__name__}")
    name = tag.strip()
    if name.endswith(")") and "(" in name:
        base, _, inner = name.partition("(")
        try:
            return base.strip(), int(inner[:-1])
        except ValueError:
            raise ValidationError(f"could not parse model tag argument in {tag!r}") from None
    return name, None


def _reject_arg(tag: str, arg: int | None) -> None:
    if arg is not None:
        raise ValidationError(f"model tag {tag!r} does not take an argument")


def cat1_parameter_transform() -> np.ndarray:
    """Row-rank-7 matrix T mapping over_cat1_nonlinear parameters onto
    canonical_nonlinear ones (theta_c = T theta).

    The redundant model's first preactivation t2*(x+1) + t3*(2-x) + 5*t4
    collapses to slope t2 - t3 and intercept t2 + 2*t3 + 5*t4.
    """
    t = np.zeros((7, 8))
    t[0, 0] = 1.0
    t[1, 1], t[1, 2] = 1.0, -1.0
    t[2, 1], t[2, 2], t[2, 3] = 1.0, 2.0, 5.0
    t[3, 4] = 1.0
    t[4, 5] = 1.0
    t[5, 6] = 1.0
    t[6, 7] = 1.0
    return t


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def model_to_dict(model: ModelSpec) -> dict:
    """JSON-compatible description; inverse of :func:`model_from_dict`."""
    if isinstance(model, LinearModel):
        d = {
            "kind": model.kind,
            "terms": [
                {
                    "kind": t.kind,
                    "degree": t.degree,
                    "scale": t.scale,
                    "offset": t.offset,
                }
                for t in model.terms
            ],
        }
        if model.mix is not None:
            d["mix"] = model.mix.tolist()
        return d
    if isinstance(model, MlpModel):
        return {
            "kind": model.kind,
            "layer_sizes": list(model.layer_sizes),
            "activation": model.activation,
        }
    if isinstance(model, FixedModel):
        return {"kind": model.kind, "tag": model.tag}
    raise ValidationError(f"unknown model type {type(model).__name__}")


def model_from_dict(d: dict) -> ModelSpec:
    try:
        kind = d["kind"]
    except (TypeError, KeyError):
        raise ValidationError("model description needs a 'kind' field") from None
    if kind == "linear_in_parameters":
        terms = tuple(
            BasisTerm(
                t["kind"],
                degree=int(t.get("degree", 0)),
                scale=float(t.get("scale", 1.0)),
                offset=float(t.get("offset", 0.0)),
            )
            for t in d["terms"]
        )
        mix = d.get("mix")
        return LinearModel(terms, mix=None if mix is None else np.asarray(mix, dtype=float))
    if kind == "mlp":
        return MlpModel(tuple(d["layer_sizes"]), d.get("activation", "sigmoid"))
    if kind == "fixed_function":
        return FixedModel(d["tag"])
    raise ValidationError(f"unknown model kind {kind!r}")
