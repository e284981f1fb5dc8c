"""Model definition: the triple (alpha, beta, k) plus optional closed forms.

A decay-surge model is fully specified by a decay rate ``alpha``, a jump rate
``beta`` (both positive on ``(0, inf)``) and a positive non-increasing
survival shape ``k`` that drives the upward jump kernel through the ratio
``k(y)/k(x)``.  Each of the three slots is either a parsed expression in the
variable ``x`` or a named parametric family; families also register analytic
closed forms (inverses, flow solutions, rate integrals) that the numeric
layers use as fast paths.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import expressions
from .expressions import ExpressionDomainError, ExpressionSyntaxError

__all__ = [
    "RateFunction",
    "SurvivalFunction",
    "ParamFamily",
    "ClosedForms",
    "ModelTriple",
    "Violation",
    "parse_expression",
    "parse_survival_expression",
    "make_family",
    "make_model",
    "validate_triple",
    "default_probe_grid",
    "load_model",
    "model_to_dict",
]

_FAMILY_NAMES = (
    "power",
    "linear",
    "constant",
    "exponential-survival",
    "pareto-survival",
    "weibull-survival",
)


# ---------------------------------------------------------------------------
# Family evaluators (plain picklable callables)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _PowerEval:
    coeff: float
    exponent: float

    def __call__(self, x):
        if np.ndim(x):
            if self.exponent == 0.0:
                return self.coeff * np.ones_like(x, dtype=float)
            return self.coeff * np.power(x, self.exponent)
        if self.exponent == 0.0:
            return self.coeff
        with np.errstate(all="ignore"):
            return float(self.coeff * np.power(float(x), self.exponent))


@dataclass(frozen=True)
class _LinearEval:
    slope: float
    intercept: float

    def __call__(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float) if np.ndim(x) else self.intercept + self.slope * float(x)


@dataclass(frozen=True)
class _ExpSurvivalEval:
    theta: float

    def __call__(self, x):
        return np.exp(-self.theta * np.asarray(x, dtype=float)) if np.ndim(x) else math.exp(-self.theta * float(x))


@dataclass(frozen=True)
class _ExpSurvivalLog:
    theta: float

    def __call__(self, x):
        return -self.theta * x


@dataclass(frozen=True)
class _ExpSurvivalInv:
    theta: float

    def __call__(self, u):
        return -math.log(u) / self.theta


@dataclass(frozen=True)
class _ExpSurvivalCondInv:
    theta: float

    def __call__(self, z, v):
        return z - math.log(v) / self.theta


@dataclass(frozen=True)
class _ParetoSurvivalEval:
    c: float

    def __call__(self, x):
        return np.power(1.0 + np.asarray(x, dtype=float), -self.c) if np.ndim(x) else (1.0 + float(x)) ** (-self.c)


@dataclass(frozen=True)
class _ParetoSurvivalLog:
    c: float

    def __call__(self, x):
        return -self.c * math.log1p(x)


@dataclass(frozen=True)
class _ParetoSurvivalInv:
    c: float

    def __call__(self, u):
        return u ** (-1.0 / self.c) - 1.0


@dataclass(frozen=True)
class _ParetoSurvivalCondInv:
    c: float

    def __call__(self, z, v):
        return (1.0 + z) * v ** (-1.0 / self.c) - 1.0


@dataclass(frozen=True)
class _WeibullSurvivalEval:
    shape: float
    theta: float

    def __call__(self, x):
        return np.exp(-self.theta * np.power(x, self.shape)) if np.ndim(x) else math.exp(-self.theta * float(x) ** self.shape)


@dataclass(frozen=True)
class _WeibullSurvivalLog:
    shape: float
    theta: float

    def __call__(self, x):
        return -self.theta * x**self.shape


@dataclass(frozen=True)
class _WeibullSurvivalInv:
    shape: float
    theta: float

    def __call__(self, u):
        return (-math.log(u) / self.theta) ** (1.0 / self.shape)


@dataclass(frozen=True)
class _WeibullSurvivalCondInv:
    shape: float
    theta: float

    def __call__(self, z, v):
        return (z**self.shape - math.log(v) / self.theta) ** (1.0 / self.shape)


@dataclass(frozen=True)
class _PowerSurvivalLog:
    coeff: float
    exponent: float  # negative

    def __call__(self, x):
        return math.log(self.coeff) + self.exponent * math.log(x)


@dataclass(frozen=True)
class _PowerSurvivalInv:
    coeff: float
    exponent: float

    def __call__(self, u):
        return (u / self.coeff) ** (1.0 / self.exponent)


@dataclass(frozen=True)
class _PowerSurvivalCondInv:
    exponent: float

    def __call__(self, z, v):
        return z * v ** (1.0 / self.exponent)


@dataclass(frozen=True)
class _LogOfEvaluator:
    """Fallback log(k(x)) when no analytic log form is registered."""

    fn: object

    def __call__(self, x):
        v = self.fn(x)
        if v == 0.0:
            return -math.inf
        return math.log(v)


# ---------------------------------------------------------------------------
# Public wrapper types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFunction:
    """A nonnegative function of x in (0, inf): the drift or jump rate."""

    source: str
    evaluator: object
    family: "ParamFamily | None" = None

    def __call__(self, x):
        return self.evaluator(x)


@dataclass(frozen=True)
class SurvivalFunction:
    """A positive non-increasing function of x; drives the jump kernel.

    ``inverse`` is the generalized inverse u -> k^{-1}(u) when an analytic one
    is registered.  ``log_evaluator`` returns log k(x) stably even when k(x)
    underflows.  ``value_at_zero`` stores the (extended-real) limit k(0+).
    """

    source: str
    evaluator: object
    inverse: object | None = None
    log_evaluator: object | None = None
    value_at_zero: float = math.nan
    family: "ParamFamily | None" = None
    conditional_inverse: object | None = None  # (z, v) -> y with k(y)/k(z) = v

    def __call__(self, x):
        return self.evaluator(x)

    def log_eval(self, x) -> float:
        if self.log_evaluator is not None:
            return self.log_evaluator(x)
        return _LogOfEvaluator(self.evaluator)(x)


@dataclass(frozen=True)
class ParamFamily:
    """A named parametric family plus its parameter values."""

    name: str
    params: dict

    def __post_init__(self):
        if self.name not in _FAMILY_NAMES:
            raise ValueError(f"unknown family {self.name!r}; known: {', '.join(_FAMILY_NAMES)}")


@dataclass(frozen=True)
class ClosedForms:
    """Optional analytic shortcuts for the numeric layers.

    Any subset may be present; everything has a numeric fallback.

    flow(x, t)            value of the decayed flow after time t from x
    time_to_level(x, a)   time for the flow to fall from x to a (may be inf)
    gamma(x)              integral of beta/alpha from 1 to x
    gamma_inv(u)          inverse of gamma
    gamma_at_zero         limit of gamma at 0+ (may be -inf)
    gamma_at_inf          limit of gamma at +inf (may be +inf)

    The survival inverse k^{-1} lives on :class:`SurvivalFunction` itself.
    """

    flow: object | None = None
    time_to_level: object | None = None
    gamma: object | None = None
    gamma_inv: object | None = None
    gamma_at_zero: float | None = None
    gamma_at_inf: float | None = None


@dataclass(frozen=True)
class ModelTriple:
    """The triple (alpha, beta, k) defining a decay-surge process."""

    alpha: RateFunction
    beta: RateFunction
    k: SurvivalFunction
    closed_forms: ClosedForms | None = None

    def __post_init__(self):
        object.__setattr__(self, "_cache", {})

    def __getstate__(self):
        state = dict(self.__dict__)
        state["_cache"] = {}
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)

    def cache(self) -> dict:
        return self._cache

    def gamma_ratio(self, x):
        """beta(x)/alpha(x), the jump rate per unit of decay."""
        return self.beta(x) / self.alpha(x)


@dataclass(frozen=True)
class Violation:
    function: str
    x: float
    value: float
    message: str

    def __str__(self):
        return f"{self.function} at x={self.x:g}: {self.message} (value {self.value!r})"


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def parse_expression(text: str) -> RateFunction:
    """Parse an expression in ``x`` into a :class:`RateFunction`."""
    return RateFunction(source=text, evaluator=expressions.parse(text))


def parse_survival_expression(text: str) -> SurvivalFunction:
    """Parse an expression into a :class:`SurvivalFunction` (no closed forms)."""
    ev = expressions.parse(text)
    return SurvivalFunction(
        source=text,
        evaluator=ev,
        value_at_zero=_probe_value_at_zero(ev),
    )


def _probe_value_at_zero(fn) -> float:
    """Limit of a non-increasing positive function at 0+, probed numerically."""
    last = math.nan
    for eps in (1e-4, 1e-8, 1e-12):
        try:
            last = float(fn(eps))
        except (ExpressionDomainError, ArithmeticError, ValueError):
            return math.inf
        if not math.isfinite(last):
            return math.inf
    try:
        scale = float(fn(1.0))
    except (ExpressionDomainError, ArithmeticError, ValueError):
        scale = 1.0
    if last > max(1e12, 1e12 * abs(scale)):
        return math.inf
    return last


def _require_positive(params: dict, *names: str) -> None:
    for n in names:
        v = params.get(n)
        if v is None or not (float(v) > 0):
            raise ValueError(f"family parameter {n!r} must be positive, got {v!r}")


def make_family(descriptor: ParamFamily, role: str | None = None):
    """Build the evaluator (and closed forms) for a named family.

    ``role`` is "rate" or "survival"; by default the ``*-survival`` families
    produce a :class:`SurvivalFunction` and the rest a :class:`RateFunction`.
    A ``power`` family with negative exponent can be requested as a survival
    shape (e.g. ``x^-c`` with infinite mass at 0).
    """
    name, params = descriptor.name, dict(descriptor.params)
    if role is None:
        role = "survival" if name.endswith("-survival") else "rate"

    if name == "power":
        _require_positive(params, "alpha1")
        coeff = float(params["alpha1"])
        exponent = float(params.get("a", 1.0))
        ev = _PowerEval(coeff, exponent)
        src = f"{coeff:g}*x^{exponent:g}"
        if role == "survival":
            if exponent >= 0:
                raise ValueError("a power survival shape needs a negative exponent")
            return SurvivalFunction(
                source=src,
                evaluator=ev,
                inverse=_PowerSurvivalInv(coeff, exponent),
                log_evaluator=_PowerSurvivalLog(coeff, exponent),
                value_at_zero=math.inf,
                family=descriptor,
                conditional_inverse=_PowerSurvivalCondInv(exponent),
            )
        return RateFunction(source=src, evaluator=ev, family=descriptor)

    if name == "linear":
        _require_positive(params, "slope")
        slope = float(params["slope"])
        intercept = float(params.get("intercept", 0.0))
        if intercept < 0:
            raise ValueError("linear intercept must be nonnegative")
        ev = _LinearEval(slope, intercept)
        if role == "survival":
            raise ValueError("a linear rate cannot serve as a survival shape")
        return RateFunction(source=f"{intercept:g}+{slope:g}*x", evaluator=ev, family=descriptor)

    if name == "constant":
        _require_positive(params, "value")
        value = float(params["value"])
        ev = _PowerEval(value, 0.0)
        if role == "survival":
            raise ValueError("a constant cannot serve as a survival shape")
        return RateFunction(source=f"{value:g}", evaluator=ev, family=descriptor)

    if name == "exponential-survival":
        _require_positive(params, "theta")
        theta = float(params["theta"])
        return SurvivalFunction(
            source=f"exp(-{theta:g}*x)",
            evaluator=_ExpSurvivalEval(theta),
            inverse=_ExpSurvivalInv(theta),
            log_evaluator=_ExpSurvivalLog(theta),
            value_at_zero=1.0,
            family=descriptor,
            conditional_inverse=_ExpSurvivalCondInv(theta),
        )

    if name == "pareto-survival":
        _require_positive(params, "c")
        c = float(params["c"])
        return SurvivalFunction(
            source=f"(1+x)^-{c:g}",
            evaluator=_ParetoSurvivalEval(c),
            inverse=_ParetoSurvivalInv(c),
            log_evaluator=_ParetoSurvivalLog(c),
            value_at_zero=1.0,
            family=descriptor,
            conditional_inverse=_ParetoSurvivalCondInv(c),
        )

    # weibull-survival
    _require_positive(params, "alpha")
    shape = float(params["alpha"])
    theta = float(params.get("theta", 1.0))
    if theta <= 0:
        raise ValueError("weibull theta must be positive")
    return SurvivalFunction(
        source=f"exp(-{theta:g}*x^{shape:g})",
        evaluator=_WeibullSurvivalEval(shape, theta),
        inverse=_WeibullSurvivalInv(shape, theta),
        log_evaluator=_WeibullSurvivalLog(shape, theta),
        value_at_zero=1.0,
        family=descriptor,
        conditional_inverse=_WeibullSurvivalCondInv(shape, theta),
    )


# ---------------------------------------------------------------------------
# Closed forms for recognized (alpha, beta) family pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _PowerFlow:
    """Flow of dx/dt = -c x^a, clamped at 0 once it gets there."""

    coeff: float
    exponent: float

    def __call__(self, x, t):
        x, t = float(x), float(t)
        if x <= 0.0:
            return 0.0
        if self.exponent == 1.0:
            return x * math.exp(-self.coeff * t)
        q = 1.0 - self.exponent
        base = x**q - self.coeff * q * t
        if q > 0 and base <= 0.0:
            return 0.0
        return base ** (1.0 / q)


@dataclass(frozen=True)
class _PowerTimeToLevel:
    coeff: float
    exponent: float

    def __call__(self, x, a):
        x, a = float(x), float(a)
        if self.exponent == 1.0:
            if a == 0.0:
                return math.inf
            return math.log(x / a) / self.coeff
        q = 1.0 - self.exponent
        if a == 0.0:
            if q <= 0:
                return math.inf
            return x**q / (self.coeff * q)
        return (x**q - a**q) / (self.coeff * q)


@dataclass(frozen=True)
class _PowerGamma:
    """Integral from 1 to x of g1*y^p."""

    g1: float
    p: float

    def __call__(self, x):
        x = float(x)
        if self.p == -1.0:
            return self.g1 * math.log(x)
        r = self.p + 1.0
        return self.g1 / r * (x**r - 1.0)


@dataclass(frozen=True)
class _PowerGammaInv:
    g1: float
    p: float

    def __call__(self, u):
        u = float(u)
        if self.p == -1.0:
            return math.exp(u / self.g1)
        r = self.p + 1.0
        base = 1.0 + r * u / self.g1
        if base <= 0.0:
            return 0.0
        return base ** (1.0 / r)


@dataclass(frozen=True)
class _LinearInterceptGamma:
    """gamma(y) = (mu + b1*y) / (a1*y): relevant for affine jump rates."""

    mu_over_a1: float
    g1: float

    def __call__(self, x):
        x = float(x)
        return self.mu_over_a1 * math.log(x) + self.g1 * (x - 1.0)


def _family_as_power(fn: RateFunction) -> tuple[float, float] | None:
    """(coeff, exponent) when the rate is a pure power family, else None."""
    fam = fn.family
    if fam is None:
        return None
    if fam.name == "power":
        return float(fam.params["alpha1"]), float(fam.params.get("a", 1.0))
    if fam.name == "constant":
        return float(fam.params["value"]), 0.0
    if fam.name == "linear" and float(fam.params.get("intercept", 0.0)) == 0.0:
        return float(fam.params["slope"]), 1.0
    return None


def auto_closed_forms(alpha: RateFunction, beta: RateFunction) -> ClosedForms | None:
    """Closed forms for power-law alpha/beta pairs; None when unavailable."""
    ap = _family_as_power(alpha)
    if ap is None:
        return None
    a1, a = ap
    flow = _PowerFlow(a1, a)
    t_level = _PowerTimeToLevel(a1, a)

    bp = _family_as_power(beta)
    if bp is not None:
        b1, b = bp
        g1, p = b1 / a1, b - a
        r = p + 1.0
        if p == -1.0:
            g0, ginf = -math.inf, math.inf
        elif r > 0:
            g0, ginf = -g1 / r, math.inf
        else:
            g0, ginf = -math.inf, -g1 / r
        return ClosedForms(
            flow=flow,
            time_to_level=t_level,
            gamma=_PowerGamma(g1, p),
            gamma_inv=_PowerGammaInv(g1, p),
            gamma_at_zero=g0,
            gamma_at_inf=ginf,
        )

    fam = beta.family
    if fam is not None and fam.name == "linear" and a == 1.0:
        mu = float(fam.params.get("intercept", 0.0))
        b1 = float(fam.params["slope"])
        return ClosedForms(
            flow=flow,
            time_to_level=t_level,
            gamma=_LinearInterceptGamma(mu / a1, b1 / a1),
            gamma_inv=None,
            gamma_at_zero=-math.inf,
            gamma_at_inf=math.inf,
        )

    return ClosedForms(flow=flow, time_to_level=t_level)


def make_model(
    alpha: RateFunction,
    beta: RateFunction,
    k: SurvivalFunction,
    closed_forms: ClosedForms | None = None,
    auto_forms: bool = True,
) -> ModelTriple:
    """Assemble a :class:`ModelTriple`, deriving closed forms when possible."""
    if closed_forms is None and auto_forms:
        closed_forms = auto_closed_forms(alpha, beta)
    return ModelTriple(alpha=alpha, beta=beta, k=k, closed_forms=closed_forms)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def default_probe_grid() -> np.ndarray:
    """256 log-spaced probe points spanning (1e-6, 1e6)."""
    return np.geomspace(1e-6, 1e6, 256)


def _closed_form_grid(grid: np.ndarray) -> np.ndarray:
    sub = grid[(grid >= 1e-3) & (grid <= 1e3)]
    if sub.size > 33:
        sub = sub[:: max(1, sub.size // 33)]
    return sub


def validate_triple(model: ModelTriple, grid=None) -> list[Violation]:
    """Probe positivity of alpha/beta, monotonicity of k, and closed forms.

    Returns an empty list iff every probed point passes.  Violations are data,
    not exceptions.  Closed forms are cross-checked against quadrature on a
    trimmed subgrid (quadrature out at 1e6 for arbitrary expressions is not
    worth the cost; mismatches show up long before that).
    """
    from . import calculus  # deferred: calculus is independent of this module

    grid = default_probe_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("probe grid must be non-empty and strictly positive")
    grid = np.sort(grid)
    out: list[Violation] = []

    def probe(fn, label):
        vals = np.empty_like(grid)
        seen_positive = False
        for i, x in enumerate(grid):
            try:
                v = float(fn(x))
            except (ExpressionDomainError, ArithmeticError, ValueError) as e:
                out.append(Violation(label, float(x), math.nan, f"evaluation failed: {e}"))
                vals[i] = math.nan
                continue
            vals[i] = v
            if label == "k":
                # k may legitimately underflow to 0.0 once it has been seen
                # positive at a smaller point; real zeros/negatives are flagged
                if math.isnan(v) or v < 0.0 or (v == 0.0 and not seen_positive):
                    out.append(Violation(label, float(x), v, "survival must be strictly positive"))
                elif v == math.inf and seen_positive:
                    out.append(Violation(label, float(x), v, "survival must be finite on (0, inf)"))
                seen_positive = seen_positive or v > 0.0
            elif not math.isfinite(v):
                out.append(Violation(label, float(x), v, "value is not finite"))
            elif v <= 0.0:
                out.append(Violation(label, float(x), v, "must be strictly positive"))
        return vals

    probe(model.alpha, "alpha")
    probe(model.beta, "beta")
    kv = probe(model.k, "k")

    # monotonicity of k: exact for registered families, float-noise slack otherwise
    slack = 0.0 if model.k.family is not None else 1e-12
    for i in range(1, grid.size):
        lo, hi = kv[i - 1], kv[i]
        if math.isfinite(lo) and math.isfinite(hi) and hi > lo * (1.0 + slack) + slack:
            out.append(
                Violation("k", float(grid[i]), hi, f"not non-increasing: k({grid[i-1]:g})={lo!r} < k({grid[i]:g})={hi!r}")
            )

    cf = model.closed_forms
    sub = _closed_form_grid(grid)
    rel = 1e-8

    def mismatch(label, x, got, want):
        if not (abs(got - want) <= rel * max(1.0, abs(want))):
            out.append(Violation(label, float(x), got, f"closed form disagrees with quadrature value {want!r}"))

    if cf is not None and sub.size:
        gamma_num = calculus.CumulativeIntegral(model.gamma_ratio, anchor=1.0, tol=1e-11)
        alpha_num = calculus.CumulativeIntegral(lambda y: 1.0 / model.alpha(y), anchor=1.0, tol=1e-11)
        for x in sub:
            x = float(x)
            if cf.gamma is not None:
                mismatch("closed_form:gamma", x, cf.gamma(x), gamma_num.value(x))
                if cf.gamma_inv is not None:
                    u = cf.gamma(x)
                    back = cf.gamma_inv(u)
                    if not (abs(back - x) <= rel * max(1.0, x)):
                        out.append(Violation("closed_form:gamma_inv", x, back, "inverse does not round-trip"))
            if cf.time_to_level is not None:
                want = alpha_num.value(x) - alpha_num.value(x / 2.0)
                mismatch("closed_form:time_to_level", x, cf.time_to_level(x, x / 2.0), want)
            if cf.flow is not None and cf.time_to_level is not None:
                t = cf.time_to_level(x, x / 2.0)
                if math.isfinite(t):
                    mismatch("closed_form:flow", x, cf.flow(x, t), x / 2.0)
        if model.k.inverse is not None:
            for x in sub[:: max(1, sub.size // 8)]:
                w = model.k(float(x))
                if 0.0 < w < math.inf:
                    back = model.k.inverse(w)
                    if not (abs(back - float(x)) <= 1e-8 * max(1.0, float(x))):
                        out.append(Violation("closed_form:k_inverse", float(x), back, "inverse does not round-trip"))
    return out


# ---------------------------------------------------------------------------
# JSON model files
# ---------------------------------------------------------------------------


def _slot_from_json(slot_name: str, obj: dict):
    if not isinstance(obj, dict):
        raise ValueError(f"model slot {slot_name!r} must be an object")
    if "expr" in obj:
        if slot_name == "k":
            return parse_survival_expression(obj["expr"])
        return parse_expression(obj["expr"])
    if "family" in obj:
        fam = ParamFamily(obj["family"], dict(obj.get("params", {})))
        role = "survival" if slot_name == "k" else "rate"
        return make_family(fam, role=role)
    raise ValueError(f"model slot {slot_name!r} needs either 'expr' or 'family'")


def load_model(source) -> ModelTriple:
    """Load a model from a JSON file path, file-like object, or dict.

    Schema: ``{"alpha": S, "beta": S, "k": S}`` where each slot S is either
    ``{"expr": "<text>"}`` or ``{"family": "<name>", "params": {...}}``.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    elif hasattr(source, "read"):
        obj = json.load(source)
    else:
        obj = source
    if not isinstance(obj, dict):
        raise ValueError("model file must hold a JSON object")
    missing = [s for s in ("alpha", "beta", "k") if s not in obj]
    if missing:
        raise ValueError(f"model file is missing slots: {', '.join(missing)}")
    alpha = _slot_from_json("alpha", obj["alpha"])
    beta = _slot_from_json("beta", obj["beta"])
    k = _slot_from_json("k", obj["k"])
    return make_model(alpha, beta, k)


def model_to_dict(model: ModelTriple) -> dict:
    """JSON-serializable description of the triple (sources only)."""

    def slot(fn):
        if fn.family is not None:
            return {"family": fn.family.name, "params": dict(fn.family.params)}
        return {"expr": fn.source}

    return {"alpha": slot(model.alpha), "beta": slot(model.beta), "k": slot(model.k)}
