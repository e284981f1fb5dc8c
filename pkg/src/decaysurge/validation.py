"""Acceptance suites: closed forms, Monte Carlo cross-checks, dualities.

Each criterion is a standalone function returning a :class:`CriterionResult`
with a pass/fail verdict at its pinned tolerance.  The suites are grouped for
the command-line runner; the pytest acceptance module runs all of them.

Statistical criteria accept a ``paths_scale`` factor; scaling a sample below
a useful size downgrades the verdict to a warning (result ``None``) instead
of pretending significance.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import analysis, chains, duality, oracles, sampler
from .model import ClosedForms, ModelTriple, ParamFamily, make_family, make_model, parse_expression

__all__ = [
    "CriterionResult",
    "SUITES",
    "run_suite",
    "all_criteria",
    "linear_model",
    "release_model",
    "explosive_model",
    "hawkes_model",
    "chains_model",
]

MIN_USEFUL_PATHS = 1000


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool | None  # None: inconclusive (sample too small), exit-clean warning
    detail: str
    seconds: float

    @property
    def status(self) -> str:
        if self.passed is None:
            return "WARN"
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.status} {self.name}: {self.detail} [{self.seconds:.1f}s]"


# ---------------------------------------------------------------------------
# Benchmark models
# ---------------------------------------------------------------------------


def linear_model(gamma1: float = 0.5, kappa1: float = 1.0, alpha1: float = 1.0) -> ModelTriple:
    """alpha = alpha1 x, beta constant, k = exp(-kappa1 x); stationary Gamma law."""
    return make_model(
        make_family(ParamFamily("power", {"alpha1": alpha1, "a": 1.0})),
        make_family(ParamFamily("constant", {"value": gamma1 * alpha1})),
        make_family(ParamFamily("exponential-survival", {"theta": kappa1})),
    )


def linear_model_expr(gamma1: float = 0.5, kappa1: float = 1.0) -> ModelTriple:
    """Expression twin of linear_model: exercises the quadrature paths."""
    return make_model(
        parse_expression("x"),
        parse_expression(f"{gamma1}"),
        make_family(ParamFamily("exponential-survival", {"theta": kappa1})),
    )


def release_model(alpha1: float = 1.0, beta1: float = 0.5) -> ModelTriple:
    """Constant decay and jump rates with k = exp(-x); 0 is regular."""
    return make_model(
        make_family(ParamFamily("constant", {"value": alpha1})),
        make_family(ParamFamily("constant", {"value": beta1})),
        make_family(ParamFamily("exponential-survival", {"theta": 1.0})),
    )


class _GammaLinearMinusInverse:
    """Rate integral x - 1/x (for alpha = x^2, beta = 1 + x^2)."""

    def __call__(self, x):
        return x - 1.0 / x


class _GammaLinearMinusInverseInv:
    def __call__(self, u):
        return 0.5 * (u + math.sqrt(u * u + 4.0))


def explosive_model() -> ModelTriple:
    """alpha = x^2, beta = 1 + x^2, k = exp(-x/2): finite scale limit."""
    from .model import _PowerFlow, _PowerTimeToLevel

    return make_model(
        parse_expression("x^2"),
        parse_expression("1+x^2"),
        make_family(ParamFamily("exponential-survival", {"theta": 0.5})),
        closed_forms=ClosedForms(
            flow=_PowerFlow(1.0, 2.0),
            time_to_level=_PowerTimeToLevel(1.0, 2.0),
            gamma=_GammaLinearMinusInverse(),
            gamma_inv=_GammaLinearMinusInverseInv(),
            gamma_at_zero=-math.inf,
            gamma_at_inf=math.inf,
        ),
    )


def hawkes_model(gamma1: float = 0.8) -> ModelTriple:
    """Linear self-exciting case: alpha = x, beta = gamma1 x, k = exp(-x)."""
    return make_model(
        make_family(ParamFamily("power", {"alpha1": 1.0, "a": 1.0})),
        make_family(ParamFamily("power", {"alpha1": gamma1, "a": 1.0})),
        make_family(ParamFamily("exponential-survival", {"theta": 1.0})),
    )


def chains_model() -> ModelTriple:
    """alpha = x, beta = 1, k = exp(-x): the jump-chain workhorse."""
    return make_model(
        make_family(ParamFamily("power", {"alpha1": 1.0, "a": 1.0})),
        make_family(ParamFamily("constant", {"value": 1.0})),
        make_family(ParamFamily("exponential-survival", {"theta": 1.0})),
    )


def _result(name, passed, detail, t0):
    return CriterionResult(name, passed, detail, time.time() - t0)


def _grid(lo, hi, n):
    return [lo + i * (hi - lo) / (n - 1) for i in range(n)]


# ---------------------------------------------------------------------------
# Criterion 1: closed forms
# ---------------------------------------------------------------------------


def criterion_closed_forms(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    tol = 1e-6
    fails = []

    def relerr(got, want):
        return abs(got - want) / max(1.0e-300, abs(want))

    # linear case via expressions: Gamma(y) = gamma1 log y, pi ~ y^{g-1} e^{-y}
    g1, k1 = 0.5, 1.0
    m = linear_model_expr(g1, k1)
    ratios = []
    for y in _grid(0.25, 4.0, 9):
        if relerr(analysis.big_gamma(m, y), g1 * math.log(y)) > tol:
            fails.append(f"rate integral (linear) at {y:.3g}")
        ratios.append(analysis.speed_density(m, y) / (y ** (g1 - 1.0) * math.exp(-k1 * y)))
    if (max(ratios) - min(ratios)) / abs(np.mean(ratios)) > tol:
        fails.append("speed density (linear) not proportional to Gamma density")

    # power case via expressions: alpha = x^2, beta = 1 => Gamma = -g1 (1/y - 1)
    mp = make_model(
        parse_expression("x^2"),
        parse_expression("1"),
        make_family(ParamFamily("exponential-survival", {"theta": 1.0})),
        auto_forms=False,
    )
    ratios = []
    for y in _grid(0.25, 4.0, 9):
        want = -(1.0) * (1.0 / y - 1.0)  # gamma1/theta = 1, anchored at 1
        if relerr(analysis.big_gamma(mp, y), want) > tol:
            fails.append(f"rate integral (inverse-power) at {y:.3g}")
        ratios.append(analysis.speed_density(mp, y) / (y**-2.0 * math.exp(-(y + 1.0 / y))))
    if (max(ratios) - min(ratios)) / abs(np.mean(ratios)) > tol:
        fails.append("speed density (inverse-power) not proportional to the heavy-tail form")

    # self-exciting scale: s(x) matches g/(1-g) (e^{(1-g)x} - 1) up to the
    # affine freedom of scale functions (anchor at 1 => factor e^{g}, shift)
    g = 0.8
    hk = hawkes_model(g)
    s_ref = lambda x: g / (1.0 - g) * (math.exp((1.0 - g) * x) - 1.0)
    for x in _grid(0.25, 4.0, 9):
        want = math.exp(g) * (s_ref(x) - s_ref(1.0))
        if relerr(analysis.scale_s(hk, x), want) > tol:
            fails.append(f"scale (self-exciting) at {x:.3g}")

    # sublinear-power flow: alpha = 2 sqrt(x): x_t = (sqrt(x) - t)^2, t0 = sqrt(x)
    mf = make_model(
        parse_expression("2*x^0.5"),
        parse_expression("1"),
        make_family(ParamFamily("exponential-survival", {"theta": 1.0})),
        auto_forms=False,
    )
    for x in (0.5, 1.0, 2.5):
        want_t0 = math.sqrt(x)
        if relerr(analysis.time_to_level(mf, x, 0.0), want_t0) > tol:
            fails.append(f"time to zero (sublinear flow) at {x:.3g}")
        for t in (0.2 * want_t0, 0.7 * want_t0):
            want = (math.sqrt(x) - t) ** 2
            if relerr(analysis.flow(mf, x, t), want) > tol:
                fails.append(f"flow (sublinear) at x={x:.3g}, t={t:.3g}")
        if analysis.flow(mf, x, 1.5 * want_t0) != 0.0:
            fails.append(f"flow (sublinear) not clamped at 0 for x={x:.3g}")

    detail = "all analytic cases within 1e-6" if not fails else "; ".join(fails[:4])
    return _result("criterion-1 closed forms", not fails, detail, t0)


# ---------------------------------------------------------------------------
# Criterion 2: generator annihilation
# ---------------------------------------------------------------------------


def criterion_generator_annihilation(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    worst_s = 0.0
    worst_phi = 0.0
    for m in (linear_model(), hawkes_model(0.8)):
        s = analysis.FunctionHandle(lambda y, m=m: analysis.scale_s(m, y), domain_min=0.0)
        for x in _grid(0.5, 3.0, 20):
            gs = analysis.generator_apply(m, s, x)
            bound = 1e-5 * max(1.0, abs(m.alpha(x) * s.derivative(x)))
            worst_s = max(worst_s, abs(gs) / bound)
        a = 0.5
        phi = analysis.FunctionHandle(lambda y, m=m: analysis.mean_hitting_time(m, y, a), domain_min=a)
        for x in _grid(0.8, 3.0, 20):
            worst_phi = max(worst_phi, abs(analysis.generator_apply(m, phi, x) + 1.0))
    ok = worst_s <= 1.0 and worst_phi <= 1e-4
    detail = f"|Gs| at {worst_s:.2e} of the 1e-5 bound; worst |G phi + 1| = {worst_phi:.2e} (<= 1e-4)"
    return _result("criterion-2 generator annihilation", ok, detail, t0)


# ---------------------------------------------------------------------------
# Criterion 3: mean extinction time
# ---------------------------------------------------------------------------


def criterion_mean_extinction(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    m = release_model(1.0, 0.5)
    closed = 2.0 / (1.0 * (1.0 - 0.5))  # x / (alpha1 (1 - gamma1)) at x = 2
    quad = analysis.mean_extinction_time(m, 2.0)
    quad_ok = abs(quad - closed) <= 1e-6 * closed
    n = max(1, int(10**4 * paths_scale))
    est = sampler.mc_hitting_time(m, 2.0, 0.0, sampler.SimConfig(horizon=10_000.0), n, seed)
    if n < MIN_USEFUL_PATHS:
        return _result(
            "criterion-3 mean extinction",
            None,
            f"insufficient sample ({n} paths): quadrature {quad:.8f} vs closed {closed}",
            t0,
        )
    z = abs(est.mean - closed) / est.stderr
    ok = quad_ok and z <= 3.0 and est.censored == 0
    detail = (
        f"quadrature {quad:.9f} vs closed {closed} (ok={quad_ok}); "
        f"MC {est.mean:.4f}+-{est.stderr:.4f} over {n} paths, z={z:.2f}"
    )
    return _result("criterion-3 mean extinction", ok, detail, t0)


# ---------------------------------------------------------------------------
# Criterion 4: exit probability on the finite-scale-limit model
# ---------------------------------------------------------------------------


def criterion_exit_probability(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    """Compare the scale-ratio exit value against Monte Carlo, as stated.

    Known-red: the ratio presumes the two-sided exit time is almost surely
    finite, but this benchmark escapes to +inf without re-crossing the upper
    level with probability ~0.34 (measured via the certainty bound
    s1(60)/s1(4) ~ e^-28), so the Monte Carlo entry frequency provably
    differs from the ratio.  The b -> inf variant is valid even under escape
    and is cross-checked here as supporting evidence.
    """
    t0 = time.time()
    m = explosive_model()
    a, x, b = 0.5, 1.0, 4.0
    quad = analysis.exit_probability(m, x, a, b).value
    n = max(1, int(10**5 * paths_scale))
    est = sampler.mc_exit_probability(m, x, a, b, sampler.SimConfig(horizon=10_000.0), n, seed)
    if n < MIN_USEFUL_PATHS:
        return _result(
            "criterion-4 exit probability", None, f"insufficient sample ({n} paths); quadrature {quad:.6f}", t0
        )
    z = abs(est.prob - quad) / est.stderr
    ok = z <= 3.0
    # valid-under-escape variant: P(ever fall to a) = s1(x)/s1(a)
    ever = analysis.hit_below_probability(m, x, a)
    n2 = max(1, n // 10)
    hits = 0
    for i in range(n2):
        rng = sampler.RngStream(seed + 31, i)
        lvl = x
        while True:
            ev = sampler.sample_jump_time(m, lvl, rng)
            if ev.pre_level <= a:
                hits += 1
                break
            lvl = sampler.sample_jump_target(m, ev.pre_level, rng)
            if lvl > 60.0:
                break
    p2 = hits / n2
    se2 = math.sqrt(max(p2 * (1 - p2), 1e-12) / n2)
    z2 = abs(p2 - ever) / se2
    detail = (
        f"ratio {quad:.6f} vs MC {est.prob:.6f}+-{est.stderr:.6f} (z={z:.2f}, {n} paths): the ratio "
        f"presumes an a.s.-finite two-sided exit time, which this escaping model violates; "
        f"the escape-robust check P(ever fall to a)={ever:.6f} vs MC {p2:.6f} gives z={z2:.2f}"
    )
    return _result("criterion-4 exit probability", ok, detail, t0)


# ---------------------------------------------------------------------------
# Criterion 5: jump-time law (DKW)
# ---------------------------------------------------------------------------


def criterion_jump_time_law(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    m = linear_model()
    kin = analysis.kinetics(m)
    x = 1.0
    n = max(1, int(10**4 * paths_scale))
    rng = sampler.RngStream(seed, 0)
    draws = np.empty(n)
    for i in range(n):
        draws[i] = sampler.sample_jump_time(m, x, rng).time
    draws.sort()
    emp = np.arange(1, n + 1) / n
    cdf = np.array([1.0 - math.exp(kin.gamma(kin.flow(x, t)) - kin.gamma(x)) for t in draws])
    sup = float(np.abs(emp - cdf).max())
    band = math.sqrt(math.log(2.0 / 0.01) / (2.0 * n))
    if n < MIN_USEFUL_PATHS:
        return _result("criterion-5 jump-time law", None, f"insufficient sample ({n} draws)", t0)
    ok = sup < band
    return _result(
        "criterion-5 jump-time law", ok, f"DKW sup {sup:.5f} vs 1% band {band:.5f} ({n} draws)", t0
    )


# ---------------------------------------------------------------------------
# Criterion 6: embedded one-step law
# ---------------------------------------------------------------------------


def criterion_embedded_law(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    m = chains_model()
    x = 1.0
    probes = (0.25, 0.5, 1.5, 2.0, 2.5)
    n = max(1, int(10**5 * paths_scale))
    rng = sampler.RngStream(seed, 0)
    above = {lv: 0 for lv in probes}
    up = 0
    for _ in range(n):
        ev = sampler.sample_jump_time(m, x, rng)
        y = sampler.sample_jump_target(m, ev.pre_level, rng)
        if y > x:
            up += 1
        for lv in probes:
            if y > lv:
                above[lv] += 1
    if n < MIN_USEFUL_PATHS:
        return _result("criterion-6 embedded law", None, f"insufficient sample ({n} paths)", t0)
    worst = 0.0
    msgs = []
    for lv in probes:
        p = above[lv] / n
        se = math.sqrt(max(p * (1 - p), 1e-12) / n)
        z = abs(p - chains.embedded_survival(m, x, lv)) / se
        worst = max(worst, z)
        msgs.append(f"y={lv}: z={z:.2f}")
    pu = up / n
    se = math.sqrt(pu * (1 - pu) / n)
    zu = abs(pu - chains.up_move_probability(m, x)) / se
    worst = max(worst, zu)
    ok = worst <= 3.0
    return _result(
        "criterion-6 embedded law", ok, f"{'; '.join(msgs)}; up-move z={zu:.2f} (all <= 3)", t0
    )


# ---------------------------------------------------------------------------
# Criterion 7: stationary law of the linear model
# ---------------------------------------------------------------------------


def criterion_stationary_law(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    g1, k1 = 0.5, 1.0
    m = linear_model(g1, k1)
    n_paths = max(1, int(100 * paths_scale))
    horizon, burn = 500.0, 50.0
    cfg = sampler.SimConfig(horizon=horizon)
    m1s, m2s = [], []
    for i in range(n_paths):
        tr = sampler.simulate_path(m, g1 / k1, cfg, sampler.RngStream(seed, i))
        m1s.append(sampler.path_time_average(m, tr, burn, horizon, 1))
        m2s.append(sampler.path_time_average(m, tr, burn, horizon, 2))
    if n_paths < 50:
        return _result("criterion-7 stationary law", None, f"insufficient sample ({n_paths} paths)", t0)
    mean = float(np.mean(m1s))
    var = float(np.mean(m2s)) - mean * mean
    want_mean, want_var = g1 / k1, g1 / k1**2
    e1 = abs(mean - want_mean) / want_mean
    e2 = abs(var - want_var) / want_var
    ok = e1 <= 0.05 and e2 <= 0.05
    detail = f"mean {mean:.4f} (err {e1:.1%}), var {var:.4f} (err {e2:.1%}) vs Gamma({g1},{k1}) over {n_paths} paths"
    return _result("criterion-7 stationary law", ok, detail, t0)


# ---------------------------------------------------------------------------
# Criterion 8: branching-construction equivalence
# ---------------------------------------------------------------------------


def criterion_hawkes_equivalence(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    from scipy.stats import ks_2samp

    g1 = 0.8
    hp = oracles.HawkesParams(alpha1=1.0, beta1=g1)
    m = hawkes_model(g1)
    T = 5.0
    n = max(1, int(10**4 * paths_scale))
    branch = np.empty(n)
    for i in range(n):
        cl = oracles.hawkes_cluster_simulate(hp, 1.0, T, sampler.RngStream(seed + 1, i))
        branch[i] = oracles.hawkes_superposition_value(hp, 1.0, cl, T)
    generic = np.empty(n)
    cfg = sampler.SimConfig(horizon=T)
    for i in range(n):
        tr = sampler.simulate_path(m, 1.0, cfg, sampler.RngStream(seed + 2, i))
        generic[i] = tr.value_at(m, T)
    # offspring branching ratio over at least 1e4 events
    counts = []
    rng = sampler.RngStream(seed + 3, 0)
    while len(counts) < max(100, int(10**4 * paths_scale)):
        cl = oracles.hawkes_cluster_simulate(hp, 1.0, math.inf, rng)
        counts.extend(oracles.offspring_counts(cl))
    if n < MIN_USEFUL_PATHS:
        return _result("criterion-8 branching equivalence", None, f"insufficient sample ({n} paths)", t0)
    pv = float(ks_2samp(branch, generic).pvalue)
    off = float(np.mean(counts))
    off_ok = abs(off - g1) / g1 <= 0.02
    ok = pv > 0.01 and off_ok
    detail = f"two-sample KS p={pv:.4f} (>0.01) on {n}+{n} paths; offspring mean {off:.4f} vs {g1} ({abs(off-g1)/g1:.2%})"
    return _result("criterion-8 branching equivalence", ok, detail, t0)


# ---------------------------------------------------------------------------
# Criterion 9: shot-noise stationary transform
# ---------------------------------------------------------------------------


def criterion_shotnoise_lst(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    p = oracles.ShotNoiseParams(alpha=1.0, beta=0.5, theta=1.0)
    m = linear_model(gamma1=p.gamma, kappa1=p.theta, alpha1=p.alpha)
    T = 50.0
    n = max(1, int(10**4 * paths_scale))
    cfg = sampler.SimConfig(horizon=T)
    vals = np.empty(n)
    for i in range(n):
        tr = sampler.simulate_path(m, 1.0, cfg, sampler.RngStream(seed, i))
        vals[i] = tr.value_at(m, T)
    if n < MIN_USEFUL_PATHS:
        return _result("criterion-9 shot-noise transform", None, f"insufficient sample ({n} paths)", t0)
    msgs = []
    worst = 0.0
    for q in (0.5, 1.0, 2.0):
        e = np.exp(-q * vals)
        mean = float(e.mean())
        se = float(e.std(ddof=1) / math.sqrt(n))
        want = oracles.shotnoise_stationary_lst(p, q)
        z = abs(mean - want) / se
        worst = max(worst, z)
        msgs.append(f"q={q}: z={z:.2f}")
    ok = worst <= 3.0
    return _result("criterion-9 shot-noise transform", ok, "; ".join(msgs) + " (all <= 3)", t0)


# ---------------------------------------------------------------------------
# Criterion 10: pathwise duality
# ---------------------------------------------------------------------------


def criterion_duality(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    m = linear_model()
    cfg = sampler.SimConfig(horizon=50.0)
    worst = 0.0
    times_equal = True
    for s in range(100):
        res = duality.pathwise_duality_check(m, 2.0, cfg, seed + s)
        worst = max(worst, res.max_discrepancy)
        tr = sampler.simulate_path(m, 2.0, cfg, sampler.RngStream(seed + s, 0))
        if tuple(tr.jump_times) != res.jump_times:
            times_equal = False
    ok = worst < 1e-9 and times_equal
    detail = f"sup |1/X - dual| = {worst:.2e} (< 1e-9) over 100 seeds; jump-time sequences equal: {times_equal}"
    return _result("criterion-10 duality", ok, detail, t0)


# ---------------------------------------------------------------------------
# Criterion 11: record machinery
# ---------------------------------------------------------------------------


def criterion_records(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    rng = np.random.default_rng(seed)
    brute_ok = True
    for _ in range(10**4):
        n = int(rng.integers(1, 40))
        kind = rng.integers(0, 3)
        if kind == 0:
            vals = rng.normal(size=n)
        elif kind == 1:
            vals = rng.integers(0, 5, size=n).astype(float)  # ties on purpose
        else:
            vals = np.cumsum(rng.exponential(size=n))
        rc = chains.extract_records(vals)
        # brute force: scan every index against the running strict maximum
        idx = [0]
        for i in range(1, n):
            if vals[i] > max(vals[:i]):
                idx.append(i)
        if list(rc.record_indices) != idx:
            brute_ok = False
            break
        counts = [sum(1 for r in idx if r <= N) for N in range(n)]
        if list(rc.record_count_by_N) != counts:
            brute_ok = False
            break

    m = chains_model()
    k1_ok = chains.record_transition(m, 1, 1.0, 2.0) == chains.embedded_survival(m, 1.0, 2.0)
    quad = chains.record_transition(m, 2, 1.0, 2.0)

    n_mc = max(1, int(10**5 * paths_scale))
    hits = 0
    rngs = sampler.RngStream(seed + 9, 0)
    for _ in range(n_mc):
        ev1 = sampler.sample_jump_time(m, 1.0, rngs)
        z1 = sampler.sample_jump_target(m, ev1.pre_level, rngs)
        if z1 > 1.0:
            continue
        ev2 = sampler.sample_jump_time(m, z1, rngs)
        z2 = sampler.sample_jump_target(m, ev2.pre_level, rngs)
        if z2 > 2.0:
            hits += 1
    if n_mc < MIN_USEFUL_PATHS:
        return _result("criterion-11 records", None, f"insufficient sample ({n_mc} chains)", t0)
    p = hits / n_mc
    se = math.sqrt(max(p * (1 - p), 1e-12) / n_mc)
    z = abs(p - quad) / se
    ok = brute_ok and k1_ok and z <= 3.0
    detail = (
        f"brute-force extraction equal: {brute_ok}; depth-1 equals one-step survival: {k1_ok}; "
        f"two-step record {quad:.6f} vs MC {p:.6f} (z={z:.2f}, {n_mc} chains)"
    )
    return _result("criterion-11 records", ok, detail, t0)


# ---------------------------------------------------------------------------
# Criterion 12: regime classification
# ---------------------------------------------------------------------------


def criterion_regime_classification(paths_scale: float = 1.0, seed: int = 0) -> CriterionResult:
    t0 = time.time()
    cases = [
        ("linear", linear_model(), "harris_positive_recurrent"),
        ("finite-scale-limit", explosive_model(), "transient_or_explosive"),
        ("supercritical self-exciting", hawkes_model(1.2), "transient_or_explosive"),
    ]
    msgs = []
    ok = True
    for label, m, want in cases:
        rep = analysis.classify_regime(m)
        good = rep.verdict == want
        if label == "supercritical self-exciting":
            good = good and rep.extinction_possible
        ok = ok and good
        msgs.append(f"{label}: {rep.verdict}{' [extinct-flag]' if rep.extinction_possible else ''}")
    return _result("criterion-12 regime classification", ok, "; ".join(msgs), t0)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


all_criteria = [
    criterion_closed_forms,
    criterion_generator_annihilation,
    criterion_mean_extinction,
    criterion_exit_probability,
    criterion_jump_time_law,
    criterion_embedded_law,
    criterion_stationary_law,
    criterion_hawkes_equivalence,
    criterion_shotnoise_lst,
    criterion_duality,
    criterion_records,
    criterion_regime_classification,
]

SUITES = {
    "closedforms": [
        criterion_closed_forms,
        criterion_generator_annihilation,
        criterion_regime_classification,
    ],
    "montecarlo": [
        criterion_mean_extinction,
        criterion_exit_probability,
        criterion_jump_time_law,
        criterion_embedded_law,
        criterion_stationary_law,
        criterion_records,
    ],
    "duality": [criterion_duality],
    "hawkes": [criterion_hawkes_equivalence],
    "shotnoise": [criterion_shotnoise_lst],
    "all": all_criteria,
}


def run_suite(name: str, paths_scale: float = 1.0, seed: int = 0) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choices: {', '.join(SUITES)}")
    return [fn(paths_scale=paths_scale, seed=seed) for fn in SUITES[name]]
