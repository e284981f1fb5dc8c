"""Reciprocal correspondence with growth-collapse processes.

Mapping x -> 1/x turns a decay-surge triple (alpha, beta, k) into a
growth-collapse triple: growth rate x^2 alpha(1/x), jump rate beta(1/x), and
collapse shape h(x) = k(1/x) (the jump from level g lands at z <= g with
probability h(z)/h(g)).  The two processes share their jump times law for
reciprocal starting points, so one inversion sampler serves both: the
pathwise check below draws each waiting time once, advances both sides with
it, and measures how far 1/X and the growth-collapse path drift apart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import analysis, calculus, sampler
from .model import ModelTriple, RateFunction, _family_as_power
from .sampler import FlowHitsZero, RngStream, SimConfig

__all__ = [
    "GCTriple",
    "dual_triple",
    "dual_gamma",
    "pathwise_duality_check",
    "DualityCheckResult",
    "gc_first_jump_time",
]


@dataclass(frozen=True)
class _DualAlphaEval:
    alpha: object

    def __call__(self, x):
        return x * x * self.alpha(1.0 / x)


@dataclass(frozen=True)
class _ReciprocalArgEval:
    fn: object

    def __call__(self, x):
        return self.fn(1.0 / x)


@dataclass(frozen=True)
class _ReciprocalInverse:
    """h^{-1}(w) = 1/k^{-1}(w) when k carries a registered inverse."""

    k_inverse: object

    def __call__(self, w):
        return 1.0 / self.k_inverse(w)


@dataclass(frozen=True)
class GCTriple:
    """Growth-collapse triple (growth rate, jump rate, collapse shape)."""

    alpha_tilde: RateFunction
    beta_tilde: RateFunction
    h_tilde: object  # callable, non-decreasing positive
    h_tilde_inverse: object | None = None


def dual_triple(model: ModelTriple) -> GCTriple:
    """Compose the three reciprocal evaluators of the growth-collapse dual."""
    alpha_t = RateFunction(
        source=f"x^2*({model.alpha.source} at 1/x)", evaluator=_DualAlphaEval(model.alpha.evaluator)
    )
    beta_t = RateFunction(
        source=f"({model.beta.source} at 1/x)", evaluator=_ReciprocalArgEval(model.beta.evaluator)
    )
    h_t = _ReciprocalArgEval(model.k.evaluator)
    h_inv = _ReciprocalInverse(model.k.inverse) if model.k.inverse is not None else None
    return GCTriple(alpha_tilde=alpha_t, beta_tilde=beta_t, h_tilde=h_t, h_tilde_inverse=h_inv)


def dual_gamma(model: ModelTriple, x: float) -> float:
    """Rate integral of the dual triple: identically -Gamma(1/x)."""
    if not x > 0:
        raise ValueError("x must be positive")
    return -analysis.kinetics(model).gamma(1.0 / x)


# ---------------------------------------------------------------------------
# Growth flow of the dual
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _PowerGrowthFlow:
    """Flow of dg/dt = +c g^m; +inf after its finite blow-up time (m > 1)."""

    coeff: float
    m: float

    def __call__(self, g, t):
        g, t = float(g), float(t)
        if self.m == 1.0:
            return g * math.exp(self.coeff * t)
        q = 1.0 - self.m
        base = g**q + self.coeff * q * t
        if base <= 0.0:
            return math.inf
        return base ** (1.0 / q)


class _NumericGrowthFlow:
    def __init__(self, gc: GCTriple):
        self.alpha_t = gc.alpha_tilde
        self._cum = calculus.CumulativeIntegral(lambda y: 1.0 / self.alpha_t(y), anchor=1.0, tol=1e-12)

    def __call__(self, g, t):
        target = self._cum.value(g) + t
        hi = g
        for _ in range(400):
            hi *= 2.0
            if self._cum.value(hi) >= target:
                break
            if hi > 1e290:
                return math.inf
        return calculus.find_root(lambda z: self._cum.value(z) - target, g, hi, tol=1e-14 * hi)


def _growth_flow(model: ModelTriple, gc: GCTriple):
    ap = _family_as_power(model.alpha)
    if ap is not None:
        a1, a = ap
        return _PowerGrowthFlow(a1, 2.0 - a)
    return _NumericGrowthFlow(gc)


def _h_inverse(model: ModelTriple, gc: GCTriple):
    if gc.h_tilde_inverse is not None:
        return gc.h_tilde_inverse
    return calculus.MonotoneInverse(gc.h_tilde, (0.0, math.inf), direction="increasing", tol=1e-13)


# ---------------------------------------------------------------------------
# Pathwise check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DualityCheckResult:
    """max |1/X - X_gc| over event times, with the shared jump times.

    Jump times are common to both paths by construction (the waiting-time law
    is literally the same inversion), so the discrepancy isolates the flow
    and kernel conjugation identities.
    """

    max_discrepancy: float
    n_events: int
    jump_times: tuple
    truncated: bool  # a path left the open interior before the horizon


def pathwise_duality_check(
    model: ModelTriple, x0: float, config: SimConfig, seed: int
) -> DualityCheckResult:
    """Drive X (decay-surge) and its reciprocal dual with the same uniforms.

    Per event: one uniform fixes the shared waiting time (drawn through the
    decay-surge inversion), the dual side advances with its own growth flow;
    a second uniform fixes both jump targets through their respective kernel
    inversions.  Discrepancies are collected right before and right after
    each jump.
    """
    if not x0 > 0:
        raise ValueError("x0 must be positive")
    gc = dual_triple(model)
    grow = _growth_flow(model, gc)
    h_inv = _h_inverse(model, gc)
    h = gc.h_tilde
    kin = analysis.kinetics(model)
    rng = RngStream(seed, 0)

    x = float(x0)
    g = 1.0 / float(x0)
    t = 0.0
    worst = 0.0
    times = []
    truncated = False
    while True:
        ev = sampler.sample_jump_time(model, x, rng)
        if isinstance(ev, FlowHitsZero):
            truncated = True
            break
        if t + ev.time >= config.horizon:
            break
        t += ev.time
        times.append(t)
        z = ev.pre_level
        g_pre = grow(g, ev.time)
        if not math.isfinite(g_pre):
            truncated = True
            break
        worst = max(worst, abs(1.0 / z - g_pre))
        v = rng.uniform()
        y = sampler.jump_target_from_uniform(model, z, v)
        g_post = h_inv(v * h(g_pre))
        worst = max(worst, abs(1.0 / y - g_post))
        x, g = y, g_post
        if len(times) >= config.max_jumps:
            break
    return DualityCheckResult(
        max_discrepancy=worst, n_events=len(times), jump_times=tuple(times), truncated=truncated
    )


def gc_first_jump_time(model: ModelTriple, g0: float, rng: RngStream) -> float:
    """First jump time of the growth-collapse dual started at g0.

    Sampled through the dual's own rate integral (identically -Gamma(1/x)):
    the level to grow to solves dual_gamma(z) = dual_gamma(g0) - log U, and
    the waiting time is the dual travel time to it — which, by the
    reciprocal substitution, equals the decay-surge travel time between the
    reciprocal levels.  +inf when the dual never jumps (its rate integral
    saturates first).
    """
    if not g0 > 0:
        raise ValueError("g0 must be positive")
    kin = analysis.kinetics(model)
    u = rng.uniform()
    hazard = -math.log(u)
    base = dual_gamma(model, g0)
    # dual rate integral at +inf is -Gamma(0+)
    top = -kin.gamma_limits()[0]
    if base + hazard >= top:
        return math.inf
    z_recip = kin.gamma_inv(-(base + hazard))
    z_recip = min(z_recip, 1.0 / g0)
    return kin.t_level(1.0 / g0, z_recip)
