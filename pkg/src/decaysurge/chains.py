"""The embedded jump chain and its record structure.

The positions right after jumps form a discrete-time Markov chain whose
one-step survival has a closed integral form; it can be sampled directly
(no continuous clock needed), which is what this module does.  On top of it
sit strict upper records: record indices, record values, ages, and the
k-step record transition function.

Validity: the closed-form one-step law holds for x > 0 when the rate
integral diverges at 0 (jumps always come before extinction) and the flow
never reaches 0 in finite time.  Outside that regime use the continuous-time
sampler.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from . import analysis, calculus
from .analysis import PreconditionError
from .calculus import CumulativeIntegral, integrate
from .model import ModelTriple
from .sampler import RngStream

__all__ = [
    "EmbeddedSample",
    "RecordChain",
    "embedded_survival",
    "up_move_probability",
    "sample_embedded_step",
    "simulate_embedded_chain",
    "extract_records",
    "record_transition",
    "write_record_chain_csv",
]


@dataclass(frozen=True)
class EmbeddedSample:
    """One step of the jump chain; inter_jump_time is optional (marginal law).

    The optional waiting time is drawn from its own one-step marginal, not
    jointly with the landing position (the two are dependent through the
    pre-jump level); chains built with times are for timing statistics, not
    for the joint (time, position) law.
    """

    z_next: float
    direction: str  # "up" | "down"
    inter_jump_time: float | None = None


def _require_embedded_regime(kin, x: float) -> None:
    if not x > 0:
        raise ValueError("x must be positive")
    if kin.gamma_limits()[0] > -math.inf:
        raise PreconditionError(
            "the embedded one-step law needs the rate integral to diverge at 0 "
            "(otherwise the jump clock can run out first)"
        )
    if math.isfinite(kin.t0_mass()):
        raise PreconditionError(
            "the embedded one-step law needs the flow to never reach 0 in finite time; "
            "simulate in continuous time instead"
        )


def _chain_parts(model: ModelTriple):
    """(head, cumulative) for J(w) = integral_0^w gamma(z) e^{Gamma(z)}/k(z) dz."""
    kin = analysis.kinetics(model)
    cache = kin._consts
    if "chain_J" not in cache:
        jint = _JIntegrand(model, kin)
        w0 = 1e-4
        head = integrate(jint, 0.0, w0, tol=1e-12).value
        cache["chain_J"] = (w0, head, CumulativeIntegral(jint, anchor=w0, tol=1e-12), jint)
    return cache["chain_J"]


class _JIntegrand:
    __slots__ = ("model", "kin")

    def __init__(self, model, kin):
        self.model = model
        self.kin = kin

    def __call__(self, z: float) -> float:
        return self.model.gamma_ratio(z) * math.exp(self.kin.gamma(z) - self.kin.logk(z))


def _j_value(model: ModelTriple, w: float) -> float:
    w0, head, cum, jint = _chain_parts(model)
    if w <= 0.0:
        return 0.0
    if w < w0:
        return integrate(jint, 0.0, w, tol=1e-12).value
    return head + cum.value(w)


def embedded_survival(model: ModelTriple, x: float, y: float) -> float:
    """P(next jump-chain position > y | current position x), x > 0.

    One quadrature against the kernel survival; the up-move probability is
    the y = x case.  Values are clipped to [0, 1] against quadrature noise.
    """
    kin = analysis.kinetics(model)
    _require_embedded_regime(kin, x)
    if y <= 0.0:
        return 1.0
    m = min(x, y)
    gx = kin.gamma(x)
    term_down = 1.0 - math.exp(kin.gamma(m) - gx) if m < x else 0.0
    term_jump = math.exp(kin.logk(y) - gx) * _j_value(model, m)
    return min(1.0, max(0.0, term_down + term_jump))


def up_move_probability(model: ModelTriple, x: float) -> float:
    """P(the next move of the jump chain goes above the current level x)."""
    return embedded_survival(model, x, x)


def sample_embedded_step(
    model: ModelTriple, x: float, rng: RngStream, with_time: bool = False
) -> EmbeddedSample:
    """Draw one jump-chain step from x without simulating continuous time.

    Uniform draws are consumed in a fixed order: direction, then position,
    then (optionally) the waiting time.  Up-moves invert in closed form: the
    conditional law above x is exactly the jump kernel from x, so the target
    is k^{-1}(V k(x)).  Down-moves bisect the one-step survival.
    """
    kin = analysis.kinetics(model)
    _require_embedded_regime(kin, x)
    p_up = up_move_probability(model, x)
    go_up = rng.uniform() <= p_up
    v = rng.uniform()
    if go_up:
        from .sampler import _numeric_k_inverse

        kx = model.k(x)
        inv = model.k.inverse or _numeric_k_inverse(model, kin)
        z_next = max(inv(v * kx), x)
        direction = "up"
    else:
        u = p_up + v * (1.0 - p_up)
        lo = x
        for _ in range(4000):
            lo /= 2.0
            if embedded_survival(model, x, lo) >= u or lo < 1e-280:
                break
        z_next = calculus.find_root(
            lambda y: embedded_survival(model, x, y) - u, lo, x, tol=1e-13 * max(1.0, x)
        )
        direction = "down"
    t = None
    if with_time:
        u2 = rng.uniform()
        z_pre = kin.gamma_inv(kin.gamma(x) + math.log(u2))
        z_pre = min(z_pre, x)
        t = kin.t_level(x, z_pre)
    return EmbeddedSample(z_next=z_next, direction=direction, inter_jump_time=t)


def simulate_embedded_chain(
    model: ModelTriple, x0: float, n_steps: int, rng: RngStream, with_times: bool = False
) -> list[EmbeddedSample]:
    """Iterate sample_embedded_step n_steps times from x0."""
    out = []
    x = float(x0)
    for _ in range(n_steps):
        step = sample_embedded_step(model, x, rng, with_time=with_times)
        out.append(step)
        x = step.z_next
    return out


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecordChain:
    """Strict upper records of a sequence, with ages and running counts.

    record_indices[0] == 0 by convention (the initial value opens the
    record sequence); ages[n-1] is the index gap between records n-1 and n;
    record_count_by_N[N] counts records among positions 0..N.
    """

    record_indices: tuple
    record_values: tuple
    ages: tuple
    record_count_by_N: tuple


def extract_records(values) -> RecordChain:
    """Single pass; ties are not records (strict inequality)."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("need a non-empty sequence")
    idx = [0]
    rec = [vals[0]]
    counts = []
    best = vals[0]
    n_rec = 1
    counts.append(n_rec)
    for i, v in enumerate(vals[1:], start=1):
        if v > best:
            best = v
            idx.append(i)
            rec.append(v)
            n_rec += 1
        counts.append(n_rec)
    ages = tuple(b - a for a, b in zip(idx[:-1], idx[1:]))
    return RecordChain(tuple(idx), tuple(rec), ages, tuple(counts))


def _transition_density(model: ModelTriple, x: float, w: float) -> float:
    """Density of the one-step position at w from x, by central differences
    of the survival in its second argument (adaptive step, kept inside the
    support)."""
    h = 1e-5 * max(w, 1e-3)
    h = min(h, w / 4.0)
    if w < x:
        h = min(h, (x - w) / 4.0)
    if h <= 0.0:
        h = 1e-9 * max(w, 1e-3)
    lo = embedded_survival(model, x, w + h)
    hi = embedded_survival(model, x, w - h)
    return max(0.0, (hi - lo) / (2.0 * h))


def record_transition(model: ModelTriple, k: int, x: float, y: float) -> float:
    """P(next record happens k steps ahead with value above y | record at x).

    k = 1 is the one-step survival; k = 2 and 3 integrate the intermediate
    non-record positions over [0, x] with the differenced transition density
    (nesting capped at 3: one more level per k).
    """
    if k not in (1, 2, 3):
        raise ValueError("record transition depth k must be 1, 2 or 3")
    if not y >= x:
        raise ValueError("need y >= x (records move strictly up)")
    if k == 1:
        return embedded_survival(model, x, y)

    if k == 2:
        f = lambda w: _transition_density(model, x, w) * embedded_survival(model, w, y)
        return integrate(f, 0.0, x, tol=1e-8).value

    def inner(w1: float) -> float:
        g = lambda w2: _transition_density(model, w1, w2) * embedded_survival(model, w2, y)
        # the density has a kink at w2 = w1; integrate the two sides apart
        left = integrate(g, 0.0, w1, tol=1e-7).value if w1 > 0 else 0.0
        right = integrate(g, w1, x, tol=1e-7).value if w1 < x else 0.0
        return left + right

    f = lambda w1: _transition_density(model, x, w1) * inner(w1)
    return integrate(f, 0.0, x, tol=1e-6).value


def write_record_chain_csv(chain: RecordChain, fh, record_times=None) -> None:
    """CSV rows (n, R_n, Zstar_n, A_n, S_Rn); times column empty if unknown."""
    writer = csv.writer(fh)
    writer.writerow(["n", "R_n", "Zstar_n", "A_n", "S_Rn"])
    for n, (r, z) in enumerate(zip(chain.record_indices, chain.record_values)):
        age = chain.ages[n - 1] if n >= 1 else ""
        t = repr(record_times[n]) if record_times is not None else ""
        writer.writerow([n, r, repr(z), age, t])
