"""Independent constructions used to cross-validate the generic machinery.

Two special cases of the decay-surge dynamics admit their own, completely
different simulations or formulas:

* with linear rates (alpha1 x, beta1 x) and a unit-mean exponential kernel,
  the path is an additive superposition of exponentially decaying shots and
  can be built as a branching cascade of inhomogeneous Poisson processes;
* with (alpha x, beta, exp(-theta x)) it is classical linear shot noise,
  whose stationary Laplace transform is explicit via Campbell's formula.

Nothing here touches the generic sampler, which is the point: agreement
between the two routes validates both.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from . import calculus
from .sampler import RngStream

__all__ = [
    "HawkesParams",
    "ShotNoiseParams",
    "HawkesEvent",
    "HawkesCluster",
    "hawkes_cluster_simulate",
    "hawkes_with_immigration",
    "hawkes_superposition_value",
    "offspring_counts",
    "shotnoise_stationary_lst",
    "shotnoise_campbell_lst",
]


@dataclass(frozen=True)
class HawkesParams:
    """Linear self-exciting cascade: decay alpha1, rate slope beta1,
    immigration mu, unit-mean exponential marks."""

    alpha1: float
    beta1: float
    mu: float = 0.0

    def __post_init__(self):
        if not self.alpha1 > 0 or not self.beta1 >= 0 or self.mu < 0:
            raise ValueError("need alpha1 > 0, beta1 >= 0, mu >= 0")

    @property
    def gamma1(self) -> float:
        return self.beta1 / self.alpha1


@dataclass(frozen=True)
class ShotNoiseParams:
    """Markov shot noise: attenuation alpha, arrival rate beta, mark rate theta."""

    alpha: float
    beta: float
    theta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0 and self.theta > 0):
            raise ValueError("all shot-noise parameters must be positive")

    @property
    def gamma(self) -> float:
        return self.beta / self.alpha


@dataclass(frozen=True)
class HawkesEvent:
    time: float
    mark: float
    generation: int
    parent: int  # index into the event list; -1 for root-driven events


@dataclass(frozen=True)
class HawkesCluster:
    events: tuple  # HawkesEvent, sorted by time
    guard_tripped: bool


def _exp_draw(rng: RngStream, rate: float = 1.0) -> float:
    return -math.log(rng.uniform()) / rate


def _spawn_times(rng: RngStream, weight: float, params: HawkesParams, start: float, horizon: float):
    """Jump times of an inhomogeneous Poisson process with rate
    beta1 * weight * exp(-alpha1 (t - start)): exponential waits in the
    transformed time of the integrated rate, whose total mass is
    gamma1 * weight (so the process dies out by itself)."""
    total_mass = params.gamma1 * weight
    if total_mass <= 0.0:
        return []
    used = 0.0
    out = []
    while True:
        used += _exp_draw(rng)
        if used >= total_mass:
            return out
        t = start - math.log(1.0 - used / total_mass) / params.alpha1
        if t > horizon:
            return out
        out.append(t)


def _run_cascade(params, events, queue, horizon, rng, max_events):
    guard = False
    while queue:
        start, weight, gen, parent = queue.popleft()
        if weight <= 0.0:
            continue
        for t in _spawn_times(rng, weight, params, start, horizon):
            events.append(HawkesEvent(time=t, mark=_exp_draw(rng), generation=gen, parent=parent))
            idx = len(events) - 1
            queue.append((t, events[idx].mark, gen + 1, idx))
            if len(events) >= max_events:
                guard = True
                queue.clear()
                break
    order = sorted(range(len(events)), key=lambda i: events[i].time)
    rank = {old: new for new, old in enumerate(order)}
    sorted_events = tuple(
        HawkesEvent(
            time=events[old].time,
            mark=events[old].mark,
            generation=events[old].generation,
            parent=rank[events[old].parent] if events[old].parent >= 0 else -1,
        )
        for old in order
    )
    return HawkesCluster(events=sorted_events, guard_tripped=guard)


def hawkes_cluster_simulate(
    params: HawkesParams, x0: float, horizon: float, rng: RngStream, max_events: int = 1_000_000
) -> HawkesCluster:
    """Branching construction of the self-exciting cascade from mass x0.

    The root mass x0 drives generation-0 events; every event's mark drives
    an independent decaying process one generation deeper, until extinction
    or the event guard.  Requires mu == 0 (immigration has its own builder).
    """
    if params.mu != 0.0:
        raise ValueError("cluster simulation is for mu == 0; use hawkes_with_immigration")
    queue = deque([(0.0, float(x0), 0, -1)])
    return _run_cascade(params, [], queue, horizon, rng, max_events)


def hawkes_with_immigration(
    params: HawkesParams, x0: float, horizon: float, rng: RngStream, max_events: int = 1_000_000
) -> HawkesCluster:
    """Immigrants arrive at rate mu (each an event of its own, generation 0)
    and feed cascades, alongside the initial-mass cascade from x0."""
    if not params.mu > 0:
        raise ValueError("needs mu > 0")
    events: list[HawkesEvent] = []
    queue = deque([(0.0, float(x0), 0, -1)])
    t = 0.0
    while True:
        t += _exp_draw(rng, params.mu)
        if t > horizon:
            break
        events.append(HawkesEvent(time=t, mark=_exp_draw(rng), generation=0, parent=-1))
        queue.append((t, events[-1].mark, 1, len(events) - 1))
    return _run_cascade(params, events, queue, horizon, rng, max_events)


def hawkes_superposition_value(params: HawkesParams, x0: float, cluster: HawkesCluster, t: float) -> float:
    """Additive superposition value at time t:
    exp(-alpha1 t) x0 + sum of exp(-alpha1 (t - S)) * mark over events S <= t."""
    total = math.exp(-params.alpha1 * t) * x0
    for ev in cluster.events:
        if ev.time <= t:
            total += math.exp(-params.alpha1 * (t - ev.time)) * ev.mark
    return total


def offspring_counts(cluster: HawkesCluster) -> list[int]:
    """Direct-children count per event (for branching-ratio checks)."""
    counts = [0] * len(cluster.events)
    for ev in cluster.events:
        if ev.parent >= 0:
            counts[ev.parent] += 1
    return counts


# ---------------------------------------------------------------------------
# Shot noise
# ---------------------------------------------------------------------------


def _exp_mark_lst(theta: float):
    return lambda s: 1.0 / (1.0 + s / theta)


def shotnoise_stationary_lst(params: ShotNoiseParams, q: float, mark_lst=None) -> float:
    """Stationary Laplace transform E[exp(-q X_inf)].

    Exponential marks give the closed form (1 + q/theta)^(-gamma); any other
    mark transform goes through the Campbell quadrature.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    if mark_lst is None:
        return (1.0 + q / params.theta) ** (-params.gamma)
    return shotnoise_campbell_lst(params, q, mark_lst=mark_lst)


def shotnoise_campbell_lst(params: ShotNoiseParams, q: float, mark_lst=None) -> float:
    """Campbell-formula route: exp(-gamma * integral_0^1 (1 - phi(q u))/u du).

    Kept separate from the closed form on purpose; the two must agree for
    exponential marks, which the tests pin down.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q == 0.0:
        return 1.0
    phi = mark_lst if mark_lst is not None else _exp_mark_lst(params.theta)
    integrand = lambda u: (1.0 - phi(q * u)) / u
    val = calculus.integrate(integrand, 0.0, 1.0, tol=1e-11).value
    return math.exp(-params.gamma * val)
