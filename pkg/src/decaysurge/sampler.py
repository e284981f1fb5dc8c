"""Exact event-driven simulation of decay-surge paths.

No time discretization anywhere: jump times come from inverting the survival
law P(T > t) = exp(Gamma(x_t) - Gamma(x)) through the rate integral, and jump
targets from inverting the separable kernel survival k(y)/k(x).  Randomness
is consumed in a fixed documented order (one uniform for the waiting time,
then one for the target, per event), which the duality checks rely on.

Ensembles derive one counter-based stream per path from (seed, path index),
so results are bitwise reproducible regardless of how many workers run them.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analysis, calculus
from .model import ModelTriple

__all__ = [
    "SimConfig",
    "RngStream",
    "Jump",
    "FlowHitsZero",
    "Trajectory",
    "EnsembleStats",
    "HittingTimeEstimate",
    "ExitProbabilityEstimate",
    "sample_jump_time",
    "sample_jump_target",
    "simulate_path",
    "simulate_ensemble",
    "mc_hitting_time",
    "mc_exit_probability",
    "path_time_average",
    "write_trajectories_csv",
    "ensemble_to_dict",
]


@dataclass(frozen=True)
class SimConfig:
    """Knobs for one simulation run.

    max_jumps is the explosion guard: tripping it is a recorded outcome, not
    an error, because exploding in finite time is a legitimate regime here.
    zero_policy says what to do when the flow actually reaches 0: "absorb"
    ends the path, "reflect" waits an exponential time at rate beta(0) and
    relaunches with survival k(y)/k(0) (needs beta(0) > 0 and k(0) < inf).
    """

    horizon: float
    max_jumps: int = 1_000_000
    zero_policy: str = "absorb"
    tol: float = 1e-12

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.max_jumps < 1:
            raise ValueError("max_jumps must be at least 1")
        if self.zero_policy not in ("absorb", "reflect"):
            raise ValueError("zero_policy must be 'absorb' or 'reflect'")


class RngStream:
    """Counter-based random stream, reproducible from (seed, path index).

    Streams for distinct indices are statistically independent (Philox keyed
    through SeedSequence spawn keys), so ensembles can hand stream i to path
    i and get the same numbers no matter which worker runs it.
    """

    __slots__ = ("seed", "index", "_gen")

    def __init__(self, seed: int, index: int = 0):
        self.seed = int(seed)
        self.index = int(index)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.index,))
        self._gen = np.random.Generator(np.random.Philox(ss))

    def uniform(self) -> float:
        """A uniform draw in the open interval (0, 1)."""
        r = self._gen.random()
        while r == 0.0:
            r = self._gen.random()
        return r

    def __repr__(self):
        return f"RngStream(seed={self.seed}, index={self.index})"


@dataclass(frozen=True)
class Jump:
    """Next event is a jump after `time`, fired at level `pre_level`."""

    time: float
    pre_level: float


@dataclass(frozen=True)
class FlowHitsZero:
    """No jump on this leg: the flow decays forever; it reaches 0 at
    `time_to_zero` (infinite when 0 is unreachable)."""

    time_to_zero: float


def sample_jump_time(model: ModelTriple, x: float, rng: RngStream):
    """Draw the next event from level x > 0: Jump(t, z) or FlowHitsZero.

    Inverse-transform on the jump-time law: with U uniform, the pre-jump
    level solves Gamma(z) = Gamma(x) + log U, and the waiting time is the
    deterministic travel time from x down to z.  When the rate integral is
    finite at 0 and log U falls below Gamma(0) - Gamma(x), no jump ever
    happens on this leg.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    kin = analysis.kinetics(model)
    u = rng.uniform()
    logu = math.log(u)
    gx = kin.gamma(x)
    g0 = kin.gamma_limits()[0]
    if g0 > -math.inf and logu < g0 - gx:
        return FlowHitsZero(kin.t0(x))
    target = gx + logu
    try:
        z = kin.gamma_inv(target)
    except calculus.RangeError:
        return FlowHitsZero(kin.t0(x))
    if not z > 0.0 or not math.isfinite(z):
        # underflow far in the tail: resolve the waiting time in time space
        t = _jump_time_by_time_root(kin, x, -logu)
        return Jump(t, kin.flow(x, t))
    z = min(z, x)
    t = kin.t_level(x, z)
    if t <= 0.0:
        # U rounded to 1: degenerate draw, try again (strictly positive waits)
        return sample_jump_time(model, x, rng)
    return Jump(t, z)


def _jump_time_by_time_root(kin, x: float, hazard: float) -> float:
    g = lambda t: (kin.gamma(x) - kin.gamma(kin.flow(x, t))) - hazard
    hi = 1.0
    for _ in range(200):
        if g(hi) >= 0.0:
            break
        hi *= 2.0
    return calculus.find_root(g, 0.0, hi, tol=1e-13 * max(1.0, hi))


def jump_target_from_uniform(model: ModelTriple, z: float, v: float) -> float:
    """Deterministic kernel inversion: the target with survival rank v at z.

    Families carry a conditional-inverse form (z, v) -> y that never
    evaluates k at extreme arguments; without one the level w = v k(z) is
    inverted numerically.  Requires k(z) finite (an infinite survival mass
    means 0 attracts and no jump can launch there).
    """
    cond = model.k.conditional_inverse
    if cond is not None and z > 0.0:
        return max(cond(z, v), z)
    kin = analysis.kinetics(model)
    kz = kin.k0() if z == 0.0 else model.k(z)
    if not math.isfinite(kz) or kz <= 0.0:
        raise analysis.PreconditionError(
            f"jump target needs finite positive survival mass at z={z!r} (got {kz!r})"
        )
    w = v * kz
    inv = model.k.inverse
    if inv is not None:
        y = inv(w)
    else:
        y = _numeric_k_inverse(model, kin)(w)
    return max(y, z)


def sample_jump_target(model: ModelTriple, z: float, rng: RngStream) -> float:
    """Draw the post-jump position from level z: survival k(y)/k(z)."""
    return jump_target_from_uniform(model, z, rng.uniform())


def _numeric_k_inverse(model, kin):
    cache = kin._consts
    if "k_inv_numeric" not in cache:
        cache["k_inv_numeric"] = calculus.MonotoneInverse(
            model.k, (0.0, math.inf), direction="decreasing", tol=1e-13
        )
    return cache["k_inv_numeric"]


@dataclass
class Trajectory:
    """One simulated path: jump times, pre/post-jump levels, termination.

    Between events the path is the deterministic flow started at the last
    post-jump level, so (x0, jump data, end_time) reconstructs the whole
    function of time; value_at does that.
    """

    x0: float
    jump_times: list = field(default_factory=list)
    pre_jump: list = field(default_factory=list)
    post_jump: list = field(default_factory=list)
    termination: str = "horizon_reached"
    end_time: float = 0.0

    @property
    def jump_count(self) -> int:
        return len(self.jump_times)

    @property
    def inter_jump_times(self) -> list:
        prev = 0.0
        out = []
        for s in self.jump_times:
            out.append(s - prev)
            prev = s
        return out

    def segments(self):
        """(level, t_start, t_end) legs covering [0, end_time]."""
        level, start = self.x0, 0.0
        for s, post in zip(self.jump_times, self.post_jump):
            yield level, start, s
            level, start = post, s
        yield level, start, self.end_time

    def value_at(self, model: ModelTriple, t: float) -> float:
        if not 0.0 <= t <= self.end_time:
            raise ValueError(f"t={t!r} outside the simulated range [0, {self.end_time!r}]")
        level, start = self.x0, 0.0
        for s, post in zip(self.jump_times, self.post_jump):
            if t < s:
                break
            level, start = post, s
        return analysis.flow(model, level, t - start)


def simulate_path(model: ModelTriple, x0: float, config: SimConfig, rng: RngStream) -> Trajectory:
    """Run one path from x0 until horizon, absorption, or the jump guard."""
    if x0 < 0:
        raise ValueError("x0 must be nonnegative")
    kin = analysis.kinetics(model)
    if config.zero_policy == "reflect" and (kin.beta0() <= 0.0 or not math.isfinite(kin.k0())):
        raise analysis.PreconditionError(
            "zero_policy='reflect' needs a positive jump rate and finite survival mass at 0"
        )
    traj = Trajectory(x0=float(x0))
    t = 0.0
    x = float(x0)
    horizon = config.horizon
    while True:
        if x == 0.0:
            if config.zero_policy == "absorb":
                traj.termination = "absorbed_at_zero"
                traj.end_time = t
                return traj
            wait = -math.log(rng.uniform()) / kin.beta0()
            if t + wait >= horizon:
                traj.termination = "horizon_reached"
                traj.end_time = horizon
                return traj
            t += wait
            y = sample_jump_target(model, 0.0, rng)
            traj.jump_times.append(t)
            traj.pre_jump.append(0.0)
            traj.post_jump.append(y)
            x = y
        else:
            ev = sample_jump_time(model, x, rng)
            if isinstance(ev, FlowHitsZero):
                if t + ev.time_to_zero >= horizon:
                    traj.termination = "horizon_reached"
                    traj.end_time = horizon
                    return traj
                t += ev.time_to_zero
                x = 0.0
                continue
            if t + ev.time >= horizon:
                traj.termination = "horizon_reached"
                traj.end_time = horizon
                return traj
            t += ev.time
            y = sample_jump_target(model, ev.pre_level, rng)
            traj.jump_times.append(t)
            traj.pre_jump.append(ev.pre_level)
            traj.post_jump.append(y)
            x = y
        if traj.jump_count >= config.max_jumps:
            traj.termination = "explosion_guard_tripped"
            traj.end_time = t
            return traj


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------


@dataclass
class EnsembleStats:
    """Per-path outcomes keyed by path index (hence order-independent)."""

    seed: int
    n_paths: int
    x0: float
    config: SimConfig
    terminal_values: np.ndarray
    jump_counts: np.ndarray
    terminations: list
    hitting_times: dict
    paths: list | None = None


def _run_one(model, x0, config, seed, index, levels, keep_path):
    rng = RngStream(seed, index)
    traj = simulate_path(model, x0, config, rng)
    if traj.termination == "horizon_reached":
        terminal = traj.value_at(model, traj.end_time)
    elif traj.termination == "absorbed_at_zero":
        terminal = 0.0
    else:
        terminal = math.nan
    hits = tuple(_hitting_time(model, traj, lv) for lv in levels)
    return terminal, traj.jump_count, traj.termination, hits, (traj if keep_path else None)


def _hitting_time(model: ModelTriple, traj: Trajectory, level: float) -> float:
    """First time the path enters [level, inf) (level above start) or
    [0, level] (level at or below start); nan when it never does in time."""
    kin = analysis.kinetics(model)
    if level > traj.x0:
        # upward entry happens by jumps only
        for s, post in zip(traj.jump_times, traj.post_jump):
            if post >= level:
                return s
        return math.nan
    # downward entry happens along the flow of some leg
    for z, start, end in traj.segments():
        if z <= level:
            return start
        reach = kin.t_level(z, level)
        if start + reach <= end:
            return start + reach
    return math.nan


def _block_worker(args):
    model, x0, config, seed, lo, hi, levels, keep = args
    return [(_run_one(model, x0, config, seed, i, levels, keep)) for i in range(lo, hi)]


def _worker_count(workers) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("DSLAB_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def simulate_ensemble(
    model: ModelTriple,
    x0: float,
    config: SimConfig,
    n_paths: int,
    seed: int,
    levels: tuple = (),
    keep_paths: bool = False,
    workers: int | None = None,
) -> EnsembleStats:
    """Simulate n_paths independent paths; bitwise identical for a fixed
    (seed, n_paths) whatever the worker count (streams are per path index).

    ``levels`` asks for first hitting times of those levels per path;
    ``workers`` defaults to the DSLAB_THREADS environment variable, else 1.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be at least 1")
    nw = _worker_count(workers)
    levels = tuple(float(lv) for lv in levels)
    results = [None] * n_paths
    if nw == 1 or n_paths < 64:
        for i in range(n_paths):
            results[i] = _run_one(model, x0, config, seed, i, levels, keep_paths)
    else:
        block = max(32, (n_paths + 4 * nw - 1) // (4 * nw))
        tasks = [
            (model, x0, config, seed, lo, min(lo + block, n_paths), levels, keep_paths)
            for lo in range(0, n_paths, block)
        ]
        with ProcessPoolExecutor(max_workers=nw) as pool:
            for task, out in zip(tasks, pool.map(_block_worker, tasks)):
                lo = task[4]
                for j, rec in enumerate(out):
                    results[lo + j] = rec
    terminal = np.array([r[0] for r in results], dtype=float)
    counts = np.array([r[1] for r in results], dtype=int)
    terminations = [r[2] for r in results]
    hits = {lv: np.array([r[3][j] for r in results], dtype=float) for j, lv in enumerate(levels)}
    paths = [r[4] for r in results] if keep_paths else None
    return EnsembleStats(
        seed=seed,
        n_paths=n_paths,
        x0=float(x0),
        config=config,
        terminal_values=terminal,
        jump_counts=counts,
        terminations=terminations,
        hitting_times=hits,
        paths=paths,
    )


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HittingTimeEstimate:
    mean: float
    stderr: float
    censored: int
    n_paths: int


def mc_hitting_time(
    model: ModelTriple, x: float, a: float, config: SimConfig, n_paths: int, seed: int
) -> HittingTimeEstimate:
    """Empirical mean of the first time the path falls to level a from x.

    Paths that neither hit nor absorb before the horizon (or trip the jump
    guard) are censored and excluded from the mean; their count is reported.
    """
    if not 0 <= a <= x:
        raise ValueError("need 0 <= a <= x")
    if a == x:
        return HittingTimeEstimate(0.0, 0.0, 0, n_paths)
    kin = analysis.kinetics(model)
    times = []
    censored = 0
    for i in range(n_paths):
        rng = RngStream(seed, i)
        t, lvl = 0.0, float(x)
        hit = math.nan
        jumps = 0
        while True:
            ev = sample_jump_time(model, lvl, rng)
            if isinstance(ev, FlowHitsZero):
                reach = kin.t_level(lvl, a)
                hit = t + reach if t + reach <= config.horizon else math.nan
                break
            pre = ev.pre_level
            if pre <= a:
                reach = kin.t_level(lvl, a)
                hit = t + reach if t + reach <= config.horizon else math.nan
                break
            if t + ev.time >= config.horizon:
                break
            t += ev.time
            lvl = sample_jump_target(model, pre, rng)
            jumps += 1
            if jumps >= config.max_jumps:
                break
        if math.isnan(hit):
            censored += 1
        else:
            times.append(hit)
    if not times:
        return HittingTimeEstimate(math.nan, math.nan, censored, n_paths)
    arr = np.asarray(times)
    stderr = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else math.inf
    return HittingTimeEstimate(float(arr.mean()), stderr, censored, n_paths)


@dataclass(frozen=True)
class ExitProbabilityEstimate:
    prob: float
    stderr: float
    censored: int
    n_paths: int


def mc_exit_probability(
    model: ModelTriple, x: float, a: float, b: float, config: SimConfig, n_paths: int, seed: int
) -> ExitProbabilityEstimate:
    """Empirical P(enter (0, a] before [b, inf)) from x, horizon-censored."""
    if not 0 < a < x < b:
        raise ValueError("need 0 < a < x < b")
    below = 0
    decided = 0
    censored = 0
    for i in range(n_paths):
        rng = RngStream(seed, i)
        t, lvl = 0.0, float(x)
        jumps = 0
        while True:
            ev = sample_jump_time(model, lvl, rng)
            if isinstance(ev, FlowHitsZero):
                below += 1
                decided += 1
                break
            if ev.pre_level <= a:
                below += 1
                decided += 1
                break
            if t + ev.time >= config.horizon:
                censored += 1
                break
            t += ev.time
            target = sample_jump_target(model, ev.pre_level, rng)
            if target >= b:
                decided += 1
                break
            lvl = target
            jumps += 1
            if jumps >= config.max_jumps:
                censored += 1
                break
    if decided == 0:
        return ExitProbabilityEstimate(math.nan, math.nan, censored, n_paths)
    p = below / decided
    stderr = math.sqrt(p * (1.0 - p) / decided)
    return ExitProbabilityEstimate(p, stderr, censored, n_paths)


# ---------------------------------------------------------------------------
# Path functionals and exports
# ---------------------------------------------------------------------------


def path_time_average(
    model: ModelTriple, traj: Trajectory, t_start: float, t_end: float, moment: int = 1
) -> float:
    """Time average of X_t^moment over [t_start, t_end], segment-exact.

    Each flow leg is integrated by quadrature of the (cheap, closed-form)
    flow, so there is no discretization grid anywhere.
    """
    if not 0 <= t_start < t_end <= traj.end_time:
        raise ValueError("need 0 <= t_start < t_end <= end_time")
    kin = analysis.kinetics(model)
    total = 0.0
    for level, s0, s1 in traj.segments():
        lo = max(s0, t_start)
        hi = min(s1, t_end)
        if hi <= lo:
            continue
        if level == 0.0:
            continue
        val, _, _ = calculus.gk_integrate(
            lambda u: kin.flow(level, u) ** moment, lo - s0, hi - s0, 1e-10
        )
        total += val
    return total / (t_end - t_start)


def write_trajectories_csv(paths, fh) -> None:
    """CSV rows (path_id, event_index, time, pre_jump_value, post_jump_value)."""
    writer = csv.writer(fh)
    writer.writerow(["path_id", "event_index", "time", "pre_jump_value", "post_jump_value"])
    for pid, traj in enumerate(paths):
        for j, (s, pre, post) in enumerate(zip(traj.jump_times, traj.pre_jump, traj.post_jump)):
            writer.writerow([pid, j, repr(s), repr(pre), repr(post)])


def ensemble_to_dict(stats: EnsembleStats) -> dict:
    def clean(arr):
        return [None if (isinstance(v, float) and math.isnan(v)) else v for v in arr.tolist()]

    return {
        "seed": stats.seed,
        "n_paths": stats.n_paths,
        "x0": stats.x0,
        "config": {
            "horizon": stats.config.horizon,
            "max_jumps": stats.config.max_jumps,
            "zero_policy": stats.config.zero_policy,
        },
        "terminal_values": clean(stats.terminal_values),
        "jump_counts": stats.jump_counts.tolist(),
        "terminations": stats.terminations,
        "hitting_times": {repr(lv): clean(arr) for lv, arr in stats.hitting_times.items()},
    }
