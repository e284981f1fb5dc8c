"""Command-line front end: dslab <analyze|simulate|embedded|records|exitprob|hitmean|validate>.

Model files are JSON objects with slots "alpha", "beta", "k", each either
{"expr": "<text>"} or {"family": "<name>", "params": {...}}.  Numeric outputs
are a pure function of (model file, flags, seed); repeated runs reproduce
them byte for byte.  Commands that write files also write a run manifest
(command, model hash, seed, flag echo, outputs, wall-clock) last.

Exit codes: 0 success, 1 failed checks/validation, 2 usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis, chains, sampler, validation
from .model import load_model, validate_triple

DEFAULT_HORIZON = 100.0
DEFAULT_PATHS = 10_000
DEFAULT_MAX_JUMPS = 1_000_000


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


class _Manifest:
    def __init__(self, command: str, args: argparse.Namespace):
        self.t0 = time.time()
        self.command = command
        self.model_file = getattr(args, "model", None)
        self.seed = getattr(args, "seed", None)
        self.flags = {k: v for k, v in vars(args).items() if k not in ("func", "model")}
        self.outputs: list[str] = []

    def add(self, path: Path) -> Path:
        self.outputs.append(str(path))
        return path

    def write(self, out_dir: Path) -> None:
        doc = {
            "command": self.command,
            "model_file": self.model_file,
            "model_sha256": _sha256(self.model_file) if self.model_file else None,
            "seed": self.seed,
            "flags": self.flags,
            "outputs": self.outputs,
            "duration_seconds": time.time() - self.t0,
        }
        with open(out_dir / "run_manifest.json", "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_checked_model(args):
    try:
        model = load_model(args.model)
    except FileNotFoundError:
        print(f"error: model file not found: {args.model}", file=sys.stderr)
        raise SystemExit(2)
    except (ValueError, json.JSONDecodeError) as e:
        print(f"error: cannot load model: {e}", file=sys.stderr)
        raise SystemExit(2)
    violations = validate_triple(model, np.geomspace(1e-4, 1e4, 64))
    if violations:
        for v in violations[:10]:
            print(f"model violation: {v}", file=sys.stderr)
        raise SystemExit(1)
    return model


def _out_dir(args) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _json_default(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    raise TypeError(type(v))


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)  # "inf" / "-inf" / "nan" as strings, valid JSON
    return v


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    manifest = _Manifest("analyze", args)
    model = _load_checked_model(args)
    rep = analysis.classify_regime(model)
    bd = rep.boundary
    s_inf_finite = math.isfinite(rep.s_at_inf)
    report = {
        "verdict": rep.verdict,
        "extinction_possible": rep.extinction_possible,
        "rate_integral_at_0": _clean(rep.gamma_at_0),
        "rate_integral_at_inf": _clean(rep.gamma_at_inf),
        "scale_limit_at_inf": _clean(rep.s_at_inf),
        "speed_density_integrable_at_0": rep.pi_integrable_at_0,
        "speed_density_integrable_at_inf": rep.pi_integrable_at_inf,
        "boundary": {
            "verdict": bd.verdict,
            "condition_R": bd.condition_R,
            "condition_A": bd.condition_A,
            "time_to_zero_finite": bd.t0_finite,
            "rate_integral_finite_at_0": bd.gamma0_finite,
        },
        "formula_preconditions": {
            "exit_probability_ratio": (rep.gamma_at_inf == math.inf) and s_inf_finite,
            "mean_hitting_time": rep.pi_integrable_at_inf,
            "mean_extinction_time": rep.pi_integrable_at_inf
            and bd.t0_finite
            and bd.gamma0_finite,
            "embedded_one_step_law": (rep.gamma_at_0 == -math.inf) and not bd.t0_finite,
        },
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    out = _out_dir(args)
    if out is not None:
        with open(manifest.add(out / "report.json"), "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        grid = np.geomspace(args.grid_min, args.grid_max, args.grid_points)
        with open(manifest.add(out / "analysis_tables.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "rate_integral", "scale_increasing", "scale_decreasing", "speed_density"])
            for x in grid:
                x = float(x)
                s1 = analysis.scale_s1(model, x) if s_inf_finite else ""
                w.writerow(
                    [repr(x), repr(analysis.big_gamma(model, x)), repr(analysis.scale_s(model, x)),
                     repr(s1) if s1 != "" else "", repr(analysis.speed_density(model, x))]
                )
        manifest.write(out)
    return 0


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    manifest = _Manifest("simulate", args)
    if args.paths < 1:
        print("error: --paths must be at least 1", file=sys.stderr)
        return 2
    model = _load_checked_model(args)
    cfg = sampler.SimConfig(horizon=args.horizon, max_jumps=args.max_jumps, zero_policy=args.zero_policy)
    stats = sampler.simulate_ensemble(
        model, args.x0, cfg, args.paths, args.seed, levels=tuple(args.level or ()), keep_paths=True
    )
    out = _out_dir(args)
    if out is None:
        print("error: simulate needs --out DIR", file=sys.stderr)
        return 2
    with open(manifest.add(out / "trajectories.csv"), "w", newline="", encoding="utf-8") as fh:
        sampler.write_trajectories_csv(stats.paths, fh)
    with open(manifest.add(out / "inter_jump_times.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "event_index", "inter_jump_time"])
        for pid, traj in enumerate(stats.paths):
            for j, dt in enumerate(traj.inter_jump_times):
                w.writerow([pid, j, repr(dt)])
    with open(manifest.add(out / "ensemble.json"), "w", encoding="utf-8") as fh:
        json.dump(sampler.ensemble_to_dict(stats), fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest.write(out)
    counts = {t: stats.terminations.count(t) for t in sorted(set(stats.terminations))}
    print(f"simulated {args.paths} paths to horizon {args.horizon}: terminations {counts}")
    return 0


# ---------------------------------------------------------------------------
# embedded / records
# ---------------------------------------------------------------------------


def cmd_embedded(args) -> int:
    manifest = _Manifest("embedded", args)
    model = _load_checked_model(args)
    rng = sampler.RngStream(args.seed, 0)
    try:
        steps = chains.simulate_embedded_chain(model, args.x0, args.steps, rng, with_times=args.with_times)
    except analysis.PreconditionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    rows = []
    s_n = 0.0
    for n, st in enumerate(steps, start=1):
        s_n = s_n + st.inter_jump_time if st.inter_jump_time is not None else math.nan
        rows.append([n, repr(st.z_next), st.direction, repr(st.inter_jump_time) if st.inter_jump_time is not None else "", repr(s_n) if st.inter_jump_time is not None else ""])
    out = _out_dir(args)
    if out is not None:
        with open(manifest.add(out / "embedded_chain.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "Z_n", "direction", "T_n", "S_n"])
            w.writerows(rows)
        manifest.write(out)
    else:
        for r in rows[:20]:
            print(",".join(str(c) for c in r))
        if len(rows) > 20:
            print(f"... ({len(rows)} rows; use --out DIR to write all)")
    return 0


def cmd_records(args) -> int:
    manifest = _Manifest("records", args)
    model = _load_checked_model(args)
    rng = sampler.RngStream(args.seed, 0)
    try:
        steps = chains.simulate_embedded_chain(model, args.x0, args.steps, rng, with_times=True)
    except analysis.PreconditionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    values = [args.x0] + [st.z_next for st in steps]
    times = [0.0]
    for st in steps:
        times.append(times[-1] + st.inter_jump_time)
    chain = chains.extract_records(values)
    record_times = [times[r] for r in chain.record_indices]
    out = _out_dir(args)
    if out is not None:
        with open(manifest.add(out / "record_chain.csv"), "w", newline="", encoding="utf-8") as fh:
            chains.write_record_chain_csv(chain, fh, record_times=record_times)
        manifest.write(out)
    else:
        print("n,R_n,Zstar_n,A_n,S_Rn")
        for n, (r, z, t) in enumerate(zip(chain.record_indices, chain.record_values, record_times)):
            age = chain.ages[n - 1] if n >= 1 else ""
            print(f"{n},{r},{z!r},{age},{t!r}")
    return 0


# ---------------------------------------------------------------------------
# exitprob / hitmean
# ---------------------------------------------------------------------------


def cmd_exitprob(args) -> int:
    manifest = _Manifest("exitprob", args)
    model = _load_checked_model(args)
    b = math.inf if args.b is None else args.b
    try:
        res = analysis.exit_probability(model, args.x, args.a, b)
    except (analysis.PreconditionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    doc = {
        "exit_probability": res.value,
        "a": args.a,
        "x": args.x,
        "b": _clean(b),
        "assumes_exit_time_finite": res.assumes_exit_time_finite,
    }
    if args.mc:
        cfg = sampler.SimConfig(horizon=args.horizon)
        if math.isinf(b):
            print("note: --mc requires a finite --b; skipping the Monte Carlo check", file=sys.stderr)
        else:
            est = sampler.mc_exit_probability(model, args.x, args.a, b, cfg, args.mc, args.seed)
            doc["monte_carlo"] = {"prob": est.prob, "stderr": est.stderr, "censored": est.censored, "paths": args.mc}
    print(json.dumps(doc, indent=2, sort_keys=True))
    out = _out_dir(args)
    if out is not None:
        with open(manifest.add(out / "exitprob.json"), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        manifest.write(out)
    return 0


def cmd_hitmean(args) -> int:
    manifest = _Manifest("hitmean", args)
    model = _load_checked_model(args)
    try:
        if args.a == 0.0:
            value = analysis.mean_extinction_time(model, args.x)
        else:
            value = analysis.mean_hitting_time(model, args.x, args.a)
    except (analysis.PreconditionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    doc = {"mean_hitting_time": value, "a": args.a, "x": args.x}
    if args.mc:
        est = sampler.mc_hitting_time(model, args.x, args.a, sampler.SimConfig(horizon=args.horizon), args.mc, args.seed)
        doc["monte_carlo"] = {
            "mean": _clean(est.mean),
            "stderr": _clean(est.stderr),
            "censored": est.censored,
            "paths": args.mc,
        }
    print(json.dumps(doc, indent=2, sort_keys=True))
    out = _out_dir(args)
    if out is not None:
        with open(manifest.add(out / "hitmean.json"), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        manifest.write(out)
    return 0


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    scale = 1.0
    if args.paths is not None:
        if args.paths < 1:
            print("error: --paths must be at least 1", file=sys.stderr)
            return 2
        scale = args.paths / 10_000.0
    results = validation.run_suite(args.suite, paths_scale=scale, seed=args.seed)
    failed = 0
    for res in results:
        print(res.line())
        if res.passed is False:
            failed += 1
        elif res.passed is None:
            print(f"warning: {res.name}: insufficient sample, verdict withheld", file=sys.stderr)
    print(f"suite '{args.suite}': {sum(1 for r in results if r.passed)} passed, "
          f"{failed} failed, {sum(1 for r in results if r.passed is None)} inconclusive")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dslab", description="decay-surge process laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    def add_model(sp):
        sp.add_argument("model", help="JSON model file")

    def add_seed(sp):
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("analyze", help="classify the model and tabulate its analytic objects")
    add_model(sp)
    sp.add_argument("--grid-min", type=float, default=0.05)
    sp.add_argument("--grid-max", type=float, default=20.0)
    sp.add_argument("--grid-points", type=int, default=101)
    sp.add_argument("--out", help="directory for report.json and analysis_tables.csv")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("simulate", help="simulate an ensemble and write CSV/JSON artifacts")
    add_model(sp)
    sp.add_argument("--paths", type=int, default=DEFAULT_PATHS)
    sp.add_argument("--horizon", type=float, default=DEFAULT_HORIZON)
    sp.add_argument("--x0", type=float, default=1.0)
    sp.add_argument("--max-jumps", type=int, default=DEFAULT_MAX_JUMPS)
    sp.add_argument("--zero-policy", choices=("absorb", "reflect"), default="absorb")
    sp.add_argument("--level", type=float, action="append", help="record first hitting time of this level (repeatable)")
    add_seed(sp)
    sp.add_argument("--out", required=False, help="output directory (required)")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("embedded", help="sample the jump chain directly (no continuous clock)")
    add_model(sp)
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--x0", type=float, default=1.0)
    sp.add_argument("--with-times", action="store_true")
    add_seed(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_embedded)

    sp = sub.add_parser("records", help="record chain of the jump chain (indices, values, ages, times)")
    add_model(sp)
    sp.add_argument("--steps", type=int, default=500)
    sp.add_argument("--x0", type=float, default=1.0)
    add_seed(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_records)

    sp = sub.add_parser("exitprob", help="probability of falling to a before reaching b")
    add_model(sp)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--b", type=float, default=None, help="omit for the ever-hit-a probability")
    sp.add_argument("--mc", type=int, default=0, help="cross-check with this many Monte Carlo paths")
    sp.add_argument("--horizon", type=float, default=DEFAULT_HORIZON)
    add_seed(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_exitprob)

    sp = sub.add_parser("hitmean", help="expected time to fall to a (a=0: extinction time)")
    add_model(sp)
    sp.add_argument("--a", type=float, required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--mc", type=int, default=0)
    sp.add_argument("--horizon", type=float, default=DEFAULT_HORIZON)
    add_seed(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_hitmean)

    sp = sub.add_parser("validate", help="run acceptance suites")
    sp.add_argument("--suite", choices=sorted(validation.SUITES), default="all")
    sp.add_argument("--paths", type=int, default=None, help="Monte Carlo budget (default 10000); small values warn")
    add_seed(sp)
    sp.set_defaults(func=cmd_validate)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rc = args.func(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    return rc


if __name__ == "__main__":
    sys.exit(main())
