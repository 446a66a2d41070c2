"""Simulate and check the coupled population/resource SIR model.

    multisir simulate SCENARIO --out DIR
    multisir analyze DIR
    multisir check --seed K --trials N [--out DIR]
    multisir sweep --seeds A..B --jobs J --out DIR
    multisir generate PATH --seed K

Exit status: 0 success, 1 a checked claim was violated, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .export import export_trajectory, read_trajectory, write_json
from .integrator import IntegrationError
from .model import AssumptionError, validate_params
from .runner import analyze_trajectory, run_scenario
from .scenario import ScenarioError, generate_scenario, load_scenario, save_scenario

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _err(msg):
    print(msg, file=sys.stderr)


def _settings_overrides(args) -> dict:
    out = {}
    if args.dt is not None:
        out["dt"] = args.dt
    if args.t_end is not None:
        out["t_end"] = args.t_end
    return out


def _summary(label, result):
    bad = result.violations
    verdicts = " ".join(f"{r.claim}={r.verdict[0]}" for r in result.theorems)
    tau = result.peak.tau_p if result.peak else None
    tau_s = "none" if tau is None else f"{tau:.4f}"
    _err(f"{label}: R0={result.trajectory.scalars['R'][0]:.4f} tau_p={tau_s} {verdicts}"
         + (f"  VIOLATED: {', '.join(r.claim for r in bad)}" if bad else ""))


def cmd_simulate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    problems = validate_params(scenario.params)
    if problems:
        _err("error: scenario violates assumptions: " + ", ".join(problems))
        return EXIT_USAGE
    overrides = _settings_overrides(args)
    if overrides:
        scenario = scenario.with_settings(**overrides)
    try:
        result = run_scenario(scenario)
    except IntegrationError as exc:
        _err(f"error: integration failed: {exc}")
        return EXIT_USAGE
    export_trajectory(result, args.out, args.format)
    _summary(str(args.scenario), result)
    return EXIT_VIOLATION if result.violations else EXIT_OK


def cmd_analyze(args) -> int:
    d = Path(args.dir)
    scen_path = d / "scenario.json"
    traj_path = next((p for p in (d / "trajectory.csv", d / "trajectory.json") if p.exists()), None)
    if traj_path is None:
        _err(f"error: {d}: no trajectory.csv or trajectory.json")
        return EXIT_USAGE
    if not scen_path.exists():
        _err(f"error: {d}: scenario.json missing")
        return EXIT_USAGE
    try:
        scenario = load_scenario(scen_path)
        traj = read_trajectory(traj_path)
    except (ScenarioError, ValueError, KeyError) as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    if traj.n != scenario.params.n or traj.m != scenario.params.m:
        _err("error: trajectory and scenario sizes disagree")
        return EXIT_USAGE
    result = analyze_trajectory(scenario, traj)
    write_json([r.to_dict() for r in result.theorems], d / "theorems.json")
    write_json(result.peak.to_dict() if result.peak else None, d / "peak.json")
    _summary(str(d), result)
    return EXIT_VIOLATION if result.violations else EXIT_OK


def _run_seed(seed, overrides, out, fmt_name):
    scenario = generate_scenario(seed=seed)
    if overrides:
        scenario = scenario.with_settings(**overrides)
    result = run_scenario(scenario)
    if out is not None:
        export_trajectory(result, Path(out) / f"seed_{seed}", fmt_name)
    # Trajectories are large; ship back only what the summary needs.
    result.series = []
    return seed, result


def _run_many(seeds, args, jobs=1) -> int:
    overrides = _settings_overrides(args)
    failed = 0
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_seed, s, overrides, args.out, args.format) for s in seeds]
            results = [f.result() for f in futures]
    else:
        results = (_run_seed(s, overrides, args.out, args.format) for s in seeds)
    for seed, result in results:
        _summary(f"seed {seed}", result)
        failed += bool(result.violations)
    _err(f"{len(seeds)} scenario(s), {failed} with violated claims")
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_check(args) -> int:
    if args.trials < 1:
        _err("error: --trials must be >= 1")
        return EXIT_USAGE
    return _run_many(list(range(args.seed, args.seed + args.trials)), args, args.jobs)


def _parse_range(text):
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected A..B, got {text!r}")
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise argparse.ArgumentTypeError("empty seed range")
    return list(range(lo, hi + 1))


def cmd_sweep(args) -> int:
    return _run_many(args.seeds, args, max(1, args.jobs))


def cmd_generate(args) -> int:
    scenario = generate_scenario(seed=args.seed)
    overrides = _settings_overrides(args)
    if overrides:
        scenario = scenario.with_settings(**overrides)
    save_scenario(scenario, args.path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dt", type=float, default=None, help="integration step")
    common.add_argument("--t-end", type=float, default=None, help="integration horizon")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="trajectory file format")

    parser = argparse.ArgumentParser(prog="multisir", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run one scenario file and export it")
    p.add_argument("scenario")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", parents=[common], help="re-check a stored run directory")
    p.add_argument("dir")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", parents=[common], help="random scenarios, all claims checked")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None, help="write per-seed artifacts here")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sweep", parents=[common], help="parallel batch over a seed range")
    p.add_argument("--seeds", type=_parse_range, required=True, help="inclusive range A..B")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("generate", parents=[common], help="write a random scenario file")
    p.add_argument("path")
    p.add_argument("--seed", type=int, default=1)
    p.set_defaults(func=cmd_generate)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.dt is not None and args.dt <= 0 or args.t_end is not None and args.t_end <= 0:
        _err("error: --dt and --t-end must be positive")
        return EXIT_USAGE
    try:
        return args.func(args)
    except AssumptionError as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
