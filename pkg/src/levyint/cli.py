"""Command line harness.

Three subcommands, all driven by a JSON config:

* ``simulate``  sample one driver path and dump it (or echo a replay).
* ``integrate`` run the scenario integrand along one path and dump the
  integral path, optionally with its per-mode series terms.
* ``check``     run identity checks and write a report table; with
  ``--negative-control`` the suite must catch the named injected fault.

Exit codes: 0 on success (checks passed, or fault detected in control
mode), 1 when a check run completes but fails its criterion, 2 on
configuration or usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from .checks import (CHECKS, default_suite, fault_detected,
                     negative_control_suite, reports_to_csv, reports_to_json,
                     run_suite, suite_passed)
from .config import load_config
from .errors import ConfigInvalid, ConfigNotFound, LevyintError, UnknownCheck
from .integrators import ito_general, ito_h, ito_seq, series_terms
from .processes import KIND_NAMES, assemble_levy, replay_path
from .scenarios import (FAULTS, ScenarioConfig, build_integrand,
                        build_simple_integrand, make_sampler,
                        resolve_covariance, restrict_integrand)


def _read_path_csv(path: str):
    """Parse a path dump written by ``simulate`` back into a replay."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError:
        raise ConfigNotFound(f"replay file not found: {path}")
    if len(rows) < 3 or rows[0][:2] != ["time", "kind"]:
        raise ConfigInvalid(f"replay file {path} is not a path dump")
    times = [float(r[0]) for r in rows[1:]]
    kinds = [r[1] for r in rows[1:]]
    cumulative = np.array([[float(x) for x in r[2:]] for r in rows[1:]]).T
    return times, np.diff(cumulative, axis=1), kinds


def _materialize_path(scenario: ScenarioConfig, seed: int, path_index: int):
    """Sample the scenario drivers, or rebuild them from a replay."""
    drivers = scenario.drivers
    if isinstance(drivers, dict):
        source = drivers["replay"]
        if isinstance(source, str):
            times, increments, kinds = _read_path_csv(source)
        elif isinstance(source, dict):
            times = source.get("times")
            increments = source.get("increments")
            if times is None or increments is None:
                raise ConfigInvalid(
                    "an inline replay needs times and increments")
            kinds = source.get("kinds")
        else:
            raise ConfigInvalid("drivers.replay must be a file path or an "
                                "inline object")
        path = replay_path(times, increments, kinds)
        if path.n_components != scenario.n_modes:
            raise ConfigInvalid(
                f"replay carries {path.n_components} components, space.J "
                f"is {scenario.n_modes}")
        if path.grid.horizon != scenario.horizon:
            raise ConfigInvalid(
                f"replay horizon {path.grid.horizon} differs from space.T "
                f"{scenario.horizon}")
        return path
    extra = ()
    if scenario.integrand.family == "simple" \
            and scenario.integrand.breakpoints is not None:
        extra = tuple(scenario.integrand.breakpoints[1:-1])
    return make_sampler(scenario, extra_times=extra).sample(seed, path_index)


def _write_text(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _table(grid, columns) -> str:
    """CSV table with time and kind columns, floats via repr."""
    buf = io.StringIO()
    names = ["time", "kind"]
    for name, _ in columns:
        names.append(name)
    buf.write(",".join(names) + "\n")
    for k in range(grid.n_nodes):
        row = [repr(float(grid.times[k])), KIND_NAMES[grid.kind[k]]]
        for _, values in columns:
            row.append(repr(float(values[k])))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _grid_json(grid) -> dict:
    return {"times": [float(t) for t in grid.times],
            "kinds": [KIND_NAMES[k] for k in grid.kind]}


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    path = _materialize_path(cfg.scenario, seed, args.path_index)
    cum = path.cumulative
    if args.format == "json":
        out = _grid_json(path.grid)
        out["components"] = [[float(x) for x in comp] for comp in cum]
        _write_text(_json_dump(out), args.out)
    else:
        columns = [(f"comp{c + 1}", cum[c]) for c in range(path.n_components)]
        _write_text(_table(path.grid, columns), args.out)
    return 0


def _json_dump(obj) -> str:
    import json
    return json.dumps(obj, indent=2) + "\n"


def _integrate_scenario(scenario: ScenarioConfig, path, want_series: bool):
    """Run the configured integrand along a path.

    Returns (integral values (n_nodes, dim_h), series list or None).
    """
    side = scenario.sample_side
    if scenario.integrand.family == "simple":
        if scenario.integrand.carrier != "hvector":
            raise ConfigInvalid("simple integrands integrate as hvector "
                                "against component 0")
        integrand = build_simple_integrand(scenario)
        return ito_h(integrand, path, 0, sample_side=side).values, None
    carrier = scenario.integrand.carrier
    integrand = build_integrand(scenario, n_inputs=path.n_components)
    if carrier == "hvector":
        if want_series:
            raise ConfigInvalid("series dump needs an operator integrand")
        return ito_h(integrand, path, 0, sample_side=side).values, None
    if carrier == "seqh":
        if want_series:
            raise ConfigInvalid("series dump needs an operator integrand")
        return ito_seq(integrand, path, sample_side=side).values, None
    cov = resolve_covariance(scenario)
    levy = assemble_levy(cov, path)
    restricted = restrict_integrand(integrand, cov)
    z = ito_general(restricted, levy, sample_side=side)
    series = None
    if want_series:
        series = [t.values for t in series_terms(restricted, levy,
                                                 sample_side=side)]
    return z.values, series


def _cmd_integrate(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    scenario = cfg.scenario
    path = _materialize_path(scenario, seed, args.path_index)
    values, series = _integrate_scenario(scenario, path, args.dump_series)
    if args.format == "json":
        out = _grid_json(path.grid)
        out["integral"] = [[float(x) for x in row] for row in values]
        if series is not None:
            out["series"] = [[[float(x) for x in row] for row in term]
                             for term in series]
        _write_text(_json_dump(out), args.out)
        return 0
    columns = [(f"coord{d + 1}", values[:, d])
               for d in range(values.shape[1])]
    if series is not None:
        for j, term in enumerate(series):
            columns.extend((f"mode{j + 1}_coord{d + 1}", term[:, d])
                           for d in range(term.shape[1]))
    _write_text(_table(path.grid, columns), args.out)
    return 0


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    n_paths = cfg.n_paths if args.paths is None else args.paths
    desk = cfg.scenario
    if args.negative_control is not None:
        specs = negative_control_suite(args.negative_control, n_paths,
                                       cfg.n_exact, seed, desk)
    else:
        specs = default_suite(n_paths, cfg.n_exact, seed, desk)
        if cfg.checks is not None:
            specs = [s for s in specs if s.name in cfg.checks]
    if args.check is not None:
        if args.check not in CHECKS:
            raise UnknownCheck(f"unknown check {args.check!r}; valid names: "
                               f"{', '.join(CHECKS)}")
        specs = [s for s in specs if s.name == args.check]
    if not specs:
        raise ConfigInvalid("no checks selected")
    reports = run_suite(specs, args.parallelism)
    if args.format == "csv":
        text = reports_to_csv(reports, include_timings=args.timings)
    else:
        text = reports_to_json(reports, include_timings=args.timings)
    _write_text(text, args.out)
    if args.negative_control is not None:
        return 0 if fault_detected(reports) else 1
    return 0 if suite_passed(reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyint",
        description="Series construction of stochastic integrals on finite "
                    "truncations, with identity checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="sample one driver path")
    integ = sub.add_parser("integrate",
                           help="integrate the configured integrand along "
                                "one path")
    chk = sub.add_parser("check", help="run identity checks")

    for p in (sim, integ, chk):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None,
                       help="output file (default stdout)")
    for p in (sim, integ):
        p.add_argument("--path-index", type=int, default=0,
                       help="which path of the seeded family")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    integ.add_argument("--dump-series", action="store_true",
                       help="also dump per-mode series terms")

    chk.add_argument("--check", default=None,
                     help="run a single named check")
    chk.add_argument("--paths", type=int, default=None,
                     help="override the config path count")
    chk.add_argument("--format", choices=("json", "csv"), default="json")
    chk.add_argument("--negative-control", choices=FAULTS, default=None,
                     help="inject the named fault; succeed only if detected")
    chk.add_argument("--parallelism", type=int, default=1,
                     help="worker processes (never changes the output)")
    chk.add_argument("--timings", action="store_true",
                     help="serialize real wall times instead of 0.0")
    return parser


_COMMANDS = {"simulate": _cmd_simulate, "integrate": _cmd_integrate,
             "check": _cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except LevyintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
