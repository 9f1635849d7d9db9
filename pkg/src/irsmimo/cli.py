"""Command-line entry point: ``irsmimo {simulate,figure,power,optimal-k}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .figures import FIGURES, make_figure
from .io import emit_report, load_config, parse_overrides
from .montecarlo import run_monte_carlo
from .scenario import ConfigError, ScenarioConfig
from .transceiver import gbar_i, min_power_epa, optimal_subsurface_count
from .units import linear_to_db, watts_to_dbm

log = logging.getLogger("irsmimo")


def _simulate(args) -> int:
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.trials is not None:
        changes["trials"] = args.trials
    config = config.replace(**changes).validate()
    log.info("running %d trials (seed %d, %d workers)", config.trials, config.seed, args.workers)
    report = run_monte_carlo(config, workers=args.workers)
    csv_path, json_path = emit_report(report, args.out)
    agg = report.summary()["aggregates"]
    print(f"rate_exact mean {agg['rate_exact']['mean']:.4f} bits/s/Hz "
          f"(stderr {agg['rate_exact']['stderr']:.4f}); wrote {csv_path} and {json_path}")
    return 0


def _figure(args) -> int:
    overrides = parse_overrides(args.set)
    data = make_figure(args.name, overrides, workers=args.workers)
    path = data.write_csv(Path(args.out) / f"{args.name}.csv")
    print(f"wrote {len(data.rows)} rows to {path}")
    return 0


def _power(args) -> int:
    base = ScenarioConfig(n_t=args.nt, n_r=args.nr, d_1=args.d1, noise_dbm=args.noise_dbm)
    ti, ir = base.pathloss_ti, base.pathloss_ir
    gbar = gbar_i(ti.a, ti.b, ti.d, ti.sigma, ir.a, ir.b, ir.d, ir.sigma, args.mode)
    power = min_power_epa(args.rate, args.K, args.N, args.nt, args.nr, base.noise_watts, gbar)
    result = {"rate": args.rate, "K": args.K, "N": args.N, "power_w": power,
              "power_dbm": float(watts_to_dbm(power)), "gbar_db": float(linear_to_db(gbar)),
              "mode": args.mode}
    print(json.dumps(result, indent=2))
    return 0


def _optimal_k(args) -> int:
    k_real, k_int = optimal_subsurface_count(args.rate, args.M)
    result = {"rate": args.rate, "k_real": k_real, "k": k_int}
    if args.M is not None:
        result["M"] = args.M
        result["n_per_subsurface"] = args.M / k_int
    print(json.dumps(result, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irsmimo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte Carlo run of one scenario config")
    sim.add_argument("--config", required=True, help="YAML scenario file")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--trials", type=int)
    sim.add_argument("--out", default="results")
    sim.add_argument("--workers", type=int, default=1)
    sim.set_defaults(func=_simulate)

    fig = sub.add_parser("figure", help="generate the data behind one figure")
    fig.add_argument("name", choices=sorted(FIGURES))
    fig.add_argument("--out", default="results")
    fig.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a scenario field (repeatable)")
    fig.add_argument("--workers", type=int, default=1)
    fig.set_defaults(func=_figure)

    pw = sub.add_parser("power", help="average EPA power needed for a target rate")
    pw.add_argument("--rate", type=float, required=True, help="target rate, bits/s/Hz")
    pw.add_argument("--K", type=int, required=True)
    pw.add_argument("--N", type=int, required=True)
    pw.add_argument("--nt", type=int, default=100)
    pw.add_argument("--nr", type=int, default=100)
    pw.add_argument("--d1", type=float, default=25.0, help="tx-to-IRS horizontal offset, m")
    pw.add_argument("--noise-dbm", type=float, default=-85.0)
    pw.add_argument("--mode", choices=("lognormal-exact", "exponential"), default="lognormal-exact")
    pw.set_defaults(func=_power)

    ok = sub.add_parser("optimal-k", help="optimal number of subsurfaces for a target rate")
    ok.add_argument("--rate", type=float, required=True)
    ok.add_argument("--M", type=int, help="total number of reflecting elements")
    ok.set_defaults(func=_optimal_k)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"irsmimo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
