"""Command-line entry point: ``pamkit {simulate,fit,recover,bms,scenarios}``."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bms import bms_gibbs
from .dataset import DEFAULT_RT_CUTOFF
from .exceptions import PamError
from .hgf import HgfParams, hgf_filter
from .inference import CONFIGURATIONS, FitConfig, fit, resolve_config
from .io import (
    load_scenarios,
    read_dataset,
    read_json,
    read_lme_table,
    write_dataset,
    write_json,
    write_scenarios,
    write_table,
)
from .recovery import GRIDS, run_recovery, scenario_grid, sequence_seed, subject_seed
from .simulation import generate_input_sequence, simulate_dataset

EXIT_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("UsageError", message)


def _fail(kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    sys.exit(EXIT_ERROR)


def _config_from_file(path, config_id, seed):
    doc = {} if path is None else read_json(path)
    doc = {k: v for k, v in doc.items() if k != "schema_version"}
    rt_cutoff = float(doc.pop("rt_cutoff", DEFAULT_RT_CUTOFF))
    doc["config_id"] = config_id
    doc.setdefault("seed", seed)
    return FitConfig.from_dict(doc), rt_cutoff


def cmd_simulate(args):
    scenarios, _ = load_scenarios(args.scenario)
    if len(scenarios) > 1 and args.index is None:
        raise PamError("scenario file holds several scenarios; pick one with --index")
    scenario = scenarios[args.index or 0]
    if resolve_config(args.model)[0] != scenario.model:
        raise PamError(f"--model {args.model} does not match scenario model {scenario.model}")
    out = Path(args.out)
    u = generate_input_sequence(sequence_seed(args.seed))
    files = []
    for subj in range(args.subjects):
        rng = np.random.default_rng(subject_seed(args.seed, 0, subj))
        data = simulate_dataset(scenario.model, scenario.params, u, scenario.omega2, rng)
        name = f"subject_{subj:03d}.csv"
        write_dataset(out / name, data)
        files.append(name)
    write_json(
        out / "truth.json",
        {
            "command": "simulate",
            "config": {"model": args.model, "subjects": args.subjects, "seed": args.seed},
            "scenario": scenario.to_dict(),
            "truth": dict(scenario.params, omega2=scenario.omega2),
            "files": files,
        },
    )


def cmd_fit(args):
    config, rt_cutoff = _config_from_file(args.config, args.model, args.seed)
    data, report = read_dataset(args.data, rt_cutoff=rt_cutoff)
    result = fit(data, config)
    doc = {
        "command": "fit",
        "config": dict(config.to_dict(), rt_cutoff=rt_cutoff, data=str(args.data)),
        "data": report,
        "result": result.to_dict(),
    }
    if args.trajectory:
        traj = hgf_filter(data.u, HgfParams(result.native["omega2"], config.mu2_init, config.sigma2_init))
        doc["trajectory"] = {c: getattr(traj, c) for c in traj.columns}
    write_json(args.out, doc)


def cmd_recover(args):
    scenarios, fit_cfg = load_scenarios(args.scenarios)
    report = run_recovery(scenarios, args.subjects, args.seed, fit_cfg, jobs=args.jobs)
    out = Path(args.out)
    write_table(out / "summary.csv", report.summary)
    write_table(
        out / "raw.csv",
        report.raw,
        ["scenario", "subject", "config", "param", "true", "estimate", "free", "converged", "lme"],
    )
    write_table(out / "failures.csv", report.failures, ["scenario", "subject", "config", "error"])
    write_json(
        out / "manifest.json",
        {
            "command": "recover",
            "config": {"subjects": args.subjects, "seed": args.seed, "fit": fit_cfg},
            "scenarios": [s.to_dict() for s in scenarios],
            "files": ["summary.csv", "raw.csv", "failures.csv"],
        },
    )


def cmd_bms(args):
    labels, subjects, lme = read_lme_table(args.lme)
    res = bms_gibbs(lme, n_samples=args.samples, burn_in=args.burn_in, seed=args.seed, labels=labels)
    doc = {
        "command": "bms",
        "config": {"lme": str(args.lme), "samples": args.samples, "burn_in": args.burn_in, "seed": args.seed},
        "subjects": subjects,
        "result": res.to_dict(),
    }
    write_json(args.out, doc)


def cmd_scenarios(args):
    scenarios = [s for g in args.grid for s in scenario_grid(g)]
    write_scenarios(args.out, scenarios)


def build_parser():
    p = _Parser(prog="pamkit", description="Predictive evidence accumulation models")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="simulate subjects from a scenario")
    s.add_argument("--model", required=True, choices=sorted(set(CONFIGURATIONS) | {"ddm", "lnr", "rdm"}))
    s.add_argument("--scenario", required=True)
    s.add_argument("--index", type=int, default=None, help="scenario index inside a multi-scenario file")
    s.add_argument("--subjects", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="MAP fit of one dataset")
    f.add_argument("--model", required=True, choices=sorted(set(CONFIGURATIONS) | {"ddm", "lnr", "rdm"}))
    f.add_argument("--data", required=True)
    f.add_argument("--config", default=None, help="JSON fit configuration")
    f.add_argument("--out", required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--trajectory", action="store_true", help="include the belief trajectory")
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("recover", help="parameter recovery study")
    r.add_argument("--scenarios", required=True)
    r.add_argument("--subjects", type=int, default=30)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_recover)

    b = sub.add_parser("bms", help="random-effects Bayesian model selection")
    b.add_argument("--lme", required=True)
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--samples", type=int, default=50_000)
    b.add_argument("--burn-in", type=int, default=10_000)
    b.set_defaults(func=cmd_bms)

    c = sub.add_parser("scenarios", help="write standard recovery grids as a scenario file")
    c.add_argument("--grid", nargs="+", required=True, choices=GRIDS)
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_scenarios)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except PamError as exc:
        _fail(type(exc).__name__, str(exc))
    except (OSError, ValueError, KeyError) as exc:
        _fail(type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
