"""``musclesim`` command-line entry point.

Each subcommand loads a scenario (``--config`` or the bundled default),
applies ``--seed``/``--rate``/``--fatigue-scale`` overrides, runs it and
writes one CSV per table plus ``summary.json`` into ``--out``.
"""
import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .config import load_scenario
from .csvio import write_csv
from .errors import MuscleSimError
from .scenarios import run, run_sweep

log = logging.getLogger("musclesim")

COMMANDS = {
    "curves": (("curves",), "curves.yaml",
               "sample the Hill force curves and activation time constants"),
    "bounds": (("activation_bounds",), "activation_bounds.yaml",
               "tabulate one-step activation bounds over a grid of activations"),
    "fatigue": (("fatigue_profile",), "fatigue_demo.yaml",
                "integrate the fatigue model under a target-load profile"),
    "rig": (("rig_hold", "rig_schedule"), "rig_hold.yaml",
            "simulate the forearm rig (hold/rest windows or a command schedule)"),
    "sweep": (("fatigue_profile", "rig_hold", "rig_schedule"), "sweep.yaml",
              "run a scenario once per fatigue scale and compare fatigue growth rates"),
}


def default_config(name):
    return resources.files("musclesim") / "data" / name


def build_parser():
    ap = argparse.ArgumentParser(prog="musclesim", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, _, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", type=Path, help="scenario YAML (default: bundled example)")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--rate", type=float, help="override the simulation rate [Hz]")
        p.add_argument("--fatigue-scale", type=float,
                       help="override the fatigue rate multiplier")
        if name == "sweep":
            p.add_argument("--workers", type=int, help="worker processes (default: auto)")
    return ap


def _write(out: Path, tables, suffix=""):
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, table in tables.items():
        path = out / f"{name}{suffix}.csv"
        write_csv(path, table)
        files.append(path.name)
        log.info("wrote %s", path)
    return files


def _execute(args):
    kinds, default, _ = COMMANDS[args.command]
    if args.config is not None:
        sc = load_scenario(args.config)
    else:
        with resources.as_file(default_config(default)) as path:
            sc = load_scenario(path)
    if sc.kind not in kinds:
        raise MuscleSimError(
            f"'{args.command}' runs kinds {list(kinds)}, but the scenario is {sc.kind!r}")
    if args.command == "sweep" and args.fatigue_scale is not None:
        raise MuscleSimError("sweep takes its fatigue scales from the scenario's sweep section")
    sc = sc.with_overrides(args.seed, args.rate, args.fatigue_scale)
    if args.command == "sweep":
        results, summary = run_sweep(sc, workers=args.workers)
        runs = []
        for scale, res in results:
            suffix = f"_scale{scale:g}"
            runs.append({"files": _write(args.out, res.tables, suffix),
                         **res.summary})
        summary["runs"] = runs
    else:
        res = run(sc)
        summary = {"files": _write(args.out, res.tables), **res.summary}
    path = args.out / "summary.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s", path)
    return summary


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        _execute(args)
    except (MuscleSimError, OSError) as exc:
        print(f"musclesim: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
