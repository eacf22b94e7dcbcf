"""Command-line surface.

Subcommands: ``run`` (one config file), ``preset`` (a named bundled config),
``sweep`` (a glob of configs, fanned out concurrently), ``check`` (the full
verification suite).  Exit codes: 0 pass, 1 property failure, 2
configuration error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import glob
import os
import sys
from importlib import resources

from .config import parse_config
from .errors import KbstripError
from .io import ensure_dir, write_report
from .runner import EXIT_CONFIG_ERROR, EXIT_PROPERTY_FAILURE, run_experiment


def _preset_dir():
    return resources.files("kbstrip") / "presets"


def _preset_names() -> list:
    return sorted(
        p.name[: -len(".cfg")] for p in _preset_dir().iterdir()
        if p.name.endswith(".cfg")
    )


def _load_spec(text: str, source: str):
    try:
        return parse_config(text)
    except KbstripError as err:
        print(f"{source}: {err}", file=sys.stderr)
        return None


def _cmd_run(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        print(f"cannot read {args.config}: {err}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    spec = _load_spec(text, args.config)
    if spec is None:
        return EXIT_CONFIG_ERROR
    return run_experiment(spec, out_dir=args.out, quiet=args.quiet)


def _cmd_preset(args) -> int:
    path = _preset_dir() / f"{args.name}.cfg"
    if not path.is_file():
        print(
            f"unknown preset {args.name!r}; available: "
            + ", ".join(_preset_names()),
            file=sys.stderr,
        )
        return EXIT_CONFIG_ERROR
    spec = _load_spec(path.read_text(encoding="utf-8"), f"preset {args.name}")
    if spec is None:
        return EXIT_CONFIG_ERROR
    return run_experiment(spec, out_dir=args.out, quiet=args.quiet)


def _cmd_sweep(args) -> int:
    paths = sorted(glob.glob(args.config_glob))
    if not paths:
        print(f"no configs match {args.config_glob!r}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    jobs = []
    for path in paths:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as err:
            print(f"cannot read {path}: {err}", file=sys.stderr)
            return EXIT_CONFIG_ERROR
        spec = _load_spec(text, path)
        if spec is None:
            return EXIT_CONFIG_ERROR
        stem = os.path.splitext(os.path.basename(path))[0]
        out = os.path.join(args.out if args.out else "out", stem)
        jobs.append((spec, out))
    with concurrent.futures.ThreadPoolExecutor(
        max_workers=min(len(jobs), os.cpu_count() or 1)
    ) as pool:
        statuses = list(
            pool.map(
                lambda job: run_experiment(job[0], out_dir=job[1],
                                           quiet=args.quiet),
                jobs,
            )
        )
    return max(statuses)


def _cmd_check(args) -> int:
    from .acceptance import run_all

    passed, results = run_all(seed=args.seed, quiet=args.quiet)
    out = ensure_dir(args.out if args.out else "out")
    write_report(
        {"passed": passed, "seed": args.seed, "criteria": results},
        os.path.join(out, "acceptance_report.json"),
    )
    if not args.quiet:
        print(f"verification suite: {'pass' if passed else 'FAIL'}")
    return 0 if passed else EXIT_PROPERTY_FAILURE


def _add_common(sub):
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for randomized property suites")
    sub.add_argument("--quiet", action="store_true", help="suppress progress")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbstrip",
        description=(
            "Pseudo-spectral simulation and verification toolkit for a "
            "fifth-order dissipative-dispersive wave equation on a channel "
            "strip.  Configs are line-oriented 'key = value' files; unknown "
            "keys are rejected and every diagnostic carries its line number."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_run = subs.add_parser("run", help="run one experiment config")
    p_run.add_argument("config", help="path to a key = value config file")
    _add_common(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_preset = subs.add_parser("preset", help="run a bundled named config")
    p_preset.add_argument("name", help="preset name (see error text for list)")
    _add_common(p_preset)
    p_preset.set_defaults(fn=_cmd_preset)

    p_sweep = subs.add_parser("sweep", help="run every config matching a glob")
    p_sweep.add_argument("config_glob", help="glob of config files")
    _add_common(p_sweep)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_check = subs.add_parser("check", help="run the full verification suite")
    _add_common(p_check)
    p_check.set_defaults(fn=_cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except KbstripError as err:
        print(str(err), file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
