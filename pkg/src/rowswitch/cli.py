"""Command-line entry point.

Machine-readable results go to stdout as JSON; log messages go to stderr, at
the level named by the ROWSWITCH_LOG environment variable (default WARNING).
Exit codes: 0 done (failed trials are results, not errors), 1 runtime failure,
2 bad arguments or configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields, replace
from pathlib import Path

from .batch import run_batch, trial_configs
from .field import ConfigurationError, FieldConfig, FieldSpec, generate_field, spacing_stats
from .fsm import TrialConfig, run_trial
from .profiles import PROFILES, NoiseProfile, get_profile
from .report import batch_report, report_from_dir

log = logging.getLogger("rowswitch")


class UsageError(Exception):
    """Bad arguments or configuration (exit code 2)."""


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


def _read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}: not valid JSON ({exc})") from exc


def _profile(args, config: dict) -> NoiseProfile:
    """--noise none, else --profile, else the config file's profile, else paper-calibrated."""
    if args.noise == "none":
        return PROFILES["none"]
    try:
        return get_profile(args.profile or config.get("profile", "paper-calibrated"))
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc


def _field(args, config: dict) -> FieldSpec:
    path = args.field or config.get("field")
    if path:
        if not Path(path).is_file():
            raise UsageError(f"field file not found: {path}")
        try:
            return FieldSpec.load(path)
        except (ValueError, KeyError) as exc:
            raise UsageError(f"{path}: invalid field ({exc})") from exc
    return generate_field(FieldConfig(), args.field_seed)


# -- subcommands ------------------------------------------------------------

def cmd_generate_field(args) -> int:
    base = _read_json(args.config) if args.config else {}
    known = {f.name for f in fields(FieldConfig)}
    unknown = set(base) - known
    if unknown:
        raise UsageError(f"unknown field config keys: {sorted(unknown)}")
    cfg = FieldConfig(**base)
    if args.rows is not None:
        cfg = replace(cfg, row_count=args.rows)
    try:
        spec = generate_field(cfg, args.seed)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from exc
    spec.save(args.out)
    log.info("wrote %s", args.out)
    _emit({"out": str(args.out), "seed": args.seed, "spacing": spacing_stats(spec)})
    return 0


def cmd_run_trial(args) -> int:
    config = _read_json(args.config) if args.config else {}
    field = _field(args, config)
    profile = _profile(args, config)
    n = len(field.rows)
    row = args.row if args.row is not None else config.get("row", n // 2)
    turn = args.turn or config.get("turn", "right")
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    if turn not in ("left", "right"):
        raise UsageError("--turn must be left or right")
    tc = TrialConfig(int(row), turn, seed=int(seed), inject_heading_at_a=args.inject_heading)
    if not (0 <= tc.row < n and 0 <= tc.target_row < n):
        raise UsageError(f"row {tc.row} has no neighbour on the {turn} in a {n}-row field")
    res = run_trial(field, tc, profile)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectory.csv").write_text(res.trajectory_csv())
    (out / "trial.json").write_text(json.dumps(res.to_dict(), indent=1, sort_keys=True) + "\n")
    log.info("trial row %d %s -> %s", tc.row, turn, res.outcome)
    _emit({"outcome": res.outcome, "final_state": res.final_state, "d_r": res.d_r, "out": str(out)})
    return 0


def cmd_run_batch(args) -> int:
    config = _read_json(args.config) if args.config else {}
    field = _field(args, config)
    profile = _profile(args, config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    count = args.trials if args.trials is not None else int(config.get("count", 18))
    if count < 1:
        raise UsageError("--trials must be >= 1")
    out = Path(args.out or config.get("out", "run"))
    configs = trial_configs(field, count, seed, profile)
    if "trials" in config:
        listed = config["trials"]
        seeds = [int(t[2]) for t in listed if len(t) > 2]
        if len(seeds) != len(set(seeds)) and not config.get("allow_repeated_seeds", False):
            raise UsageError("trial seeds must be unique (set allow_repeated_seeds to repeat on purpose)")
        base = trial_configs(field, len(listed), seed, profile)
        configs = [replace(b, row=int(t[0]), turn=str(t[1]), seed=int(t[2]) if len(t) > 2 else b.seed)
                   for b, t in zip(base, listed)]
    n = len(field.rows)
    for c in configs:
        if c.turn not in ("left", "right") or not (0 <= c.row < n and 0 <= c.target_row < n):
            raise UsageError(f"invalid trial ({c.row}, {c.turn}) for a {n}-row field")
    results = run_batch(field, configs, profile, jobs=args.jobs)
    rep = batch_report(results, field, out, coefficient=args.coefficient, profile_name=profile.name)
    _emit({
        "out": str(out),
        "trials": rep.trials,
        "success_rate": rep.success_rate,
        "outcomes": [r.outcome for r in results],
        "medians": {s.transition: s.median for s in rep.table.rows} if rep.table else {},
        "headland": {"W_H_min": rep.headland.W_H_min, "coefficient": rep.coefficient_label},
    })
    return 0


def cmd_detect(args) -> int:
    from .images import load_depth, load_intrinsics, load_mask, overlay
    from .reentry import locate_reentry
    from .sensor import detect_eor

    for p in (args.mask, args.depth, args.intrinsics):
        if not Path(p).is_file():
            raise UsageError(f"no such file: {p}")
    mask, depth = load_mask(args.mask), load_depth(args.depth)
    cam = load_intrinsics(args.intrinsics)
    if mask.shape != depth.shape:
        raise UsageError(f"mask {mask.shape} and depth {depth.shape} dimensions differ")
    if mask.shape != (cam.height, cam.width):
        raise UsageError(f"image size {mask.shape[::-1]} does not match intrinsics {(cam.width, cam.height)}")
    eor = detect_eor(mask)
    res = locate_reentry(mask, depth, eor, cam, args.turn)
    out = {**res.to_dict(), "eor_row": eor.image_row if eor.valid else None}
    if args.out:
        overlay(mask, res, eor).save(args.out)
        out["overlay"] = str(args.out)
    _emit(out)
    return 0


def cmd_report(args) -> int:
    run = Path(args.run_dir)
    if not (run / "trials.csv").is_file():
        raise UsageError(f"{run} has no trials.csv")
    field = _field(args, {})
    rep = report_from_dir(run, field, args.out, coefficient=args.coefficient)
    _emit({"out": str(rep.out_dir), "success_rate": rep.success_rate,
           "medians": {s.transition: s.median for s in rep.table.rows} if rep.table else {},
           "headland": {"W_H_min": rep.headland.W_H_min, "coefficient": rep.coefficient_label}})
    return 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rowswitch", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def field_args(sp):
        sp.add_argument("--field", help="field JSON written by generate-field (default: generated from --field-seed)")
        sp.add_argument("--field-seed", type=int, default=0, help="seed of the default field when --field is absent")

    def noise_args(sp):
        sp.add_argument("--profile", help=f"noise profile: one of {sorted(PROFILES)} or a JSON file "
                                          "(default paper-calibrated)")
        sp.add_argument("--noise", choices=["none"], help="'none' switches every error source off")

    g = sub.add_parser("generate-field", help="write a synthetic field")
    g.add_argument("--config", help="JSON with FieldConfig overrides")
    g.add_argument("--seed", type=int, default=0, help="field seed")
    g.add_argument("--rows", type=int, help="number of crop rows (>= 2)")
    g.add_argument("--out", default="field.json", help="output file")
    g.set_defaults(func=cmd_generate_field)

    t = sub.add_parser("run-trial", help="run one row switch")
    t.add_argument("--config", help="JSON with row, turn, seed and field")
    field_args(t)
    noise_args(t)
    t.add_argument("--row", type=int, help="starting row index")
    t.add_argument("--turn", choices=["left", "right"], help="switch direction")
    t.add_argument("--seed", type=int, help="trial seed")
    t.add_argument("--inject-heading", type=float, default=0.0, help="heading error added at state A (deg)")
    t.add_argument("--out", default="trial", help="output directory")
    t.set_defaults(func=cmd_run_trial)

    b = sub.add_parser("run-batch", help="run a batch of row switches and write the report")
    b.add_argument("--config", help="JSON run config: field, profile, seed, count, trials [[row, turn, seed], ...], out")
    field_args(b)
    noise_args(b)
    b.add_argument("--seed", type=int, help="batch seed (default 0)")
    b.add_argument("--trials", type=int, help="number of trials (default 18)")
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    b.add_argument("--coefficient", default="paper-equation",
                   help="headland coefficient: paper-equation, paper-result or a number")
    b.add_argument("--out", help="output directory (default run)")
    b.set_defaults(func=cmd_run_batch)

    d = sub.add_parser("detect", help="run the re-entry detector on a mask and depth image")
    d.add_argument("--mask", required=True, help="skeleton mask PNG")
    d.add_argument("--depth", required=True, help="16-bit depth PNG in millimetres")
    d.add_argument("--intrinsics", required=True, help="camera JSON sidecar")
    d.add_argument("--turn", required=True, choices=["left", "right"], help="switch direction")
    d.add_argument("--out", help="overlay PNG to write")
    d.set_defaults(func=cmd_detect)

    r = sub.add_parser("report", help="rebuild a report from a run directory")
    r.add_argument("run_dir", help="directory written by run-batch")
    field_args(r)
    r.add_argument("--coefficient", default="paper-equation",
                   help="headland coefficient: paper-equation, paper-result or a number")
    r.add_argument("--out", help="output directory (default: the run directory)")
    r.set_defaults(func=cmd_report)
    return p


def _coefficient(value: str):
    try:
        return float(value)
    except ValueError:
        return value


def main(argv=None) -> int:
    level = os.environ.get("ROWSWITCH_LOG", "WARNING").upper()
    logging.basicConfig(level=level if isinstance(logging.getLevelName(level), int) else "WARNING", stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if hasattr(args, "coefficient"):
        args.coefficient = _coefficient(args.coefficient)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rowswitch: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"rowswitch: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
