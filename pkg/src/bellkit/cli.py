"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 model parse or validation failure,
3 LP branch cap exceeded. JSON output has sorted keys and floats rounded to
12 significant digits so identical invocations give identical bytes.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import bounds, info, lp, measures, transforms, zoo
from .errors import BellkitError, BranchCapError, ParameterRangeError
from .model import (DEFAULT_TOL, dump_model, load_model, model_to_dict, observed_correlations,
                    validate_model)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_CAP = 0, 1, 2, 3

DEFAULTS = {"tol": DEFAULT_TOL, "branch_cap": 2 ** 20, "seed": 0, "samples": 10 ** 6, "jobs": 1}

FAMILIES = ("chsh", "chsh-nosig", "outcome", "i3322", "imm22")
ZOO_NAMES = ("toner-bacon", "hall", "pawlowski", "brans", "mermin", "hardy", "conway-kochen")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _clean(obj):
    """Make a structure JSON-ready with floats at 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        obj = float(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.12g}")
    return obj


def emit(obj, out=None) -> None:
    text = json.dumps(_clean(obj), sort_keys=True, indent=1) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def load_config(path=None) -> dict:
    """Defaults updated by the BELLKIT_CONFIG file, then by ``path``."""
    cfg = dict(DEFAULTS)
    for p in (os.environ.get("BELLKIT_CONFIG"), path):
        if p:
            try:
                with open(p, "rb") as fh:
                    doc = tomllib.load(fh)
            except (OSError, tomllib.TOMLDecodeError) as exc:
                raise UsageError(f"cannot read config {p}: {exc}") from None
            unknown = set(doc) - set(DEFAULTS)
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            cfg.update(doc)
    return cfg


def _setting(args, cfg, name):
    value = getattr(args, name, None)
    return cfg[name] if value is None else value


def parse_grid(text: str) -> list:
    """"a,b,c" or "start:stop:count" (inclusive) to a list of floats."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {text!r} must be start:stop:count")
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        if n < 1:
            raise UsageError("grid count must be positive")
        return [float(v) for v in np.linspace(lo, hi, n)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse grid {text!r}") from None


# ---------------------------------------------------------------- commands

def cmd_validate(args, cfg):
    model = load_model(args.model)
    report = validate_model(model, _setting(args, cfg, "tol"))
    emit(report.to_dict(), args.out)
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_measures(args, cfg):
    tol = _setting(args, cfg, "tol")
    model = load_model(args.model)
    emit({"measures": measures.measure_report(model, tol).to_dict(),
          "capacities": info.capacity_report(model, tol).to_dict()}, args.out)
    return EXIT_OK


def cmd_capacities(args, cfg):
    model = load_model(args.model)
    emit(info.capacity_report(model, _setting(args, cfg, "tol")).to_dict(), args.out)
    return EXIT_OK


def _bound_value(family, I, S, M, O, m):
    if family == "chsh":
        return bounds.b_chsh(I, S, M)
    if family == "chsh-nosig":
        return bounds.b_chsh_nosig(I, M)
    if family == "outcome":
        return bounds.b_outcome(O)
    if family == "i3322":
        return bounds.b_3322(I, S)
    res = bounds.b_mm22(m, I, S)
    return {"bound": res.value, "conjectured": res.conjectured}


def cmd_bound(args, cfg):
    if args.invert is not None:
        emit(bounds.min_relaxation(args.invert).to_dict(), args.out)
        return EXIT_OK
    value = _bound_value(args.family, args.I, args.S, args.M, args.O, args.m)
    if isinstance(value, dict):
        emit(value, args.out)
    else:
        emit({"family": args.family, "bound": value, "I": args.I, "S": args.S, "M": args.M,
              "O": args.O}, args.out)
    return EXIT_OK


def cmd_sweep(args, cfg):
    rows = bounds.bound_surface(args.family, parse_grid(args.I), parse_grid(args.S),
                                parse_grid(args.M), parse_grid(args.O), args.V, args.m)
    fields = ["I", "S", "M", "O", "bound"] + (["feasible_for_V"] if args.V is not None else [])
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([row[k] if isinstance(row[k], int) and not isinstance(row[k], bool)
                             else f"{float(row[k]):.12g}" for k in fields])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def _functional(name_or_path):
    if os.path.exists(name_or_path):
        return lp.load_functional(name_or_path)
    try:
        return lp.builtin_functional(name_or_path)
    except KeyError:
        raise UsageError(f"{name_or_path!r} is neither a file nor a bundled functional") from None


def cmd_lp(args, cfg):
    func = _functional(args.functional)
    config = lp.LPConfig(branch_cap=_setting(args, cfg, "branch_cap"),
                         tol=_setting(args, cfg, "tol"), jobs=_setting(args, cfg, "jobs"),
                         allow_partial=args.allow_partial)
    try:
        res = lp.relaxed_bound_lp(func, args.I, args.S, config)
    except BranchCapError as exc:
        sys.stderr.write(f"error: {exc}\nadvice: pass --branch-cap {exc.needed} or --allow-partial "
                         "for a lower bound from the branches that fit\n")
        return EXIT_CAP
    doc = res.to_dict()
    if args.witness_out and res.witness is not None:
        dump_model(res.witness, args.witness_out)
        doc["witness"] = args.witness_out
    emit(doc, args.out)
    return EXIT_OK


def _finite_summary(model, tol):
    return {"measures": measures.measure_report(model, tol).to_dict(),
            "capacities": info.capacity_report(model, tol).to_dict()}


def _zoo_hall(args, cfg):
    rng = zoo.sphere.philox(_setting(args, cfg, "seed"))
    dirs = zoo.uniform_directions(rng, 20)
    devs = []
    for x in dirs:
        e = zoo.sphere.orthonormal_frame(x)[0]
        y = -0.5 * x + math.sqrt(0.75) * e
        devs.append(zoo.hall_verify_singlet(x, y))
    xs_deg = [0.0, 90.0]
    model = zoo.hall_discrete_model([0.0, math.pi / 2], [5 * math.pi / 4, 3 * math.pi / 4])
    doc = {"singlet_max_deviation": max(devs), "pairs": len(devs),
           "chsh_discrete_model": {"chsh": bounds.chsh_value(model), "x_angles_deg": xs_deg,
                                   "y_angles_deg": [225.0, 135.0],
                                   "measures": measures.measure_report(model).to_dict()}}
    if args.capacities:
        doc["capacities"] = zoo.hall_capacities().to_dict()
    return doc, model


def _zoo_toner_bacon(args, cfg):
    seed, samples = _setting(args, cfg, "seed"), _setting(args, cfg, "samples")
    rng = zoo.sphere.philox(seed, 2 ** 40)
    pairs = zoo.uniform_directions(rng, 20).reshape(10, 2, 3)
    runs = []
    for k, (x, y) in enumerate(pairs):
        r = zoo.toner_bacon_run(x, y, zoo.TonerBaconSpec(seed + k, samples))
        runs.append({"x_dot_y": float(x @ y), "max_abs_z": r.max_abs_z,
                     "estimate": r.estimate, "target": r.target,
                     "mean_message_entropy": r.mean_message_entropy})
    model, comm = zoo.toner_bacon_restriction()
    doc = {"samples": samples, "seed": seed, "runs": runs,
           "max_abs_z": max(r["max_abs_z"] for r in runs),
           "mean_message_entropy": float(np.mean([r["mean_message_entropy"] for r in runs])),
           "mean_message_entropy_exact": zoo.mean_message_entropy(),
           "restriction": {"S": measures.signaling(model)[2], "C_sig": info.c_sig(model).value}}
    return doc, model


def cmd_zoo(args, cfg):
    tol = _setting(args, cfg, "tol")
    name = args.name
    if name == "hall":
        doc, model = _zoo_hall(args, cfg)
    elif name == "toner-bacon":
        doc, model = _zoo_toner_bacon(args, cfg)
    else:
        if name == "pawlowski":
            model, comm = zoo.pawlowski_model(math.sqrt(2) - 1 if args.p is None else args.p)
            summary = _finite_summary(model, tol)
            summary["C_commun"] = info.c_commun(comm).to_dict()
            summary["chsh"] = bounds.chsh_value(model)
        elif name == "brans":
            if args.model:
                target = observed_correlations(load_model(args.model))
            else:
                target = observed_correlations(zoo.pawlowski_model(math.sqrt(2) - 1)[0])
            model = zoo.brans_model(target)
            summary = _finite_summary(model, tol)
        elif name == "mermin":
            signs = [int(s) for s in args.signs.split(",")] if args.signs else None
            model = zoo.mermin_model(signs)
            summary = _finite_summary(model, tol)
        elif name == "hardy":
            gamma = Fraction(args.gamma).limit_denominator(10 ** 9) if args.gamma else Fraction(9, 100)
            model = zoo.hardy_model(gamma, args.a, args.b)
            summary = _finite_summary(model, tol)
            summary["capacity_bound"] = zoo.hardy_capacity_bound(gamma)
            dd = observed_correlations(model).distribution(("D", "D"))
            summary["p_dd_11"] = dd[3]
        else:
            model = zoo.conway_kochen_model()
            M = measures.measurement_dependence(model)
            summary = {"M": M, "F": measures.free_will_fraction(M),
                       "C_meas_dep": info.c_meas_dep(model.prior.astype(float)).value,
                       "capacity_bound": zoo.conway_kochen_capacity_bound()}
        doc = summary
    out = args.out if args.out else f"{name.replace('-', '_')}.json"
    dump_model(model, out)
    doc["model_file"] = out
    emit(doc)
    return EXIT_OK


def cmd_convert(args, cfg):
    model = load_model(args.model, exact=args.exact)
    converted = transforms.to_deterministic(model, _setting(args, cfg, "tol"))
    report = transforms.check_commutation(model, converted)
    if args.out:
        dump_model(converted, args.out)
    else:
        emit(model_to_dict(converted))
    sys.stderr.write(json.dumps(_clean(report.to_dict()), sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="TOML file with defaults (tol, branch_cap, seed, samples, jobs)")
    common.add_argument("--out", help="output path (stdout if omitted)")
    common.add_argument("--tol", type=float, default=None)

    parser = _Parser(prog="bellkit", description="Relaxed Bell inequality toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, func, help_ in (("validate", cmd_validate, "check a model file"),
                              ("measures", cmd_measures, "measures and capacities of a model"),
                              ("capacities", cmd_capacities, "capacities of a model")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--model", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("bound", parents=[common], help="evaluate a relaxed bound")
    p.add_argument("family", choices=FAMILIES)
    for flag in ("I", "S", "M", "O"):
        p.add_argument(f"--{flag}", type=float, default=0.0)
    p.add_argument("--m", type=int, default=4, help="settings per party for imm22")
    p.add_argument("--invert", type=float, metavar="V",
                   help="report the smallest relaxations allowing violation V")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", parents=[common], help="bound over a parameter grid, as CSV")
    p.add_argument("family", choices=FAMILIES)
    for flag in ("I", "S", "M", "O"):
        p.add_argument(f"--{flag}", default="0", help="comma list or start:stop:count")
    p.add_argument("--V", type=float, default=None, help="add a feasible_for_V column")
    p.add_argument("--m", type=int, default=4)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lp", parents=[common], help="LP bound for a functional")
    p.add_argument("functional", help="JSON file or bundled name (chsh, i3322, a4422)")
    p.add_argument("--I", type=float, default=0.0)
    p.add_argument("--S", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--branch-cap", dest="branch_cap", type=int, default=None)
    p.add_argument("--allow-partial", action="store_true")
    p.add_argument("--witness-out", help="write the witness model here")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("zoo", parents=[common], help="build or verify a named model")
    p.add_argument("name", choices=ZOO_NAMES)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--capacities", action="store_true")
    p.add_argument("--p", type=float, default=None, help="pawlowski flip probability")
    p.add_argument("--gamma", default=None, help="hardy gamma (decimal or fraction)")
    p.add_argument("--a", type=int, default=0)
    p.add_argument("--b", type=int, default=0)
    p.add_argument("--signs", default=None, help="mermin: 12 comma-separated signs")
    p.add_argument("--model", default=None, help="brans: model whose correlations are the target")
    p.set_defaults(func=cmd_zoo)

    p = sub.add_parser("convert", parents=[common], help="deterministic model from an "
                                                          "outcome-independent one")
    p.add_argument("--model", required=True)
    p.add_argument("--exact", action="store_true", help="parse probabilities as fractions")
    p.set_defaults(func=cmd_convert)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except (UsageError, ParameterRangeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except (BellkitError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
