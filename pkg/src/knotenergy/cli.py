"""Command-line interface.

Curves travel between commands as JSON (``{"points": [[x, y, z], ...],
"closed": true}``) on stdin/stdout or through ``--input``/``--output``
files, so commands compose with pipes::

    knotenergy zoo torus2q:q=3,n=256 | knotenergy energy --which e

Exit status: 0 on success, 1 on a domain error (bad curve, non-generic
projection, unknown diagram, failed verification), 2 on a usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numba

from .curve import CurveError, KnotCurve
from .diagrams import (DiagramError, SkeinBudgetError, chord_diagram_of, conway_a2_skein,
                       diagram_stats, parse_diagram, parse_gauss_code, zoo_code)
from .energies import ENERGIES, QuadratureConfig
from .flow import FlowConfig, relax
from .gauss import MCConfig, conway_a2_geometric, gauss_functional, i_y, reduced_functional, writhe
from .mobius import PoleError
from .projections import (DegenerateCurveError, GenericityError, average_crossing_number,
                          average_writhe, average_x_crossing, code_from_projection,
                          generic_direction, project_crossings)
from .verify import parse_suite, run_suite
from .zoo import parse_zoo, sample_zoo

DEFAULT_SEED = 0
DOMAIN_ERRORS = (CurveError, DiagramError, SkeinBudgetError, PoleError, GenericityError,
                 DegenerateCurveError, json.JSONDecodeError, ValueError, KeyError)

CSV_HELP = """\
CSV output (--format csv) has the header
  value,error,method,n,config
with config the JSON-encoded echo of every setting; commands that emit one
record per item (average, energy --which all) add a leading "name" column.
"""


class DomainError(Exception):
    pass


# -- I/O helpers --------------------------------------------------------------------

def _read_curve(args) -> KnotCurve:
    if getattr(args, "curve", None):
        return sample_zoo(args.curve)
    src = args.input
    text = sys.stdin.read() if src in (None, "-") else Path(src).read_text()
    if not text.strip():
        raise DomainError("no curve given: pipe curve JSON on stdin, or use --input or --curve")
    data = json.loads(text)
    if "points" not in data and "curve" in data:
        data = data["curve"]
    return KnotCurve.from_json(data)


def _emit(args, text: str):
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _records_csv(records) -> str:
    buf = io.StringIO()
    named = any(name is not None for name, _ in records)
    w = csv.writer(buf, lineterminator="\n")
    head = ["value", "error", "method", "n", "config"]
    w.writerow((["name"] if named else []) + head)
    for name, rep in records:
        row = [repr(rep.value), repr(rep.error), rep.method, rep.n,
               json.dumps(rep.config, sort_keys=True)]
        w.writerow(([name] if named else []) + row)
    return buf.getvalue()


def _emit_reports(args, records, extra=None):
    """``records``: list of (name or None, FunctionalReport)."""
    if args.format == "csv":
        _emit(args, _records_csv(records))
        return
    if len(records) == 1 and records[0][0] is None:
        obj = records[0][1].to_json()
    else:
        obj = {name: rep.to_json() for name, rep in records}
    if extra:
        obj.update(extra)
    _emit(args, _dump_json(obj))


def _quad(args) -> QuadratureConfig:
    return QuadratureConfig(diagonal_skip=args.skip, richardson=not args.no_richardson)


def _mc(args) -> MCConfig:
    return MCConfig(samples=args.samples, seed=args.seed)


def _direction(text):
    try:
        v = [float(s) for s in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("direction must be three comma-separated numbers") from None
    if len(v) != 3:
        raise argparse.ArgumentTypeError("direction must have three components")
    return v


# -- subcommands ---------------------------------------------------------------------

def cmd_zoo(args):
    spec = parse_zoo(args.spec)
    curve = sample_zoo(spec)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z"])
        w.writerows([repr(float(c)) for c in p] for p in curve.points)
        _emit(args, buf.getvalue())
    else:
        _emit(args, _dump_json({**curve.to_json(), "spec": str(spec)}))


ENERGY_NAMES = {"e": "E", "ecos": "E_cos", "esin": "E_sin", "ecosx": "E_cos,X", "esinx": "E_sin,X"}


def cmd_energy(args):
    curve = _read_curve(args)
    cfg = _quad(args)
    names = list(ENERGY_NAMES) if args.which == "all" else [args.which]
    records = [(n if args.which == "all" else None, ENERGIES[n](curve, cfg)) for n in names]
    _emit_reports(args, records)


def cmd_gauss(args):
    curve = _read_curve(args)
    d = parse_diagram(args.diagram)
    cfg, mc = _quad(args), _mc(args)
    if args.mode == "reduced":
        rep = reduced_functional(curve, d, True, cfg, mc)
    else:
        rep = gauss_functional(curve, d, args.mode == "signed", cfg, mc)
    _emit_reports(args, [(None, rep)])


def cmd_a2(args):
    curve = _read_curve(args)
    _emit_reports(args, [(None, conway_a2_geometric(curve, _quad(args), _mc(args)))])


def cmd_iy(args):
    curve = _read_curve(args)
    _emit_reports(args, [(None, i_y(curve, _mc(args)))])


def cmd_writhe(args):
    curve = _read_curve(args)
    _emit_reports(args, [(None, writhe(curve, _quad(args)))])


def cmd_project(args):
    curve = _read_curve(args)
    cs = project_crossings(curve, args.dir) if args.dir else generic_direction(curve, args.seed)
    out = cs.to_json()
    if cs.regular:
        code = code_from_projection(cs)
        out["code"] = str(code)
        out["chord_diagram"] = str(chord_diagram_of(code))
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "j", "s", "t", "over", "sign"])
        for c in cs.crossings:
            w.writerow([c.i, c.j, repr(c.s), repr(c.t), c.over, c.sign])
        _emit(args, buf.getvalue())
    else:
        _emit(args, _dump_json(out))


AVERAGES = {"cw": average_crossing_number, "w": average_writhe, "cx": average_x_crossing}


def cmd_average(args):
    curve = _read_curve(args)
    rep = AVERAGES[args.stat](curve, args.samples, args.seed)
    _emit_reports(args, [(None, rep)])


def _read_code(args):
    if args.code is not None:
        return parse_gauss_code(args.code)
    if args.zoo is not None:
        return zoo_code(args.zoo)
    text = sys.stdin.read().strip()
    if not text:
        raise DomainError("give a code with --code, a family with --zoo, or text on stdin")
    return parse_gauss_code(text)


def cmd_diagram(args):
    code = _read_code(args)
    if args.action == "parse":
        out = {"code": str(code), "crossings": code.crossings,
               "chord_diagram": chord_diagram_of(code).to_json()}
    elif args.action == "stats":
        stats = diagram_stats(code)
        out = {"pairs": stats["pairs"], "x3": stats["x3"]} if not args.verbose else stats
    else:
        out = {"a2": conway_a2_skein(code, args.max_crossings), "crossings": code.crossings}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        flat = {k: json.dumps(v) if isinstance(v, (dict, list)) else v for k, v in out.items()}
        w.writerow(list(flat))
        w.writerow(list(flat.values()))
        _emit(args, buf.getvalue())
    else:
        _emit(args, _dump_json(out))


def cmd_relax(args):
    curve = _read_curve(args)
    cfg = FlowConfig(energy=args.energy, steps=args.steps, step_size=args.step_size,
                     resample_every=args.resample_every, gradient=args.gradient)
    res = relax(curve, cfg, keep_snapshots=args.snapshot_every if args.snapshots else 0)
    if args.trajectory:
        Path(args.trajectory).write_text(res.jsonl())
    if args.snapshots:
        folder = Path(args.snapshots)
        folder.mkdir(parents=True, exist_ok=True)
        for name, c in res.snapshots.items():
            (folder / f"{name}.json").write_text(_dump_json(c.to_json()))
    summary = {"status": res.status, "accepted": len(res.records) - 1,
               "initial_energy": res.energies[0], "final_energy": res.energies[-1],
               "config": {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}}
    _emit(args, _dump_json({**res.curve.to_json(), "relax": summary}))


def cmd_verify(args):
    results = run_suite(args.suite, args.seed, stream=sys.stderr)
    _emit(args, _dump_json({"seed": args.seed, "suite": args.suite,
                            "results": [r.to_json() for r in results]}))
    if not all(r.passed for r in results):
        raise DomainError("acceptance suite failed: criteria "
                          + ",".join(str(r.number) for r in results if not r.passed))


# -- parser --------------------------------------------------------------------------

def _suite(text):
    try:
        parse_suite(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="output format (default json)")
    common.add_argument("-o", "--output", help="write output here instead of stdout")
    common.add_argument("--threads", type=int,
                        help="cap on worker threads (default: $KNOT_THREADS, else all cores)")

    curve_in = argparse.ArgumentParser(add_help=False)
    src = curve_in.add_mutually_exclusive_group()
    src.add_argument("-i", "--input", help="curve JSON file ('-' or omitted: stdin)")
    src.add_argument("--curve", metavar="SPEC", help="sample a zoo curve instead of reading one")

    quad = argparse.ArgumentParser(add_help=False)
    quad.add_argument("--skip", type=int, default=1,
                      help="diagonal band half-width filled by extrapolation (default 1)")
    quad.add_argument("--no-richardson", action="store_true",
                      help="skip the half-grid error estimate")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--samples", type=int, default=1_000_000,
                    help="Monte Carlo draws (default 1000000)")
    mc.add_argument("--seed", type=int, default=DEFAULT_SEED,
                    help=f"random seed (default {DEFAULT_SEED})")

    p = argparse.ArgumentParser(prog="knotenergy", description=__doc__.split("\n\n")[0],
                                epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("zoo", parents=[common], help="sample a named curve",
                       description="Families: circle, ellipse, torus2q, twist, fourier, figure8, "
                                   "perturbed_circle.  Example: torus2q:q=5,R=2,r=1,n=512")
    s.add_argument("spec")
    s.set_defaults(func=cmd_zoo)

    s = sub.add_parser("energy", parents=[common, curve_in, quad], help="Mobius-type energies")
    s.add_argument("--which", choices=(*ENERGY_NAMES, "all"), default="e")
    s.set_defaults(func=cmd_energy)

    s = sub.add_parser("gauss", parents=[common, curve_in, quad, mc],
                       help="Gauss-diagram functional",
                       description="Diagrams: 'w' (one chord), 'X', 'X3', or pairings like 1-3,2-4. "
                                   "More than three chords use Monte Carlo (--samples, --seed).")
    s.add_argument("--diagram", default="X")
    s.add_argument("--mode", choices=("signed", "unsigned", "reduced"), default="signed")
    s.set_defaults(func=cmd_gauss)

    for name, fn, text in (("a2", cmd_a2, "second Conway coefficient from integrals"),
                           ("iy", cmd_iy, "Biot-Savart volume integral")):
        s = sub.add_parser(name, parents=[common, curve_in, quad, mc], help=text)
        s.set_defaults(func=fn)

    s = sub.add_parser("writhe", parents=[common, curve_in, quad], help="writhe integral")
    s.set_defaults(func=cmd_writhe)

    s = sub.add_parser("project", parents=[common, curve_in], help="crossings of one projection")
    s.add_argument("--dir", type=_direction, help="view direction x,y,z")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help="seed for a random regular direction when --dir is absent")
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("average", parents=[common, curve_in],
                       help="projection averages: cw (crossings), w (writhe), cx (X-crossings)")
    s.add_argument("stat", choices=tuple(AVERAGES))
    s.add_argument("--samples", type=int, default=2000, help="directions (default 2000)")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.set_defaults(func=cmd_average)

    s = sub.add_parser("diagram", parents=[common], help="knot diagram codes")
    s.add_argument("action", choices=("parse", "stats", "a2-skein"))
    g = s.add_mutually_exclusive_group()
    g.add_argument("--code", help="code such as 'O1+ U2+ O3+ U1+ O2+ U3+'")
    g.add_argument("--zoo", help="named diagram: unknot, torus2q(q), twist(k), figure-eight")
    s.add_argument("--max-crossings", type=int, default=16)
    s.add_argument("--verbose", action="store_true", help="stats: include crossings and writhe")
    s.set_defaults(func=cmd_diagram)

    s = sub.add_parser("relax", parents=[common, curve_in], help="energy descent")
    d = FlowConfig()
    s.add_argument("--energy", choices=("E", "E_cos", "E_sin"), default=d.energy)
    s.add_argument("--steps", type=int, default=d.steps)
    s.add_argument("--step-size", type=float, default=d.step_size)
    s.add_argument("--resample-every", type=int, default=d.resample_every)
    s.add_argument("--gradient", type=float, default=d.gradient,
                   help="finite-difference step relative to the mean edge")
    s.add_argument("--trajectory", help="write one JSON line per accepted step here")
    s.add_argument("--snapshots", help="directory for curve snapshots")
    s.add_argument("--snapshot-every", type=int, default=10)
    s.set_defaults(func=cmd_relax)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    s.add_argument("--suite", type=_suite, default="all", help="all, fast, or a list like 1,3")
    s.add_argument("--seed", type=int, default=7, help="root seed (default 7)")
    s.set_defaults(func=cmd_verify)
    return p


def _set_threads(requested):
    if requested is None and os.environ.get("KNOT_THREADS"):
        requested = int(os.environ["KNOT_THREADS"])
    if requested is not None:
        if requested < 1:
            raise DomainError("--threads must be >= 1")
        numba.set_num_threads(min(requested, numba.config.NUMBA_NUM_THREADS))


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _set_threads(args.threads)
        args.func(args)
    except (DomainError, *DOMAIN_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    try:
        sys.exit(run_cli())
    except BrokenPipeError:
        sys.exit(1)


if __name__ == "__main__":
    main()
