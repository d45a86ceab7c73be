"""Command-line front end.

Data goes to stdout or files, human-readable notes to stderr.  Exit codes:
0 success, 1 verification failure, 2 I/O error, 3 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import GeopropError, SingularTime, ValidationError
from .kernels import GalileiGenerator
from .oracle import ground_state
from .phasespace import SystemSpec
from .propagators import propagate
from .symmetry import free_to_bfield, free_to_efield, free_to_oscillator
from .transforms import dilate, fourier, frft, frft_fast, galilei
from .waves import (
    HBAR_DIMENSIONLESS,
    Grid1D,
    WaveFunction1D,
    fidelity,
    gaussian,
    gaussian_2d,
    hermite_gauss,
    random_packets,
    read_wavefunction,
    write_wavefunction,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_IO = 2
EXIT_INVALID = 3


class _Parser(argparse.ArgumentParser):
    """Usage errors count as invalid input."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    output: Optional[str] = None
    system: Optional[SystemSpec] = None
    times: list = field(default_factory=list)
    route: str = "kernel"
    tolerance: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        for name in ("input", "output"):
            path = getattr(self, name)
            if path is not None and not str(path).strip():
                raise ValidationError(f"--{name} must be a nonempty path")
        if self.tolerance is not None and not (self.tolerance > 0):
            raise ValidationError(f"tolerance must be positive, got {self.tolerance}")


def _say(msg):
    print(msg, file=sys.stderr)


def _emit(value):
    print(repr(float(value)) if isinstance(value, (float, np.floating)) else value)


def _grid_option(args, suffix=""):
    vals = [getattr(args, f"out_{k}{suffix}") for k in ("x0", "dx", "n")]
    if all(v is None for v in vals):
        return None
    if any(v is None for v in vals):
        raise ValidationError(f"output grid{suffix} needs all of x0, dx and n")
    return Grid1D(vals[0], vals[1], vals[2])


def _add_grid_options(p, two_d=True):
    p.add_argument("--out-x0", type=float)
    p.add_argument("--out-dx", type=float)
    p.add_argument("--out-n", type=int)
    if two_d:
        p.add_argument("--out-x0-y", dest="out_x0_y", type=float)
        p.add_argument("--out-dx-y", dest="out_dx_y", type=float)
        p.add_argument("--out-n-y", dest="out_n_y", type=int)


def _add_io(p, need_output=True):
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=need_output)


def _add_system_options(p):
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--hbar", type=float, default=1.0)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--force", type=float, default=1.0)
    p.add_argument("--charge", type=float, default=1.0)
    p.add_argument("--field", type=float, default=1.0)


def _system(kind, args):
    if kind == "free":
        return SystemSpec.free(m=args.m, hbar=args.hbar)
    if kind == "oscillator":
        return SystemSpec.oscillator(m=args.m, omega=args.omega, hbar=args.hbar)
    if kind == "efield":
        return SystemSpec.efield(m=args.m, force=args.force, hbar=args.hbar)
    return SystemSpec.bfield(m=args.m, charge=args.charge, field=args.field, hbar=args.hbar)


def parse_coeffs(text):
    """Comma-separated floats; the error names the first bad token."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            val = float(tok)
        except ValueError:
            raise ValidationError(f"galilei coefficient {tok!r} is not a number") from None
        if not math.isfinite(val):
            raise ValidationError(f"galilei coefficient {tok!r} is not finite")
        out.append(val)
    return out


# -- commands ---------------------------------------------------------------------


def cmd_transform(args):
    cfg = RunConfig("transform", args.input, args.output, tolerance=getattr(args, "tolerance", None))
    psi = read_wavefunction(cfg.input)
    op = args.op
    if op == "frft":
        out = (frft_fast if args.fast else frft)(psi, args.gamma)
        if args.compare_fourier:
            # the fractional transform works in units where hbar = 1/(2 pi)
            unit = WaveFunction1D(psi.grid, psi.values, HBAR_DIMENSIONLESS)
            ref = fourier(unit, psi.grid)
            deficit = 1.0 - fidelity(WaveFunction1D(psi.grid, out.values, HBAR_DIMENSIONLESS), ref)
            _say("fidelity with the ordinary Fourier transform:")
            _emit(1.0 - deficit)
            if cfg.tolerance is not None and deficit > cfg.tolerance:
                write_wavefunction(out, cfg.output)
                return EXIT_FAILED
    elif op == "fourier":
        out = fourier(psi, _grid_option(args), _grid_option(args, "_y") if psi.ndim == 2 else None)
    elif op == "galilei":
        coeffs = parse_coeffs(args.coeffs)
        if psi.ndim != 1:
            raise ValidationError("galilei --coeffs takes a 1D wavefunction")
        out = galilei(psi, GalileiGenerator.from_powers(coeffs))
    else:
        out = dilate(psi, args.scale)
    write_wavefunction(out, cfg.output)
    return EXIT_OK


def cmd_propagate(args):
    sys_spec = _system(args.system, args)
    cfg = RunConfig("propagate", args.input, args.output, sys_spec, [args.t], args.route, args.tolerance)
    psi = read_wavefunction(cfg.input)
    grids = (_grid_option(args), _grid_option(args, "_y"))
    routes = ("kernel", "pipeline") if cfg.route == "both" else (cfg.route,)
    results = [propagate(psi, sys_spec, args.t, *grids, route=r, substep=args.substep) for r in routes]
    write_wavefunction(results[0], cfg.output)
    if len(results) == 2:
        fid = fidelity(results[0], results[1])
        _say("two-route fidelity:")
        _emit(fid)
        if cfg.tolerance is not None and 1.0 - fid > cfg.tolerance:
            return EXIT_FAILED
    return EXIT_OK


def cmd_map(args):
    if args.source != "free":
        raise ValidationError("maps start from free solutions; use --from free")
    cfg = RunConfig("map", args.input, args.output, times=[args.t])
    phi = read_wavefunction(cfg.input)
    gx, gy = _grid_option(args), _grid_option(args, "_y")
    if args.target == "oscillator":
        res = free_to_oscillator(phi, args.t, args.m, args.omega, grid=gx)
    elif args.target == "efield":
        res = free_to_efield(phi, args.t, args.m, args.force, grid=gx)
    else:
        res = free_to_bfield(phi, args.t, args.m, args.charge, args.field, gx, gy)
    write_wavefunction(res.state, cfg.output)
    _say("mapped time tau:")
    _emit(res.time)
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_suite

    rep = run_suite(args.suite)
    text = json.dumps(rep, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    failed = [c["name"] for c in rep["checks"] if not c["pass"]]
    for name in failed:
        _say(f"FAILED: {name}")
    if failed and args.suite != "holonomy":
        return EXIT_FAILED
    return EXIT_OK


def _fmt(v):
    return format(float(v), ".17g")


def cmd_export(args):
    psi = read_wavefunction(args.input)
    vals = psi.values
    fh = open(args.output, "w", newline="", encoding="utf-8") if args.output else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        if psi.ndim == 1:
            w.writerow(["x", "re", "im", "abs2"])
            for x, v in zip(psi.grid.points, vals):
                w.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag), _fmt(abs(v) ** 2)])
        else:
            w.writerow(["x", "y", "re", "im", "abs2"])
            for i, x in enumerate(psi.grid_x.points):
                for j, y in enumerate(psi.grid_y.points):
                    v = vals[i, j]
                    w.writerow([_fmt(x), _fmt(y), _fmt(v.real), _fmt(v.imag), _fmt(abs(v) ** 2)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_generate(args):
    cfg = RunConfig("generate", output=args.output, seed=args.seed)
    if args.self_conjugate:
        grid = Grid1D.self_conjugate(args.n)
    else:
        grid = Grid1D.symmetric(args.half_width, args.n)
    hbar = HBAR_DIMENSIONLESS if args.dimensionless else args.hbar
    kind = args.kind
    if args.dims == 2:
        if kind != "gaussian":
            raise ValidationError("2D generation supports --kind gaussian only")
        psi = gaussian_2d(grid, grid, args.sigma, (args.center, args.center_y),
                          (args.momentum, args.momentum_y), hbar)
    elif kind == "gaussian":
        psi = gaussian(grid, args.sigma, args.center, args.momentum, hbar)
    elif kind == "hermite":
        psi = hermite_gauss(args.k, grid)
    elif kind == "ground":
        psi = ground_state(grid, args.m, args.omega, hbar)
    else:
        psi = random_packets(grid, 1, cfg.seed, hbar)[0]
    write_wavefunction(psi, cfg.output)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="geoprop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    tr = sub.add_parser("transform", help="apply one elementary transform to a wavefunction file")
    tsub = tr.add_subparsers(dest="op", required=True, parser_class=_Parser)
    p = tsub.add_parser("frft", help="fractional Fourier transform (dimensionless grid)")
    _add_io(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--fast", action="store_true", help="O(N log N) chirp factorization")
    p.add_argument("--compare-fourier", action="store_true",
                   help="print the fidelity with the ordinary Fourier transform")
    p.add_argument("--tolerance", type=float, help="fail (exit 1) if the deficit exceeds this")
    p = tsub.add_parser("fourier", help="scaled Fourier transform using the file's hbar")
    _add_io(p)
    _add_grid_options(p)
    p = tsub.add_parser("galilei", help="multiply by exp(i S(x)/hbar), S = c1 x + c2 x^2 + ...")
    _add_io(p)
    p.add_argument("--coeffs", required=True, help='comma-separated "c1,c2,..."')
    p = tsub.add_parser("dilate", help="unitary rescaling x -> x * scale")
    _add_io(p)
    p.add_argument("--scale", type=float, required=True)
    tr.set_defaults(func=cmd_transform)

    pr = sub.add_parser("propagate", help="evolve a wavefunction file")
    _add_io(pr)
    pr.add_argument("--system", choices=("free", "oscillator", "efield", "bfield"), required=True)
    pr.add_argument("--t", type=float, required=True)
    pr.add_argument("--route", choices=("kernel", "pipeline", "both"), default="kernel")
    pr.add_argument("--substep", action="store_true", help="split singular times into substeps")
    pr.add_argument("--tolerance", type=float, help="with --route both, fail above this deficit")
    _add_system_options(pr)
    _add_grid_options(pr)
    pr.set_defaults(func=cmd_propagate)

    mp = sub.add_parser("map", help="carry a free solution to another system")
    _add_io(mp)
    mp.add_argument("--from", dest="source", default="free")
    mp.add_argument("--to", dest="target", choices=("oscillator", "efield", "bfield"), required=True)
    mp.add_argument("--t", type=float, required=True)
    _add_system_options(mp)
    _add_grid_options(mp)
    mp.set_defaults(func=cmd_map)

    vf = sub.add_parser("verify", help="run a verification suite and print a JSON report")
    vf.add_argument("suite", choices=("frft", "propagators", "symmetry", "holonomy"))
    vf.add_argument("-o", "--output", help="also write the report here")
    vf.set_defaults(func=cmd_verify)

    ex = sub.add_parser("export", help="write a wavefunction as CSV")
    _add_io(ex, need_output=False)
    ex.set_defaults(func=cmd_export)

    gen = sub.add_parser("generate", help="write a test wavefunction")
    gen.add_argument("-o", "--output", required=True)
    gen.add_argument("--kind", choices=("gaussian", "packets", "hermite", "ground"), default="gaussian")
    gen.add_argument("--dims", type=int, choices=(1, 2), default=1)
    gen.add_argument("--n", type=int, default=1024)
    gen.add_argument("--half-width", type=float, default=20.0)
    gen.add_argument("--self-conjugate", action="store_true",
                     help="grid whose Fourier dual is itself (dimensionless)")
    gen.add_argument("--dimensionless", action="store_true", help="hbar = 1/(2 pi)")
    gen.add_argument("--hbar", type=float, default=1.0)
    gen.add_argument("--sigma", type=float, default=1.0)
    gen.add_argument("--center", type=float, default=0.0)
    gen.add_argument("--center-y", type=float, default=0.0)
    gen.add_argument("--momentum", type=float, default=0.0)
    gen.add_argument("--momentum-y", type=float, default=0.0)
    gen.add_argument("--k", type=int, default=0, help="Hermite-Gauss mode index")
    gen.add_argument("--m", type=float, default=1.0)
    gen.add_argument("--omega", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=cmd_generate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SingularTime as exc:
        _say(f"error: {exc}")
        if exc.safe_times:
            _say("safe times: " + ", ".join(repr(t) for t in exc.safe_times))
        return EXIT_INVALID
    except (ValidationError, GeopropError) as exc:
        _say(f"error: {exc}")
        return EXIT_INVALID
    except OSError as exc:
        _say(f"error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
