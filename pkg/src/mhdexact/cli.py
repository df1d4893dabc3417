"""Command-line entry point: ``mhdexact catalog | sample | verify``.

Configuration
-------------
``--params FILE`` takes a UTF-8 JSON object.  Every key except ``physical`` is
a field of the family's parameter record (see ``mhdexact catalog --family ID``).
Time profiles are written as strings in the prefix grammar; plain numbers are
constants.  ``physical`` may set ``rho``, ``nu``, ``mu0``, ``eta``.

Example::

    {"alpha": "(poly 0.3 1.0 0.2)", "a": 0.5, "b": 0.3,
     "physical": {"nu": 0.05}}

The profile grammar is printed at the end of ``mhdexact --help``.

Grids
-----
``--grid "t=0;x=-1:1:21;y=-1:1:21;z=-1:1:5"``: each axis is either a single
value or ``min:max:count``.  CSV rows run z fastest, then y, x, t.  The total
point budget is 10^7, overridable with ``MHD_EXACT_BUDGET``.

Transforms
----------
``--transform`` (repeatable, applied in order): ``T1=a``, ``T2=lambda``,
``T3=alpha,beta`` (R is the frame rotation with those angles),
``T4=e1;e2;e3`` (three profiles), ``T5=expr``.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import asymfam, framefam, linfam
from .errors import ConfigError, MHDExactError
from .fields import PhysicalConstants, SolutionField, rotation_matrix
from .timefns import GRAMMAR, parse_profile
from .verify import GROUPS, SymmetryTransform, apply_symmetry, convergence_study

DEFAULT_BUDGET = 10 ** 7
CHUNK = 100_000
CSV_HEADER = "t,x,y,z,u,v,w,Hx,Hy,Hz,p,masked"


@dataclass(frozen=True)
class FamilyEntry:
    id: str
    anchor: str
    params_cls: type
    build: Callable
    defaults: dict
    singular: str
    ledger: tuple[str, ...] = ()


_LIN_DEFAULTS = {
    1: {"B": [[1.0, 0.5, 0.0], [0.5, -0.3, 0.2], [0.0, 0.2, -0.7]]},
    2: {"B": [[0.0, 0.5, 0.3], [-0.5, 0.0, -0.4], [-0.3, 0.4, 0.0]]},
    3: {"A": [0.3, -0.2, 0.5], "c": [1.0, 0.2, 0.0, -0.3, 0.1]},
    4: {"A": [0.3, -0.2, 0.5], "c": [0.4, 0.1, -0.2]},
}

REGISTRY: dict[str, FamilyEntry] = {}


def _register(e: FamilyEntry):
    REGISTRY[e.id] = e


for _case, _anchor in ((1, "symmetric constant B, A from the commutant kernel"),
                       (2, "skew constant B, A proportional to g(t)"),
                       (3, "constant skew A, B = exp(Mt)c symmetric"),
                       (4, "constant skew A, B = exp(Nt)c skew")):
    _register(FamilyEntry(
        f"prop2.{_case}", _anchor, linfam.LinearFamilyParams, linfam.build_linear_family, _LIN_DEFAULTS[_case], "none",
        {1: ("pressure sign of the K matrix", "commuting-matrix typo"),
         2: ("pressure sign of the K matrix",),
         3: ("pressure sign of the K matrix", "entries of M"),
         4: ("pressure sign of the K matrix",)}[_case]))

_register(FamilyEntry("thm3.1", "closed-form family in h(t), beta(t)", asymfam.Thm31Params,
                      asymfam.build_thm31, {}, "none"))
_register(FamilyEntry("thm3.2", "Bernoulli alpha with oscillator forcings", asymfam.Thm32Params,
                      asymfam.build_thm32, {}, "poles of the Bernoulli profile in t",
                      ("forcing and pressure coefficients re-derived",)))
_register(FamilyEntry("thm3.3", "polynomial-in-w recursion of degree n", asymfam.Thm33Params,
                      asymfam.build_thm33, {}, "poles of the Bernoulli profile in t",
                      ("recursion coefficients re-derived", "pressure re-derived")))
_register(FamilyEntry("thm4.2", "moving frame with mu-envelope series of degree n",
                      framefam.Thm42Params, framefam.build_thm42, {}, "zeros of mu(t)",
                      ("mu profile", "lambda_m", "P_m weight", "source terms", "pressure")))
_register(FamilyEntry("thm4.3", "singular vortex in a rotating frame", framefam.Thm43Params,
                      framefam.build_thm43, {}, "plane x cos(alpha) + y sin(alpha) = 0 (tube delta)",
                      ("sign of a sin(alpha) term in H^1", "G sign in the pressure", "Z^2 coefficient")))
_register(FamilyEntry("thm4.4", "plane waves over a linear frame flow", framefam.Thm44Params,
                      framefam.build_thm44, {}, "zeros of alpha'^2 + (beta' sin alpha)^2",
                      ("exponent of Q in phi", "pressure", "r + s must be odd")))
_register(FamilyEntry("thm4.5", "sheared wave with drift c0(t)", framefam.Thm45Params,
                      framefam.build_thm45, {}, "zeros of beta' sin(alpha) and phi",
                      ("sign of s1", "a23 term alpha''/alpha", "exponents of mu and h", "pressure")))
_register(FamilyEntry("thm4.6", "planar decaying wave in a uniformly rotating frame",
                      framefam.Thm46Params, framefam.build_thm46, {}, "none",
                      ("sign of kX sin in u", "pressure")))


# --------------------------------------------------------------------------
# config
# --------------------------------------------------------------------------

def load_params(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def _convert(value):
    if isinstance(value, str):
        return parse_profile(value)
    if isinstance(value, list):
        return [_convert(v) for v in value]
    return value


def build_family(family: str, params: dict | None = None, as_printed: bool = False) -> SolutionField:
    """Validate ``params`` against the family's record and construct the field."""
    if family not in REGISTRY:
        raise ConfigError(f"unknown family {family!r}; expected one of {sorted(REGISTRY)}")
    e = REGISTRY[family]
    params = dict(params or {})
    cdict = params.pop("physical", {}) or {}
    if not isinstance(cdict, dict):
        raise ConfigError("physical must be an object")
    try:
        consts = PhysicalConstants(**{k: float(v) for k, v in cdict.items()})
    except TypeError:
        raise ConfigError(f"unknown physical constant in {sorted(cdict)}") from None
    names = {f.name for f in dataclasses.fields(e.params_cls)} - {"as_printed", "case"}
    unknown = set(params) - names
    if unknown:
        raise ConfigError(f"unknown parameter(s) {sorted(unknown)} for {family}; allowed {sorted(names)}")
    kw = dict(e.defaults)
    kw.update({k: _convert(v) for k, v in params.items()})
    if family.startswith("prop2."):
        kw["case"] = int(family[-1])
    p = e.params_cls(as_printed=as_printed, **kw)
    return e.build(p, consts)


def parse_transform(spec: str) -> SymmetryTransform:
    if "=" not in spec:
        raise ConfigError(f"transform {spec!r} must look like T<n>=<args>")
    kind, arg = (s.strip() for s in spec.split("=", 1))
    try:
        if kind == "T1":
            return SymmetryTransform("T1", a=float(arg))
        if kind == "T2":
            return SymmetryTransform("T2", lam=float(arg))
        if kind == "T3":
            al, be = (float(x) for x in arg.split(","))
            return SymmetryTransform("T3", R=rotation_matrix(al, be))
        if kind == "T4":
            parts = arg.split(";")
            if len(parts) != 3:
                raise ConfigError("T4 needs three profiles separated by ';'")
            return SymmetryTransform("T4", F=tuple(parse_profile(s) for s in parts))
        if kind == "T5":
            return SymmetryTransform("T5", theta=parse_profile(arg))
    except ValueError as e:
        raise ConfigError(f"transform {spec!r}: {e}") from None
    raise ConfigError(f"unknown transform kind {kind!r}")


def make_field(args) -> SolutionField:
    f = build_family(args.family, load_params(args.params), args.as_printed)
    for spec in args.transform or ():
        f = apply_symmetry(f, parse_transform(spec))
    return f


# --------------------------------------------------------------------------
# grids
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    axes: dict   # name -> 1-D array

    @property
    def size(self) -> int:
        return int(np.prod([a.size for a in self.axes.values()]))

    def points(self) -> np.ndarray:
        """(N, 4) rows of (t, x, y, z), z fastest."""
        t, x, y, z = np.meshgrid(*(self.axes[k] for k in "txyz"), indexing="ij")
        return np.stack([t.ravel(), x.ravel(), y.ravel(), z.ravel()], -1)


def budget() -> int:
    raw = os.environ.get("MHD_EXACT_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        b = int(float(raw))
    except ValueError:
        raise ConfigError(f"MHD_EXACT_BUDGET must be an integer, got {raw!r}") from None
    if b < 1:
        raise ConfigError("MHD_EXACT_BUDGET must be >= 1")
    return b


def parse_grid(text: str) -> GridSpec:
    axes: dict = {}
    for part in filter(None, (s.strip() for s in text.split(";"))):
        if "=" not in part:
            raise ConfigError(f"grid axis {part!r} must look like name=value or name=min:max:count")
        name, val = (s.strip() for s in part.split("=", 1))
        if name not in "txyz" or len(name) != 1:
            raise ConfigError(f"unknown grid axis {name!r}")
        if name in axes:
            raise ConfigError(f"grid axis {name!r} given twice")
        bits = val.split(":")
        try:
            if len(bits) == 1:
                axes[name] = np.array([float(bits[0])])
            elif len(bits) == 3:
                lo, hi, n = float(bits[0]), float(bits[1]), int(bits[2])
                if n < 1:
                    raise ConfigError(f"grid axis {name}: count must be >= 1")
                if lo > hi:
                    raise ConfigError(f"grid axis {name}: min must not exceed max")
                axes[name] = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
            else:
                raise ConfigError(f"grid axis {name}: expected value or min:max:count")
        except ValueError:
            raise ConfigError(f"grid axis {name}: could not parse {val!r}") from None
    missing = [a for a in "txyz" if a not in axes]
    if missing:
        raise ConfigError(f"grid is missing axes {missing}")
    g = GridSpec(axes)
    if g.size > budget():
        raise ConfigError(f"grid has {g.size} points, over the budget of {budget()}")
    return g


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

def sample(f: SolutionField, pts: np.ndarray):
    """Field values at rows of (t, x, y, z); masked rows get NaN."""
    n = pts.shape[0]
    out = np.full((n, 7), np.nan)
    masked = np.zeros(n, bool)
    for s in range(0, n, CHUNK):
        blk = pts[s:s + CHUNK]
        ok = f.admissible(blk[:, 0], blk[:, 1:])
        idx = np.nonzero(ok)[0]
        masked[s:s + CHUNK] = ~ok
        if idx.size:
            fs = f.evaluate(blk[idx, 0], blk[idx, 1:], check=False)
            out[s + idx, 0:3] = fs.v
            out[s + idx, 3:6] = fs.H
            out[s + idx, 6] = fs.p
    bad = ~masked & ~np.all(np.isfinite(out), axis=1)
    masked |= bad
    return out, masked


def _g(x: float) -> str:
    return f"{x:.17g}"


def write_csv(fh, pts, vals, masked):
    fh.write(CSV_HEADER + "\n")
    for row, val, m in zip(pts, vals, masked):
        coords = ",".join(_g(x) for x in row)
        if m:
            fh.write(f"{coords},,,,,,,,1\n")
        else:
            fh.write(f"{coords},{','.join(_g(x) for x in val)},0\n")


def write_vtk(fh, grid: GridSpec, vals, masked, title: str):
    if grid.axes["t"].size != 1:
        raise ConfigError("vtk output needs a single time value")
    xs, ys, zs = (grid.axes[k] for k in "xyz")

    def spacing(a):
        return (a[1] - a[0]) if a.size > 1 else 1.0

    # VTK point order is x fastest; the sample order is z fastest
    order = np.arange(vals.shape[0]).reshape(xs.size, ys.size, zs.size).transpose(2, 1, 0).ravel()
    v = vals[order]
    m = masked[order]
    fh.write("# vtk DataFile Version 3.0\n")
    fh.write(f"{title}\nASCII\nDATASET STRUCTURED_POINTS\n")
    fh.write(f"DIMENSIONS {xs.size} {ys.size} {zs.size}\n")
    fh.write(f"ORIGIN {_g(xs[0])} {_g(ys[0])} {_g(zs[0])}\n")
    fh.write(f"SPACING {_g(spacing(xs))} {_g(spacing(ys))} {_g(spacing(zs))}\n")
    fh.write(f"POINT_DATA {v.shape[0]}\n")
    for name, cols in (("velocity", slice(0, 3)), ("H", slice(3, 6))):
        fh.write(f"VECTORS {name} double\n")
        for row in v[:, cols]:
            fh.write(" ".join(_g(x) for x in row) + "\n")
    fh.write("SCALARS p double 1\nLOOKUP_TABLE default\n")
    fh.writelines(_g(x) + "\n" for x in v[:, 6])
    fh.write("SCALARS masked int 1\nLOOKUP_TABLE default\n")
    fh.writelines(f"{int(x)}\n" for x in m)


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------

def random_points(f: SolutionField, n: int, seed: int, box: float = 1.0,
                  t_range: tuple[float, float] = (0.0, 1.0), margin: float = 0.0) -> np.ndarray:
    """``n`` seeded admissible points in [t_range] x [-box, box]^3."""
    rng = np.random.default_rng(seed)
    out: list = []
    need = n
    for _ in range(200):
        cand = np.column_stack([rng.uniform(*t_range, size=4 * need),
                                rng.uniform(-box, box, size=(4 * need, 3))])
        ok = f.admissible(cand[:, 0], cand[:, 1:], margin)
        out.extend(cand[ok][:need])
        need = n - len(out)
        if need <= 0:
            return np.array(out[:n])
    raise ConfigError(f"could not find {n} admissible points")


def parse_h_list(text: str) -> list[float]:
    try:
        hs = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--h-list: could not parse {text!r}") from None
    if len(hs) < 3:
        raise ConfigError("--h-list needs at least three step sizes")
    return hs


def verify_report(family: str, study, pts: np.ndarray, as_printed: bool) -> tuple[str, bool]:
    ok = study.passes()
    lines = [f"# family={family} as_printed={int(as_printed)} points={pts.shape[0]}",
             f"# h_list={','.join(_g(h) for h in study.h_list)}",
             f"# result={'pass' if ok else 'fail'}",
             "group,status,order,max_normalized_per_level,worst_point_t_x_y_z"]
    finest = study.reports[-1]
    for g in GROUPS:
        gc = study.groups[g]
        order = "" if gc.order is None else _g(gc.order)
        errs = ";".join(_g(e) for e in gc.errors)
        if np.all(finest.skipped):
            worst = ""
        else:
            worst = ";".join(_g(x) for x in finest.points[finest.worst(g)])
        lines.append(f"{g},{gc.status},{order},{errs},{worst}")
    lines.append("## failures")
    for g in GROUPS:
        gc = study.groups[g]
        if not gc.passes():
            lines.append(f"{g},{gc.status},{'' if gc.order is None else _g(gc.order)}")
    skipped = int(finest.skipped.sum())
    lines.append(f"## skipped_points={skipped}")
    return "\n".join(lines) + "\n", ok


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_catalog(args, out=None) -> int:
    out = out or sys.stdout
    if args.ledger:
        for e in REGISTRY.values():
            for item in e.ledger:
                out.write(f"{e.id}: {item} (corrected by default; printed form via --as-printed)\n")
        return 0
    if args.family and args.family not in REGISTRY:
        raise ConfigError(f"unknown family {args.family!r}")
    entries = [REGISTRY[args.family]] if args.family else list(REGISTRY.values())
    for e in entries:
        names = [f.name for f in dataclasses.fields(e.params_cls) if f.name not in ("as_printed", "case")]
        out.write(f"{e.id}\t{e.anchor}\n")
        if args.family:
            out.write(f"  parameters: {', '.join(names)}\n")
            out.write(f"  singular set: {e.singular}\n")
            out.write(f"  corrections: {'; '.join(e.ledger) if e.ledger else 'none'}\n")
    return 0


def cmd_sample(args, out=None) -> int:
    out = out or sys.stdout
    if not args.grid:
        raise ConfigError("sample needs --grid")
    f = make_field(args)
    grid = parse_grid(args.grid)
    pts = grid.points()
    vals, masked = sample(f, pts)
    fh = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else out
    try:
        if args.format == "vtk":
            write_vtk(fh, grid, vals, masked, f"mhdexact {args.family}")
        else:
            write_csv(fh, pts, vals, masked)
    finally:
        if args.out:
            fh.close()
    return 0


def cmd_verify(args, out=None) -> int:
    out = out or sys.stdout
    f = make_field(args)
    hs = parse_h_list(args.h_list)
    if args.grid:
        pts = parse_grid(args.grid).points()
        pts = pts[f.admissible(pts[:, 0], pts[:, 1:], 2 * hs[0])]
    else:
        if args.points < 1:
            raise ConfigError("--points must be >= 1")
        pts = random_points(f, args.points, args.seed, margin=2 * hs[0])
    if pts.shape[0] == 0:
        raise ConfigError("empty point set")
    study = convergence_study(f, pts, hs)
    text, ok = verify_report(args.family, study, pts, args.as_printed)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)
    if not ok:
        hint = REGISTRY[args.family].ledger
        msg = f"verification failed for {args.family}"
        if args.as_printed and hint:
            msg += f"; known printed-formula issues: {'; '.join(hint)}"
        print(msg, file=sys.stderr)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mhdexact", description="Exact MHD solution families and their verification.",
                                 formatter_class=argparse.RawDescriptionHelpFormatter,
                                 epilog=__doc__ + "\nProfile grammar:\n" + GRAMMAR)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="list the solution families")
    c.add_argument("--family")
    c.add_argument("--ledger", action="store_true", help="print the known printed-formula corrections")

    def common(p):
        p.add_argument("--family", required=True)
        p.add_argument("--params", help="JSON parameter file")
        p.add_argument("--as-printed", action="store_true", help="use the formulas exactly as printed")
        p.add_argument("--transform", action="append", help="symmetry transform, e.g. T2=1.5")
        p.add_argument("--grid")
        p.add_argument("--out")
        p.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("sample", help="sample fields on a grid")
    common(s)
    s.add_argument("--format", choices=("csv", "vtk"), default="csv")

    v = sub.add_parser("verify", help="residual convergence study")
    common(v)
    v.add_argument("--h-list", default="1e-2,5e-3,2.5e-3")
    v.add_argument("--points", type=int, default=100, help="random points when no grid is given")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cmd = {"catalog": cmd_catalog, "sample": cmd_sample, "verify": cmd_verify}[args.command]
    try:
        return cmd(args)
    except MHDExactError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
