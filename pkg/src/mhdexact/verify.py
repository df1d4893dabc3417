"""Finite-difference residual oracle, refinement studies and the five
invariance transformations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (ConfigError, InsufficientRange, MHDExactError, StencilClipped)
from .fields import FieldSample, PhysicalConstants, SolutionField
from .timefns import TimeProfile, as_profile

EPS = np.finfo(float).eps
GROUPS = ("continuity", "momentum", "solenoid", "induction")

# stencil node layout: 0 centre, then for each axis a in (x, y, z, t):
# offsets -2, -1, +1, +2  -> node index 1 + 4a + k
_OFFS = (-2.0, -1.0, 1.0, 2.0)
_W1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_W2 = np.array([-1.0, 16.0, 16.0, -1.0]) / 12.0
_W2C = -30.0 / 12.0


def _stencil(points: np.ndarray, h: float, ht: float):
    n = points.shape[0]
    nodes = np.repeat(points[:, None, :], 17, axis=1)
    for a in range(4):
        step = ht if a == 3 else h
        col = 0 if a == 3 else a + 1
        for k, o in enumerate(_OFFS):
            nodes[:, 1 + 4 * a + k, col] += o * step
    return nodes.reshape(n * 17, 4)


def _d1(f, a, step):
    """First derivative along axis a (0..3) from node values f (N, 17, ...)."""
    sl = f[:, 1 + 4 * a: 5 + 4 * a]
    return np.tensordot(_W1, sl, axes=([0], [1])) / step


def _d2(f, a, step):
    sl = f[:, 1 + 4 * a: 5 + 4 * a]
    return (np.tensordot(_W2, sl, axes=([0], [1])) + _W2C * f[:, 0]) / step ** 2


@dataclass
class ResidualReport:
    points: np.ndarray          # (N, 4) t, x, y, z
    continuity: np.ndarray      # (N,) raw |div v|
    solenoid: np.ndarray        # (N,) raw |div H|
    momentum: np.ndarray        # (N, 3) raw vector residual
    induction: np.ndarray       # (N, 3)
    skipped: np.ndarray         # (N,) bool, footprint not admissible
    h: float
    ht: float
    scale: float

    def raw(self, group: str) -> np.ndarray:
        r = getattr(self, group)
        out = np.linalg.norm(r, axis=-1) if r.ndim == 2 else np.abs(r)
        return np.where(self.skipped, np.nan, out)

    def normalized(self, group: str) -> np.ndarray:
        return self.raw(group) / self.scale

    def max(self, group: str, normalized: bool = True) -> float:
        r = self.normalized(group) if normalized else self.raw(group)
        return float(np.nanmax(r)) if np.any(~self.skipped) else float("nan")

    def rms(self, group: str, normalized: bool = True) -> float:
        r = self.normalized(group) if normalized else self.raw(group)
        return float(np.sqrt(np.nanmean(r ** 2))) if np.any(~self.skipped) else float("nan")

    def aggregates(self) -> dict:
        return {g: {"max": self.max(g), "rms": self.rms(g), "max_raw": self.max(g, False)}
                for g in GROUPS}

    def worst(self, group: str) -> int:
        return int(np.nanargmax(self.normalized(group)))

    def to_text(self) -> str:
        lines = [f"# residual report h={self.h!r} ht={self.ht!r} scale={self.scale!r}"]
        agg = self.aggregates()
        for g in GROUPS:
            lines.append(f"# {g} max={agg[g]['max']:.17g} rms={agg[g]['rms']:.17g}")
        lines.append("t,x,y,z,continuity,momentum,solenoid,induction,skipped")
        cols = [self.normalized(g) for g in GROUPS]
        for i, pt in enumerate(self.points):
            vals = ",".join(f"{v:.17g}" for v in pt)
            res = ",".join("" if self.skipped[i] else f"{c[i]:.17g}" for c in cols)
            lines.append(f"{vals},{res},{int(self.skipped[i])}")
        return "\n".join(lines) + "\n"


def _footprint_ok(f: SolutionField, nodes: np.ndarray, n: int) -> np.ndarray:
    ok = f.admissible(nodes[:, 0], nodes[:, 1:]).reshape(n, 17).all(axis=1)
    return ok


def _safe_eval(f: SolutionField, nodes: np.ndarray, n: int):
    """Evaluate at all nodes; points whose evaluation raises are marked bad."""
    try:
        s = f.evaluate(nodes[:, 0], nodes[:, 1:], check=False)
        return s, np.ones(n, bool)
    except MHDExactError:
        pass
    good = np.ones(n, bool)
    per = nodes.reshape(n, 17, 4)
    for i in range(n):
        try:
            f.evaluate(per[i, :, 0], per[i, :, 1:], check=False)
        except MHDExactError:
            good[i] = False
    sel = np.repeat(good, 17)
    v = np.zeros((n * 17, 3))
    H = np.zeros((n * 17, 3))
    p = np.zeros(n * 17)
    if good.any():
        s = f.evaluate(nodes[sel, 0], nodes[sel, 1:], check=False)
        v[sel], H[sel], p[sel] = s.v, s.H, s.p
    return FieldSample(v, H, p), good


def residuals(f: SolutionField, points, h: float = 1e-2, ht: float = 1e-2,
              consts: PhysicalConstants | None = None, strict: bool = False) -> ResidualReport:
    """4th-order central-difference residuals of (M1)-(M4) at each point."""
    consts = consts or getattr(f, "consts", None) or PhysicalConstants()
    pts = np.atleast_2d(np.asarray(points, float))
    if pts.size == 0:
        raise ConfigError("empty point set")
    if pts.shape[1] != 4:
        raise ConfigError("points must be rows of (t, x, y, z)")
    n = pts.shape[0]
    nodes = _stencil(pts, h, ht)
    ok = _footprint_ok(f, nodes, n)
    sample, good = _safe_eval(f, nodes, n)
    skipped = ~(ok & good)
    if strict and skipped.any():
        raise StencilClipped(f"{int(skipped.sum())} point(s) have an invalid stencil footprint")
    v = sample.v.reshape(n, 17, 3)
    H = sample.H.reshape(n, 17, 3)
    p = sample.p.reshape(n, 17)
    E = np.cross(v, H)

    gv = np.stack([_d1(v, a, h) for a in range(3)], -1)   # (N, 3 comp, 3 axis)
    gH = np.stack([_d1(H, a, h) for a in range(3)], -1)
    gE = np.stack([_d1(E, a, h) for a in range(3)], -1)
    gp = np.stack([_d1(p, a, h) for a in range(3)], -1)
    lap_v = sum(_d2(v, a, h) for a in range(3))
    lap_H = sum(_d2(H, a, h) for a in range(3))
    v_t = _d1(v, 3, ht)
    H_t = _d1(H, 3, ht)

    def curl(g):
        return np.stack([g[:, 2, 1] - g[:, 1, 2], g[:, 0, 2] - g[:, 2, 0],
                         g[:, 1, 0] - g[:, 0, 1]], -1)

    v0, H0 = v[:, 0], H[:, 0]
    conv = np.einsum("nj,nij->ni", v0, gv)
    lorentz = np.cross(H0, curl(gH))
    mom = v_t + conv - consts.mu0 * lorentz + gp / consts.rho - consts.nu * lap_v
    ind = H_t - curl(gE) - consts.eta * lap_H
    cont = np.einsum("nii->n", gv)
    sol = np.einsum("nii->n", gH)

    use = ~skipped
    mags = [1.0]
    if use.any():
        mags += [np.max(np.linalg.norm(v0[use], axis=1)), np.max(np.linalg.norm(H0[use], axis=1))]
    scale = float(max(mags))
    for arr in (mom, ind):
        arr[skipped] = np.nan
    cont = np.where(skipped, np.nan, cont)
    sol = np.where(skipped, np.nan, sol)
    return ResidualReport(pts, cont, sol, mom, ind, skipped, float(h), float(ht), scale)


@dataclass
class GroupConvergence:
    errors: list[float]
    floors: list[float]
    usable: list[bool]
    order: float | None
    status: str               # "exact" | "converged" | "nonconvergent" | "insufficient"

    def passes(self, lo: float = 3.5, hi: float = 4.5) -> bool:
        if self.status == "exact":
            return True
        return self.status != "insufficient" and self.order is not None and lo <= self.order <= hi


@dataclass
class ConvergenceStudy:
    h_list: list[float]
    reports: list[ResidualReport]
    groups: dict[str, GroupConvergence] = field(default_factory=dict)

    def passes(self, lo: float = 3.5, hi: float = 4.5) -> bool:
        return all(g.passes(lo, hi) for g in self.groups.values())

    def summary(self) -> str:
        out = []
        for name, g in self.groups.items():
            errs = " ".join(f"{e:.3e}" for e in g.errors)
            if g.order is None:
                order = "exact (no slope)" if g.status == "exact" else "n/a"
            else:
                order = f"{g.order:.3f}"
            out.append(f"{name:11s} order={order:>16s} status={g.status:13s} max={errs}")
        return "\n".join(out)


def _short_range(hs, errs, floors, usable, lo) -> GroupConvergence:
    """Fewer than three levels above the floor.  The group counts as exact when
    the usable levels are the coarsest ones, fall at order >= lo between each
    other, and the residual keeps falling into the floor."""
    k = [i for i, u in enumerate(usable) if u]
    order = None
    if len(k) == 2:
        i, j = k
        order = float(np.log(errs[i] / errs[j]) / np.log(hs[i] / hs[j]))
    prefix = k == list(range(len(k)))
    falling = all(errs[i + 1] < errs[i] for i in range(len(errs) - 1)
                  if np.isfinite(errs[i]) and np.isfinite(errs[i + 1]) and usable[i])
    ok = prefix and falling and (order is None or order >= lo)
    return GroupConvergence(errs, floors, usable, order, "exact" if ok else "insufficient")


def convergence_study(f: SolutionField, points, h_list: Sequence[float] = (1e-2, 5e-3, 2.5e-3),
                      consts: PhysicalConstants | None = None, ht_ratio: float = 1.0,
                      lo: float = 3.5, hi: float = 4.5, strict: bool = False) -> ConvergenceStudy:
    """Least-squares slope of log(max normalized residual) against log(h).

    Levels whose residual is below the round-off floor 10 eps scale / h^2 are
    excluded from the fit.  A group with every level at the floor is "exact".
    With fewer than three usable levels the group is "exact" only if the
    residual reached the floor after falling at least at order ``lo`` on every
    step, otherwise "insufficient" (raised as InsufficientRange when strict).
    """
    hs = [float(h) for h in h_list]
    if len(hs) < 3:
        raise InsufficientRange("need at least three step sizes")
    if any(b >= a for a, b in zip(hs, hs[1:])):
        raise ConfigError("h_list must be strictly decreasing")
    reps = [residuals(f, points, h, h * ht_ratio, consts) for h in hs]
    study = ConvergenceStudy(hs, reps)
    for g in GROUPS:
        errs = [r.max(g) for r in reps]
        floors = [10 * EPS / h ** 2 for h in hs]
        usable = [bool(np.isfinite(e) and e > fl) for e, fl in zip(errs, floors)]
        if not any(usable):
            study.groups[g] = GroupConvergence(errs, floors, usable, None, "exact")
            continue
        k = [i for i, u in enumerate(usable) if u]
        if len(k) < 3:
            study.groups[g] = _short_range(hs, errs, floors, usable, lo)
            if strict and study.groups[g].status == "insufficient":
                raise InsufficientRange(f"{g}: only {len(k)} level(s) above the round-off floor")
            continue
        x = np.log([hs[i] for i in k])
        y = np.log([errs[i] for i in k])
        order = float(np.polyfit(x, y, 1)[0])
        status = "converged" if lo <= order <= hi else "nonconvergent"
        study.groups[g] = GroupConvergence(errs, floors, usable, order, status)
    return study


# --------------------------------------------------------------------------
# invariance transformations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SymmetryTransform:
    variant: str                 # "T1".."T5"
    a: float = 0.0               # T1 time shift
    lam: float = 1.0             # T2 scale
    R: np.ndarray | None = None  # T3 rotation
    F: tuple | None = None       # T4 three profiles
    theta: TimeProfile | None = None  # T5

    def __post_init__(self):
        if self.variant not in ("T1", "T2", "T3", "T4", "T5"):
            raise ConfigError(f"unknown transform {self.variant!r}")
        if self.variant == "T2" and self.lam == 0:
            raise ConfigError("T2 requires lambda != 0")
        if self.variant == "T3":
            R = np.asarray(self.R, float)
            if R.shape != (3, 3) or not np.allclose(R.T @ R, np.eye(3), atol=1e-12, rtol=0) \
                    or abs(np.linalg.det(R) - 1) > 1e-12:
                raise ConfigError("T3 requires R in SO(3)")
        if self.variant == "T4" and (self.F is None or len(self.F) != 3):
            raise ConfigError("T4 requires three profiles")
        if self.variant == "T5" and self.theta is None:
            raise ConfigError("T5 requires a profile theta")


class TransformedField(SolutionField):
    def __init__(self, base: SolutionField, g: SymmetryTransform, consts: PhysicalConstants | None = None):
        super().__init__({"base": base.family, "transform": g.variant}, base.as_printed, None)
        self.base, self.g = base, g
        self.family = f"{base.family}+{g.variant}"
        self.consts = consts or getattr(base, "consts", None) or PhysicalConstants()
        if g.variant == "T4":
            self._F = [as_profile(x) for x in g.F]

    def _pull(self, t, pts):
        g = self.g
        if g.variant == "T1":
            return t - g.a, pts
        if g.variant == "T2":
            return t / g.lam ** 2, pts / g.lam
        if g.variant == "T3":
            return t, pts @ np.asarray(g.R)     # R^T x, row-wise
        if g.variant == "T4":
            F = np.stack([f(t) for f in self._F], -1)
            return t, pts - F
        return t, pts

    def admissible(self, t, pts, margin: float = 0.0):
        t = np.atleast_1d(np.asarray(t, float))
        pts = np.atleast_2d(np.asarray(pts, float))
        tt, pp = self._pull(t, pts)
        scale = abs(self.g.lam) if self.g.variant == "T2" else 1.0
        return self.base.admissible(tt, pp, margin / scale)

    def evaluate(self, t, pts, check: bool = True) -> FieldSample:
        t = np.atleast_1d(np.asarray(t, float))
        pts = np.atleast_2d(np.asarray(pts, float))
        if t.size == 1 and pts.shape[0] > 1:
            t = np.full(pts.shape[0], t[0])
        tt, pp = self._pull(t, pts)
        s = self.base.evaluate(tt, pp, check=check)
        g = self.g
        if g.variant == "T1":
            return s
        if g.variant == "T2":
            return FieldSample(s.v / g.lam, s.H / g.lam, s.p / g.lam ** 2)
        if g.variant == "T3":
            R = np.asarray(g.R)
            return FieldSample(s.v @ R.T, s.H @ R.T, s.p)
        if g.variant == "T4":
            dF = np.stack([f(t, 1) for f in self._F], -1)
            ddF = np.stack([f(t, 2) for f in self._F], -1)
            rho = self.consts.rho
            return FieldSample(s.v + dF, s.H, s.p - rho * np.einsum("ni,ni->n", pts, ddF))
        return FieldSample(s.v, s.H, s.p + as_profile(g.theta)(t))


def apply_symmetry(f: SolutionField, g: SymmetryTransform,
                   consts: PhysicalConstants | None = None) -> SolutionField:
    return TransformedField(f, g, consts)
