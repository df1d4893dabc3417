"""Families written in a moving frame (X, Y, Z) = T(alpha, beta) (x, y, z).

Each family computes frame components (U, Hf, p) and returns lab components
through ``FrameField``.  The frame rotation rate enters the equations through

    Omega = [[0, a', b' sin a], [-a', 0, b' cos a], [-b' sin a, -b' cos a, 0]],

so that D_t F = F_t + (Omega X).grad F - Omega F is the lab time derivative
expressed in frame components.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .asymfam import MAX_DEGREE, _nonzero, _polyval, _prof
from .errors import ConfigError, DegenerateAlpha, DegenerateConstants
from .fields import FrameField, PhysicalConstants, SingularSet, stack3
from .ode2 import osc_basis, solve_forced
from .timefns import (Const, Integral, Poly, TimeProfile, TrigExp, beta_from_alpha, cos, exp,
                      mu_profile, sin, sqrt)

DEGENERATE_ALPHA = 1e-10


def _omega(ap, bp, s, c):
    """Frame rotation matrix per point, shape (N, 3, 3)."""
    z = np.zeros_like(ap)
    return np.stack([
        np.stack([z, ap, bp * s], -1),
        np.stack([-ap, z, bp * c], -1),
        np.stack([-bp * s, -bp * c, z], -1),
    ], -2)


def _quad_form(K, X):
    return 0.5 * np.einsum("ni,nij,nj->n", X, K, X)


def _free(src: Mapping, m: int, j: int, base: float) -> float:
    if (m, j) in src:
        return float(src[(m, j)])
    if f"{m},{j}" in src:
        return float(src[f"{m},{j}"])
    return base * (1.0 if j == 1 else -0.5) / (m + 1)


def _check_branch(name: str, v) -> int:
    if v not in (0, 1):
        raise ConfigError(f"branch flag {name} must be 0 or 1, got {v!r}")
    return int(v)


def _check_sign(name: str, v) -> int:
    if v not in (1, -1):
        raise ConfigError(f"sign {name} must be +1 or -1, got {v!r}")
    return int(v)


# --------------------------------------------------------------------------
# polynomial family with a magnetic strain
# --------------------------------------------------------------------------

@dataclass
class Thm42Params:
    alpha: TimeProfile | str | float | None = None
    beta: TimeProfile | str | float | None = None
    k: float = 1.0
    l1: float = 1.0
    l2: float = -0.5
    xi: float = 0.5
    c: float = 0.4
    n: int = 1
    theta1: TimeProfile | str | float | None = None
    theta2: TimeProfile | str | float | None = None
    qa: Mapping = field(default_factory=dict)   # {(m, j): value} for the (a, b) series
    qc: Mapping = field(default_factory=dict)   # same for the (c, d) series
    max_degree: int = MAX_DEGREE
    as_printed: bool = False


class Thm42Field(FrameField):
    family = "thm4.2"

    def __init__(self, p: Thm42Params, consts: PhysicalConstants):
        super().__init__({"k": p.k, "l1": p.l1, "l2": p.l2, "xi": p.xi, "c": p.c, "n": p.n},
                         p.as_printed)
        self.p, self.consts = p, consts
        if abs(p.xi) < 1e-10:
            raise DegenerateConstants("xi must be nonzero")
        if not p.l1 > 0:
            raise DegenerateConstants("l1 must be positive so that mu > 0")
        if not (isinstance(p.n, (int, np.integer)) and p.n >= 1):
            raise ConfigError("degree n must be a positive integer")
        if p.n > p.max_degree:
            raise ConfigError(f"degree n = {p.n} exceeds the cap {p.max_degree}")
        pr = p.as_printed
        n, xi, cc = int(p.n), float(p.xi), float(p.c)
        mu0, nu, eta = consts.mu0, consts.nu, consts.eta
        alpha = _prof(p.alpha, Poly([0.4, 0.5]))
        beta = _prof(p.beta, Const(0.2) + TrigExp(0.3, 0.0, 1.0, 0.0, "sin"))
        th1, th2 = _prof(p.theta1, 0.0), _prof(p.theta2, 0.0)
        mu = mu_profile(p.k, p.l1, p.l2, as_printed=pr)
        dmu = mu.d()
        gam = dmu / mu * 0.25
        Gam = dmu / mu * 0.5
        smu = sqrt(mu)
        q4, qi = mu ** 0.25, mu ** -0.25
        g = cc / smu
        ap, bp = alpha.d(), beta.d()
        app = ap.d()
        sa, ca = sin(alpha), cos(alpha)
        bps = bp * sa
        vphi = Integral(bp * ca)
        cp, sp = cos(vphi), sin(vphi)

        if pr:
            k1 = bp * bp * sa * ca + ap * gam - app
            k2 = bps.d() + (ap - gam.d()) * bp * ca
            src_a = {1: q4 * (k1 * cp - k2 * sp), 0: q4 * (th1 * cp - th2 * sp)}
            src_b = {1: q4 * (-k1 * sp - k2 * cp), 0: q4 * (-th1 * sp - th2 * cp)}
            src_c = {1: qi * (ap * cp * (3 * xi) + bps * sp * (3 * xi)),
                     0: qi * (-(ap * g * cp) - bps * sp * xi)}
            src_d = {1: qi * (-(ap * sp * (3 * xi)) + bps * cp * (3 * xi)),
                     0: qi * (ap * g * sp - bps * cp * xi)}
        else:
            k1 = bp * bp * sa * ca + ap * gam - app
            k2 = -(bps.d() + ap * bp * ca - gam * bps)
            l1_, l2_ = ap * (3 * xi), bps * (3 * xi)
            m1_, m2_ = -(g * ap), -(g * bps)
            src_a = {1: q4 * (cp * k1 - sp * k2), 0: q4 * (cp * th1 - sp * th2)}
            src_c = {1: q4 * (sp * k1 + cp * k2), 0: q4 * (sp * th1 + cp * th2)}
            src_b = {1: qi * (cp * l1_ - sp * l2_), 0: qi * (cp * m1_ - sp * m2_)}
            src_d = {1: qi * (sp * l1_ + cp * l2_), 0: qi * (sp * m1_ + cp * m2_)}

        self.lams: dict = {}

        def series(sa_, sb_, free):
            a = [Const(0.0)] * (n + 3)
            b = [Const(0.0)] * (n + 3)
            for m in range(n, -1, -1):
                A = a[m + 2] * (nu * (m + 1) * (m + 2)) - b[m + 1] * (cc * mu0 * (m + 1)) \
                    + sa_.get(m, Const(0.0))
                B = b[m + 2] * (eta * (m + 1) * (m + 2)) + a[m + 1] * ((m + 1) * cc) / mu \
                    + sb_.get(m, Const(0.0))
                if pr:
                    lam = k_sq / 4 - (2 * m + 1) * (2 * m + 3) * xi * xi * mu0
                    basis = osc_basis(lam, mu)
                    P = A.d() - A - dmu / mu * A * (m + 1) + smu * B * (xi * mu0 * (2 * m + 1))
                    am = solve_forced(basis, P, _free(free, m, 1, 0.2), _free(free, m, 2, 0.2))
                    bm = (am.d() - Gam * am * (m + 1)) / (smu * ((2 * m + 1) * xi * mu0))
                else:
                    lam = k_sq / 4 - (4 * m * m - 1) * xi * xi * mu0
                    basis = osc_basis(lam, mu ** ((2 * m + 1) / 4))
                    P = A.d() - Gam * A * (m + 1) + smu * B * ((2 * m - 1) * mu0 * xi)
                    am = solve_forced(basis, P, _free(free, m, 1, 0.2), _free(free, m, 2, 0.2))
                    bm = (am.d() - Gam * am * m - A) / (smu * ((2 * m - 1) * mu0 * xi))
                a[m], b[m] = am, bm
                self.lams[m] = lam
            return a[:n + 1], b[:n + 1]

        k_sq = float(p.k) ** 2
        self.a, self.b = series(src_a, src_b, p.qa)
        self.c, self.d = series(src_c, src_d, p.qc)
        pro = {"alpha": alpha, "beta": beta, "ap": ap, "app": app, "bp": bp, "dbps": bps.d(),
               "mu": mu, "dmu": dmu, "ddmu": dmu.d(), "gam": gam, "dgam": gam.d(),
               "vphi": vphi, "th1": th1, "th2": th2}
        for m in range(n + 1):
            pro.update({f"a{m}": self.a[m], f"b{m}": self.b[m], f"c{m}": self.c[m], f"d{m}": self.d[m]})
        self._pro = pro

    def profiles(self):
        return self._pro

    def frame_fields(self, c, t, X):
        n, xi, cc = self.p.n, self.p.xi, self.p.c
        mu0 = self.consts.mu0
        x, y, z = X.T
        s, co = np.sin(c["alpha"]), np.cos(c["alpha"])
        ap, app, bp = c["ap"], c["app"], c["bp"]
        bps, dbps = bp * s, c["dbps"]
        mu, gam = c["mu"], c["gam"]
        cp, sp = np.cos(c["vphi"]), np.sin(c["vphi"])
        q4 = mu ** 0.25
        co_ = {k: [c[f"{k}{m}"] for m in range(n + 1)] for k in "abcd"}
        ph, sh, ps, hh = (_polyval(co_[k], x) for k in "abcd")
        phi = (cp * ph + sp * ps) / q4
        psi = (-sp * ph + cp * ps) / q4
        sig = q4 * (cp * sh + sp * hh)
        h = q4 * (-sp * sh + cp * hh)
        g = cc / np.sqrt(mu)
        U = stack3(-2 * gam * x - ap * y - bps * z, phi + gam * y, psi + gam * z)
        Hf = stack3(g - 2 * xi * x, sig + xi * y, h + xi * z)
        # exact antiderivatives in X, constant 0
        anti = {k: _polyval([np.zeros_like(x)] + [cf / (i + 1) for i, cf in enumerate(co_[k])], x)
                for k in "ac"}
        int_phi = (cp * anti["a"] + sp * anti["c"]) / q4
        int_psi = (-sp * anti["a"] + cp * anti["c"]) / q4
        if self.as_printed:
            dmu, ddmu = c["dmu"], c["ddmu"]
            cx = ((-2 * mu ** 2 * ddmu - dmu ** 3 + mu * dmu * ddmu + 2 * mu * dmu ** 2) / (4 * mu ** 3)
                  + ap ** 2 + bps ** 2)
            r2 = dmu ** 2 / (16 * mu ** 2)
            Phi = (cx * x ** 2 / 2 + (r2 - ap ** 2) * y ** 2 / 2 + (r2 - bps ** 2) * z ** 2 / 2
                   - (app + dmu / (2 * mu) * ap - bps * bp * co) * x * y
                   - (dbps + ap * bp * co + dmu / (2 * mu) * bps) * x * z
                   - y * z * ap * bps - 2 * ap * int_phi - 2 * bps * int_psi
                   - mu0 * ((sig ** 2 + h ** 2) / 2 + xi * sig * y + xi * h * z))
        else:
            dgam = c["dgam"]
            Phi = ((4 * gam ** 2 + bps ** 2 + ap ** 2 - 2 * dgam) * x ** 2 / 2
                   + (gam ** 2 - ap ** 2 + dgam) * y ** 2 / 2
                   + (gam ** 2 - bps ** 2 + dgam) * z ** 2 / 2
                   + (bp * bps * co - 2 * gam * ap - app) * x * y
                   + (-2 * gam * bps - dbps - ap * bp * co) * x * z
                   - bps * ap * y * z
                   - mu0 * xi * (sig * y + h * z) + c["th1"] * y + c["th2"] * z
                   - mu0 * (sig ** 2 + h ** 2) / 2
                   - 2 * ap * int_phi - 2 * bps * int_psi)
        return U, Hf, -self.consts.rho * Phi


def build_thm42(p: Thm42Params | None = None, consts: PhysicalConstants | None = None) -> Thm42Field:
    return Thm42Field(p or Thm42Params(), consts or PhysicalConstants())


# --------------------------------------------------------------------------
# singular vortex family
# --------------------------------------------------------------------------

@dataclass
class Thm43Params:
    alpha: TimeProfile | str | float | None = None
    a: float = 0.5
    b: float = 0.3
    delta: float = 1e-3
    as_printed: bool = False


class Thm43Field(FrameField):
    family = "thm4.3"

    def __init__(self, p: Thm43Params, consts: PhysicalConstants):
        alpha = _prof(p.alpha, Poly([0.3, 1.0, 0.2]))
        if not p.delta > 0:
            raise ConfigError("tube radius delta must be positive")
        sing = SingularSet("plane x cos(alpha) + y sin(alpha) = 0", self._distance, float(p.delta))
        super().__init__({"a": p.a, "b": p.b}, p.as_printed, sing)
        self.p, self.consts = p, consts
        self.alpha = alpha
        ap = alpha.d()
        if ap.is_zero():
            raise DegenerateAlpha("alpha' vanishes identically")
        G = -(ap.d() / ap) * 0.5 - (consts.mu0 * p.a * p.b / 4) / ap
        self._pro = {"alpha": alpha, "beta": Const(0.0), "ap": ap, "app": ap.d(), "G": G, "dG": G.d()}

    def _distance(self, t, pts):
        al = self.alpha(t)
        return np.abs(pts[:, 0] * np.cos(al) + pts[:, 1] * np.sin(al))

    def profiles(self):
        return self._pro

    def coefficients(self, t):
        # checked before G = -alpha''/(2 alpha') - ... hits its pole
        if np.any(np.abs(self._pro["ap"](np.atleast_1d(t))) < DEGENERATE_ALPHA):
            raise DegenerateAlpha(f"|alpha'| < {DEGENERATE_ALPHA} on the evaluated times")
        return super().coefficients(t)

    def frame_fields(self, c, t, X):
        a, b = self.p.a, self.p.b
        nu, mu0 = self.consts.nu, self.consts.mu0
        x, y, z = X.T
        ap, app, G, dG = c["ap"], c["app"], c["G"], c["dG"]
        U = stack3(G * x - ap * y - 6 * nu / x, ap * x + G * y - 6 * nu * y / x ** 2, -2 * G * z)
        Hf = stack3(np.zeros_like(x), a * x + b * y, -b * z)
        Phi = ((dG + G ** 2 - ap ** 2 - mu0 * a * a) * x ** 2 / 2 + (dG + G ** 2 - ap ** 2) * y ** 2 / 2
               + (2 * G ** 2 - dG) * z ** 2 + (app + 2 * ap * G) * x * y
               - 12 * nu * ap * y / x + 12 * nu ** 2 / x ** 2)
        return U, Hf, -self.consts.rho * Phi

    def fields(self, c, t, pts):
        if not self.as_printed:
            return super().fields(c, t, pts)
        a, b = self.p.a, self.p.b
        nu, mu0 = self.consts.nu, self.consts.mu0
        x, y, z = pts.T
        al, ap, app = c["alpha"], c["ap"], c["app"]
        s, co = np.sin(al), np.cos(al)
        gp = app / (2 * ap) + mu0 * a * b / (4 * ap)
        # derivative of gp, from G = -gp
        dgp = -c["dG"]
        X = x * co + y * s
        Y = -x * s + y * co
        u = -gp * x - ap * y - 6 * nu * co / X + 6 * nu * s * Y / X ** 2
        v = ap * x - gp * y - 6 * nu * s / X - 6 * nu * co * Y / X ** 2
        w = 2 * gp * z
        H1 = -((a * co - b * s) * x + (-a * s + b * co) * y) * s
        H2 = ((a * co - b * s) * x + (a * s + b * co) * y) * co
        H3 = -b * z
        p = -self.consts.rho * ((dgp + gp ** 2 - ap ** 2 - mu0 * a * a) * X ** 2 / 2
                                + (dgp + gp ** 2 - ap ** 2) * Y ** 2 / 2
                                - (dgp + 2 * gp ** 2) * z ** 2 / 2
                                + (app + 2 * ap * gp) * X * Y
                                - 12 * nu * ap * Y / X + 12 * nu ** 2 / X ** 2)
        return stack3(u, v, w), stack3(H1, H2, H3), p


def build_thm43(p: Thm43Params | None = None, consts: PhysicalConstants | None = None) -> Thm43Field:
    return Thm43Field(p or Thm43Params(), consts or PhysicalConstants())


# --------------------------------------------------------------------------
# plane-wave families over a linear background
# --------------------------------------------------------------------------

def _waves(r: int, w, amp_a: float):
    """(xi, zeta) with xi' = zeta and zeta' = (-1)^r xi (r = 0 hyperbolic)."""
    if r == 0:
        e, ei = np.exp(w), np.exp(-w)
        return e - amp_a * ei, e + amp_a * ei
    return np.sin(w), np.cos(w)


def _matrix(rows) -> np.ndarray:
    return np.stack([np.stack([np.broadcast_to(v, np.shape(rows[0][0])) for v in row], -1)
                     for row in rows], -2)


@dataclass
class Thm44Params:
    alpha: TimeProfile | str | float | None = None
    g: TimeProfile | str | float | None = None
    c: float = 0.3
    k1: float = 0.8
    k2: float = 0.7
    d: float = 2.0
    d0: float = 0.0
    beta_sign: int = 1
    r: int = 1
    s: int = 0
    gamma_sign: int = 1
    a: float = 0.3          # amplitude constant of the hyperbolic (xi_r, zeta_r)
    b: float = 0.6          # amplitude constant of the hyperbolic (phi_s, psi_s)
    as_printed: bool = False


class Thm44Field(FrameField):
    family = "thm4.4"

    def __init__(self, p: Thm44Params, consts: PhysicalConstants):
        r, s = _check_branch("r", p.r), _check_branch("s", p.s)
        if (r + s) % 2 != 1:
            raise ConfigError("branch flags must satisfy r + s odd (real wave number)")
        gs = _check_sign("gamma_sign", p.gamma_sign)
        bs = _check_sign("beta_sign", p.beta_sign)
        super().__init__({"c": p.c, "k1": p.k1, "k2": p.k2, "d": p.d, "d0": p.d0, "r": r, "s": s,
                          "gamma_sign": gs}, p.as_printed)
        self.p, self.consts = p, consts
        _nonzero("k1", p.k1)
        _nonzero("k2", p.k2)
        alpha = _prof(p.alpha, Poly([1.0, 0.3]))
        g = _prof(p.g, Poly([1.0, 0.2]))
        beta = beta_from_alpha(alpha, p.d, p.d0, bs)
        cc = float(p.c)
        ap, bp = alpha.d(), beta.d()
        app, bpp = ap.d(), bp.d()
        sa, ca = sin(alpha), cos(alpha)
        bps = bp * sa
        dbps = bps.d()
        Q = ap * ap + bps * bps
        E = exp(Integral(cc / g))
        if p.as_printed:
            vphi = Q ** 4 * E * p.k1
        else:
            vphi = Q ** -0.25 * E * p.k1
        mu = p.k2 / (Q * g * E * E)
        a11 = -(Q.d() / Q) * 0.25 - cc / g
        a22 = (-(a11 * ap * ap) - ap * app + bps * dbps + ap * bps * bp * ca * 2) / Q
        a33 = (-(a11 * bps * bps) + ap * app - bps * dbps - ap * bps * bp * ca * 2) / Q
        a23 = (-(a11 * ap * bps) - app * bps - ap * bpp * sa - ap * ap * bp * ca * 2
               + bp * bp * bps * sa * ca) / Q
        b22 = (ap * ap - bps * bps) * (2 * cc) / Q
        b23 = ap * bps * (4 * cc) / Q
        al1, be1 = vphi * ap, vphi * bps
        gam = vphi * sqrt(Q) * gs
        C = -((-1) ** s) * mu * vphi * Q / gam
        self._pro = {"alpha": alpha, "beta": beta, "ap": ap, "app": app, "bp": bp, "dbps": dbps,
                     "Q": Q, "dQ": Q.d(), "vphi": vphi, "dvphi": vphi.d(), "mu": mu, "g": g, "dg": g.d(),
                     "a11": a11, "a22": a22, "a33": a33, "a23": a23,
                     "da11": a11.d(), "da22": a22.d(), "da33": a33.d(), "da23": a23.d(),
                     "b22": b22, "b23": b23, "al1": al1, "be1": be1, "dal1": al1.d(), "dbe1": be1.d(),
                     "gam": gam, "dgam": gam.d(), "C": C, "dC": C.d()}

    def profiles(self):
        return self._pro

    def _parts(self, c, X):
        r, s = self.p.r, self.p.s
        x, y, z = X.T
        sa = np.sin(c["alpha"])
        ap, bps = c["ap"], c["bp"] * sa
        w = c["al1"] * y + c["be1"] * z
        xi, ze = _waves(r, w, self.p.a)
        ph, ps = _waves(s, c["gam"] * x, self.p.b)
        sig, tau = c["mu"] * ap, c["mu"] * bps
        amp = c["al1"] * sig + c["be1"] * tau
        wave = stack3(-amp * ze * ph, sig * c["gam"] * xi * ps, tau * c["gam"] * xi * ps)
        return xi, ze, ph, ps, wave

    def frame_fields(self, c, t, X):
        r, s = self.p.r, self.p.s
        x, y, z = X.T
        sa, ca = np.sin(c["alpha"]), np.cos(c["alpha"])
        ap, bp = c["ap"], c["bp"]
        bps = bp * sa
        a11, a22, a33, a23 = c["a11"], c["a22"], c["a33"], c["a23"]
        A = _matrix([[a11, -ap, -bps], [ap, a22, a23], [bps, a23, a33]])
        zero = np.zeros_like(a11)
        B = _matrix([[zero, zero, zero], [zero, c["b22"], c["b23"]], [zero, c["b23"], -c["b22"]]])
        xi, ze, ph, ps, wave = self._parts(c, X)
        U = np.einsum("nij,nj->ni", A, X) + wave
        Hf = np.einsum("nij,nj->ni", B, X) + c["g"][:, None] * wave
        if self.as_printed:
            Phi = self._printed_phi(c, X, xi, ze, ph, ps)
        else:
            dA = _matrix([[c["da11"], -c["app"], -c["dbps"]], [c["app"], c["da22"], c["da23"]],
                          [c["dbps"], c["da23"], c["da33"]]])
            Om = _omega(ap, bp, sa, ca)
            K = dA + A @ Om - Om @ A + A @ A
            K = 0.5 * (K + np.swapaxes(K, 1, 2))
            Cc = c["C"]
            chi_t = (c["dC"] * ze * ps
                     + Cc * (-1) ** r * xi * (c["dal1"] * y + c["dbe1"] * z) * ps
                     + Cc * ze * (-1) ** s * ph * c["dgam"] * x)
            drift = np.einsum("nij,nj->ni", A + Om, X)
            R = -2 * c["mu"] * c["Q"] * xi * ph
            Phi = (_quad_form(K, X) + chi_t + np.einsum("ni,ni->n", drift, wave)
                   + 0.5 * np.einsum("ni,ni->n", wave, wave) + R)
        return U, Hf, -self.consts.rho * Phi

    def _printed_phi(self, c, X, xi, ze, ph, ps):
        r, s = self.p.r, self.p.s
        a, b = self.p.a, self.p.b
        x, y, z = X.T
        sa, ca = np.sin(c["alpha"]), np.cos(c["alpha"])
        ap, app, bp, dbps = c["ap"], c["app"], c["bp"], c["dbps"]
        bps = bp * sa
        a11, a22, a33, a23 = c["a11"], c["a22"], c["a33"], c["a23"]
        Q, vphi, mu, g = c["Q"], c["vphi"], c["mu"], c["g"]
        kr = 1.0 if r == 1 else 4 * a
        ks = 1.0 if s == 1 else 4 * b
        pm = float(self.p.gamma_sign)
        sq = np.sqrt(Q)
        dvp = c["dvphi"] / vphi
        return ((c["da11"] + a11 ** 2 - Q) * x ** 2 / 2
                + (c["da22"] + a22 ** 2 + c["da23"] - 2 * a23 * bp * ca - ap ** 2) * y ** 2 / 2
                + (c["da33"] + a33 ** 2 + c["da23"] + 2 * a23 * bp * ca - bps ** 2) * z ** 2 / 2
                - (ap + 2 * ap * a22 + 2 * a23 * bps - bp ** 2 * sa * ca) * x * y
                - (dbps + 2 * ap * a23 + ap * bp * ca) * x * z
                + (c["da23"] - a11 * a23 + (a22 - a33) * bp * ca - ap * bps) * y * z
                + kr * vphi ** 2 * mu ** 2 * Q ** 2 * ph ** 2 / 2
                + ks * vphi ** 2 * mu ** 2 * Q ** 2 * xi ** 2 / 2
                - 2 * mu * xi * ph
                + pm * (-1) ** r * mu * sq * (c["dg"] / g + 2 * self.p.c / g + c["dQ"] / (2 * Q)) * ze * ps
                - pm * vphi * mu * sq * (ap * (dvp + app / ap + a22 * bps / ap * (a23 - bp * ca)) * y
                                         + bps * (dvp + dbps / bps + a33 + ap / bps * (a23 + bp * ca)) * z)
                * xi * ps)


def build_thm44(p: Thm44Params | None = None, consts: PhysicalConstants | None = None) -> Thm44Field:
    return Thm44Field(p or Thm44Params(), consts or PhysicalConstants())


@dataclass
class Thm45Params:
    alpha: TimeProfile | str | float | None = None
    phi: TimeProfile | str | float | None = None
    g1: TimeProfile | str | float | None = None
    lam: TimeProfile | str | float | None = None
    f1: TimeProfile | str | float | None = None   # if given, g1 is derived instead
    g1_0: float = 0.3                               # g1(0) when g1 is derived
    c1: float = 0.5
    c2: float = 0.4
    d: float = 2.0
    d0: float = 0.0
    beta_sign: int = 1
    b: float = 0.3
    c: float = 0.5
    r: int = 1
    as_printed: bool = False


class Thm45Field(FrameField):
    family = "thm4.5"

    def __init__(self, p: Thm45Params, consts: PhysicalConstants):
        r = _check_branch("r", p.r)
        bs = _check_sign("beta_sign", p.beta_sign)
        super().__init__({"c1": p.c1, "c2": p.c2, "d": p.d, "d0": p.d0, "b": p.b, "c": p.c, "r": r},
                         p.as_printed)
        self.p, self.consts = p, consts
        _nonzero("c1", p.c1)
        if r == 0:
            _nonzero("c", p.c)
        nu, eta = consts.nu, consts.eta
        pr = p.as_printed
        eps = -((-1) ** r)
        alpha = _prof(p.alpha, Poly([1.0, 0.3]))
        vphi = _prof(p.phi, Poly([1.0, 0.1]))
        lam = _prof(p.lam, 0.2)
        beta = beta_from_alpha(alpha, p.d, p.d0, bs)
        ap, bp = alpha.d(), beta.d()
        app = ap.d()
        sa, ca = sin(alpha), cos(alpha)
        bps = bp * sa
        dbps = bps.d()
        Q = ap * ap + bps * bps
        dvp = vphi.d() / vphi
        if pr:
            sg = float((-1) ** r)
            mu = p.c1 / (vphi ** 3 * Q) * exp(Integral(vphi * Q * (sg * nu)))
            h = p.c2 * vphi * vphi * exp(Integral(vphi * Q * (sg * (eta - nu))))
            a23 = -(ap * bps / Q) * (dvp + app / alpha + dbps / bps + ap * bp * ca / bps
                                      - bp * bp * sa * ca / ap)
            a22 = dbps / bps + ap * bp * ca / bps + ap * a23 / bps
            s1, q1 = lam * ap, lam * bps
        else:
            mu = p.c1 / (vphi ** 3 * Q) * exp(Integral(vphi * vphi * Q * (eps * nu)))
            h = p.c2 * vphi * vphi * exp(Integral(vphi * vphi * Q * (eps * (eta - nu))))
            g1_, g2_ = vphi * ap, vphi * bps
            r1 = -g1_.d() + g2_ * bp * ca
            r2 = -g2_.d() - g1_ * bp * ca + g2_ * dvp
            D = vphi * vphi * Q
            a22 = (g1_ * r1 - g2_ * r2) / D
            a23 = (g2_ * r1 + g1_ * r2) / D
            s1, q1 = -(lam * ap), lam * bps
        a33 = -dvp - a22
        P = vphi * mu * Q
        decay = dvp - vphi * vphi * Q * (eps * nu)
        if p.f1 is not None and p.g1 is None:
            f1 = _prof(p.f1, 0.0)
            # g1' = -decay g1 - f1 P, integrated with an integrating factor
            Ef = exp(Integral(decay))
            g1 = (p.g1_0 - Integral(Ef * f1 * P)) / Ef
        else:
            if p.f1 is not None:
                raise ConfigError("give at most one of g1 and f1; the other is determined")
            g1 = _prof(p.g1, Poly([0.3, 0.1]))
            f1 = -(g1 * decay + g1.d()) / P
        self._pro = {"alpha": alpha, "beta": beta, "ap": ap, "app": app, "bp": bp, "dbps": dbps,
                     "Q": Q, "dQ": Q.d(), "vphi": vphi, "dvphi": vphi.d(), "ddvphi": vphi.d().d(),
                     "mu": mu, "dmu": mu.d(), "h": h, "g1": g1, "f1": f1, "df1": f1.d(),
                     "lam": lam, "dlam": lam.d(),
                     "a11": dvp, "a22": a22, "a33": a33, "a23": a23,
                     "da11": dvp.d(), "da22": a22.d(), "da33": a33.d(), "da23": a23.d(),
                     "q1": q1, "s1": s1, "dq1": q1.d(), "ds1": s1.d()}
        self._kappa = (4 * p.b * p.c) if r == 1 else p.c ** 2

    def profiles(self):
        return self._pro

    def frame_fields(self, c, t, X):
        r, b, cw = self.p.r, self.p.b, self.p.c
        eps = -((-1) ** r)
        x, y, z = X.T
        sa, ca = np.sin(c["alpha"]), np.cos(c["alpha"])
        ap, bp = c["ap"], c["bp"]
        bps = bp * sa
        vphi, mu, Q, h = c["vphi"], c["mu"], c["Q"], c["h"]
        a11, a22, a33, a23 = c["a11"], c["a22"], c["a33"], c["a23"]
        A = _matrix([[a11, -ap, -bps], [ap, a22, a23], [bps, a23, a33]])
        w = vphi * ap * y + vphi * bps * z
        if r == 1:
            e, ei = np.exp(w), np.exp(-w)
            xi, ze = b * e - cw * ei, b * e + cw * ei
        else:
            xi, ze = cw * np.sin(w + b), cw * np.cos(w + b)
        P = vphi * mu * Q
        G = c["g1"] + P * x
        wave = stack3(-G * ze, mu * ap * xi, mu * bps * xi)
        c0 = stack3(c["f1"], c["q1"], c["s1"])
        U = np.einsum("nij,nj->ni", A, X) + c0 + wave
        Hf = h[:, None] * wave
        if self.as_printed:
            Phi = self._printed_phi(c, X, xi, ze)
        else:
            dA = _matrix([[c["da11"], -c["app"], -c["dbps"]], [c["app"], c["da22"], c["da23"]],
                          [c["dbps"], c["da23"], c["da33"]]])
            Om = _omega(ap, bp, sa, ca)
            K = dA + A @ Om - Om @ A + A @ A
            K = 0.5 * (K + np.swapaxes(K, 1, 2))
            dc0 = stack3(c["df1"], c["dq1"], c["ds1"])
            k0 = dc0 + np.einsum("nij,nj->ni", A - Om, c0)
            dvp = c["dvphi"] / vphi
            Phi = (_quad_form(K, X) + np.einsum("ni,ni->n", k0, X)
                   - 2 * (mu * Q * x + c["g1"] / vphi) * xi
                   - eps * (mu / vphi) * (c["dQ"] / Q + 4 * dvp) * ze
                   + self._kappa * G ** 2 / 2 + mu ** 2 * Q * xi ** 2 / 2
                   - eps * self.consts.mu0 * h ** 2 * G ** 2 * xi ** 2 / 2)
        return U, Hf, -self.consts.rho * Phi

    def _printed_phi(self, c, X, xi, ze):
        r, b, cw = self.p.r, self.p.b, self.p.c
        nu, mu0 = self.consts.nu, self.consts.mu0
        sg = float((-1) ** r)
        x, y, z = X.T
        sa, ca = np.sin(c["alpha"]), np.cos(c["alpha"])
        ap, app, bp, dbps = c["ap"], c["app"], c["bp"], c["dbps"]
        bps = bp * sa
        beta = c["beta"]
        vphi, mu, Q, h, g1, f1, lam = c["vphi"], c["mu"], c["Q"], c["h"], c["g1"], c["f1"], c["lam"]
        a22, a33, a23 = c["a22"], c["a33"], c["a23"]
        dvp = c["dvphi"] / vphi
        G = g1 + vphi * mu * Q * x
        kp = 4 * b * cw if r == 0 else cw ** 2
        lbs = lam * beta * sa                      # printed with beta, not beta'
        dlbs = c["dlam"] * beta * sa + lam * bp * sa + lam * beta * ca * ap
        dlap = c["dlam"] * ap + lam * app
        return (-sg * h ** 2 * mu0 * G ** 2 * xi ** 2
                + (c["ddvphi"] / vphi - Q) * x ** 2 / 2
                + (c["da22"] + a22 ** 2 + a23 ** 2 - 2 * a23 * bp * ca - ap ** 2) * y ** 2 / 2
                + (c["da33"] + c["da23"] + a33 ** 2 + 2 * a23 * bp * ca - bps ** 2) * z ** 2 / 2
                + (app + 2 * ap * dvp - bp ** 2 * sa * ca) * x * y
                + (dbps + 2 * dvp * bps + ap * bp * ca) * x * z
                + (a23 - a23 * dvp + (a22 - a33) * bp * ca - ap * bp * ca) * y * z
                + 0.5 * kp * G ** 2
                + (c["df1"] + c["dvphi"] * f1 / f1 - 4 * lam * ap * bps) * x
                + (dlbs + a22 * lbs + (a23 - bp * ca) * lam * ap) * y
                + (dlap + 2 * f1 * bps + (a23 + bp * ca) * lam * bps + a33 * lam * ap) * z
                - 2 * mu * Q * x * xi - 2 * xi / vphi
                + sg * mu / vphi * (c["dmu"] / mu - dvp - sg * nu * vphi ** 2 * Q) * ze)


def build_thm45(p: Thm45Params | None = None, consts: PhysicalConstants | None = None) -> Thm45Field:
    return Thm45Field(p or Thm45Params(), consts or PhysicalConstants())


@dataclass
class Thm46Params:
    k: float = 0.7
    l: float = 0.2
    a: float = 0.4
    a1: float = 0.8
    a2: float = 0.5
    b: float = 0.3
    c: float = 0.6
    b1: float = 0.2
    c1_theta: float = 0.5   # the c1 of the theta/epsilon waves
    c1: float = 0.7         # velocity amplitude
    c2: float = 0.5         # magnetic amplitude
    r: int = 1
    as_printed: bool = False


class Thm46Field(FrameField):
    """Planar flow rotating rigidly with the frame plus a decaying wave.

    The wave part is the skew gradient of a stream function s with
    Laplacian (-1)^r a1^2 s, which is what makes the pressure explicit.
    """

    family = "thm4.6"

    def __init__(self, p: Thm46Params, consts: PhysicalConstants):
        r = _check_branch("r", p.r)
        super().__init__({k: getattr(p, k) for k in
                          ("k", "l", "a", "a1", "a2", "b", "c", "b1", "c1_theta", "c1", "c2", "r")},
                         p.as_printed)
        self.p, self.consts = p, consts
        for name in ("a1", "a2"):
            _nonzero(name, getattr(p, name))
        sg = float((-1) ** r)
        self._pro = {"alpha": Poly([p.l, p.k]), "beta": Const(0.0),
                     "f": p.c1 * exp(Poly([0.0, sg * consts.nu * p.a1 ** 2])),
                     "g": p.c2 * exp(Poly([0.0, sg * consts.eta * p.a1 ** 2]))}

    def profiles(self):
        return self._pro

    def waves(self, Y):
        """(phi, psi, xi, zeta, theta, eps) at frame ordinate Y."""
        p = self.p
        w = p.a1 * Y
        if p.r == 0:
            e, ei = np.exp(w), np.exp(-w)
            return (e - p.a * ei, e + p.a * ei, p.b * e - p.c * ei, p.b * e + p.c * ei,
                    p.b1 * e - p.c1_theta * ei, p.b1 * e + p.c1_theta * ei)
        return (np.sin(w), np.cos(w), p.c * np.sin(w + p.b), p.c * np.cos(w + p.b),
                p.c1_theta * np.sin(w + p.b1), p.c1_theta * np.cos(w + p.b1))

    def _wave(self, X):
        p = self.p
        x, y = X[:, 0], X[:, 1]
        ph, ps, xi, ze, th, ep = self.waves(y)
        a1, a2 = p.a1, p.a2
        u1 = a1 * (th + a2 * y * ph - x * ze - a1 * a2 * x ** 2 * ps)
        u2 = xi + 2 * a1 * a2 * x * ph
        return u1, u2, (ph, ps, xi, ze, th, ep)

    def frame_fields(self, c, t, X):
        p = self.p
        sg = float((-1) ** p.r)
        x, y = X[:, 0], X[:, 1]
        u1, u2, (ph, ps, xi, ze, th, ep) = self._wave(X)
        f, g = c["f"], c["g"]
        zero = np.zeros_like(x)
        U = stack3(-p.k * y + f * u1, p.k * x + f * u2, zero)
        Hf = stack3(g * u1, g * u2, zero)
        s = -x * xi - p.a1 * p.a2 * x ** 2 * ph + sg * (ep + p.a2 * (y * ps - ph / p.a1))
        lap = sg * p.a1 ** 2
        Phi = (f ** 2 * (0.5 * (u1 ** 2 + u2 ** 2) - 0.5 * lap * s ** 2)
               - 0.5 * p.k ** 2 * (x ** 2 + y ** 2) + 2 * p.k * f * s
               - 0.5 * self.consts.mu0 * g ** 2 * lap * s ** 2)
        return U, Hf, -self.consts.rho * Phi

    def fields(self, c, t, pts):
        if not self.as_printed:
            return super().fields(c, t, pts)
        p = self.p
        al = c["alpha"]
        sa, ca = np.sin(al), np.cos(al)
        X = np.stack([ca * pts[:, 0] + sa * pts[:, 1], -sa * pts[:, 0] + ca * pts[:, 1], pts[:, 2]], -1)
        x, y = X[:, 0], X[:, 1]
        u1, u2, wv = self._wave(X)
        f, g = c["f"], c["g"]
        zero = np.zeros_like(x)
        v = stack3(p.k * x * sa - p.k * y * ca - f * u2 * sa + f * u1 * ca,
                   p.k * x * ca - p.k * y * sa + f * u1 * sa + f * u2 * ca, zero)
        H = stack3(g * u1 * ca - g * u2 * sa, g * u1 * sa + g * u2 * ca, zero)
        return v, H, self._printed_p(t, x, y, wv)

    def _printed_p(self, t, x, y, wv):
        p, cs = self.p, self.consts
        ph, ps, xi, ze, th, ep = wv
        a, a1, a2, b, cc, b1, c1 = p.a, p.a1, p.a2, p.b, p.c, p.b1, p.c1_theta
        k, c2 = p.k, p.c2
        d0, d1 = (1.0, 0.0) if p.r == 0 else (0.0, 1.0)
        sg = float((-1) ** p.r)
        En = np.exp(sg * cs.nu * a1 ** 2 * t)
        Eh = np.exp(sg * cs.eta * a1 ** 2 * t)
        s2 = np.sin(a1 * y) ** 2
        e2, em2 = np.exp(2 * a1 * y), np.exp(-2 * a1 * y)
        bracket = (0.5 * (4 * b * d0 + cc * d1) * cc * x ** 2
                   + a2 * (2 * d0 * (a * b + cc) + d1 * cc * np.cos(b)) * x ** 3
                   + a1 ** 2 * a2 ** 2 * (4 * a * d0 + d1) * x ** 4 / 2
                   + a2 * (2 * d0 * (a * b - cc) + d1 * cc * np.sin(b)) * x * y
                   + (d1 * cc * c1 * np.sin(b - b1) + 2 * d0 * (b * c1 - b1 * cc)) * x
                   + a1 * a2 / 2 * (2 * d0 * (c1 - a * b1) - d1 * c1 * np.sin(b1)) * x ** 2)
        # the garbled "a_e^{...}" factor is read as a1 e^{...}
        inner = (a1 * En ** 2 * a2 * En
                 * (a1 * a2 * y * ph * ps - a2 / 2 * (a1 * (4 * a * d0 + d1) * y ** 2 + ph ** 2) + th * ze
                    - (d0 * 2 * (a * b1 + c1) + d1 * c1) * y)
                 + k * (ep + a2 * y * ps - a2 / a1 * ph))
        hydro = (-a1 ** 2 * En ** 2 * bracket + k ** 2 * x ** 2 / 2
                 - En * (a1 * a2 * ph - 2 * k) * (x * xi + a1 * a2 * En * x ** 2 * ph)
                 - sg * En ** 2 * inner - 0.5 * En ** 2 * xi ** 2 + k ** 2 * y ** 2 / 2)
        mag = (a1 * c2 * Eh * (-a1 * xi * ep + a2 * xi * ph - a1 * a2 * y * xi * ps) * x
               + (sg * a1 * xi ** 2 - 2 * a1 ** 2 * a2 * ph * ep + 2 * a1 * a2 ** 2 * ph ** 2
                  - 2 * a1 ** 2 * a2 ** 2 * y * ph * ps) * x ** 2 / 2
               + sg * a1 ** 2 * a2 * x ** 3 * xi * ph + sg * a1 ** 3 * a2 ** 2 * x ** 4 * ph ** 2 / 2
               - a1 / 2 * c2 * Eh ** 2 * (th + a2 * y * ph) ** 2
               - 2 * a1 ** 2 * a2 * c2 * Eh ** 2
               * (d0 * ((b1 * e2 - a1 * c1 * em2) / (2 * a1) - (c1 + a * b1) * y)
                  + d1 * (c1 / (2 * a1) * np.sin(b1) * s2
                          + c1 / b1 * np.cos(b1) * (a1 * y / 2 + np.sin(2 * a1 * y) / 4)))
               - 2 * a2 ** 2 * c2 * Eh ** 2
               * (d0 * (-a1 ** 2 * y ** 2 + a1 * y / 2 * (e2 - em2) - (e2 + em2) / 4)
                  - d1 * (5 / 8 * np.sin(2 * a1 * y) - s2 / 2 - a1 * y * s2 / 2 + a1 * y / 4)))
        return cs.rho * hydro + cs.mu0 * cs.rho * mag


def build_thm46(p: Thm46Params | None = None, consts: PhysicalConstants | None = None) -> Thm46Field:
    return Thm46Field(p or Thm46Params(), consts or PhysicalConstants())
