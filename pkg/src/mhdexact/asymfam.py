"""Families built on an asymmetric ansatz: a closed form, a twelve-coefficient
oscillator chain and a rotational family polynomial in x^2 + y^2."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigError, DegenerateConstants
from .fields import PhysicalConstants, SolutionField, stack3
from .ode2 import custom_basis, osc_basis, solve_forced
from .timefns import (Const, Integral, TimeProfile, TrigExp, as_profile, bernoulli_alpha, exp,
                      parse_profile, t_profile)

DEGENERATE = 1e-10
MAX_DEGREE = 16


def _nonzero(name: str, v: float):
    if abs(v) < DEGENERATE:
        raise DegenerateConstants(f"{name} = {v!r} is within {DEGENERATE} of zero")


def _prof(x, default) -> TimeProfile:
    if x is None:
        x = default
    if isinstance(x, str):
        return parse_profile(x)
    return as_profile(x)


# --------------------------------------------------------------------------
# closed form
# --------------------------------------------------------------------------

@dataclass
class Thm31Params:
    h: TimeProfile | str | float | None = None
    beta: TimeProfile | str | float | None = None
    a: float = 1.0
    b: float = 0.5
    c: float = 0.3
    s: float = 0.7
    as_printed: bool = False


class Thm31Field(SolutionField):
    family = "thm3.1"

    def __init__(self, p: Thm31Params, consts: PhysicalConstants):
        super().__init__(vars(p), p.as_printed)
        _nonzero("a", p.a)
        self.p, self.consts = p, consts
        h = _prof(p.h, "(trigexp 0.2 0 1 0 sin)")
        beta = _prof(p.beta, "(sum (const 0.3) (trigexp 0.1 0 2 0 cos))")
        a, b = p.a, p.b
        r = beta - h * a
        growth = exp(Integral(r * 2.0))
        inner = Integral(1 / growth) * ((2 * a - b) * p.s) + p.c
        q = growth * inner
        self._pr = {"beta": beta, "dbeta": beta.d(), "h": h, "dh": h.d(), "q": q}

    def profiles(self):
        return self._pr

    def fields(self, c, t, pts):
        a, b, s = self.p.a, self.p.b, self.p.s
        x, y, z = pts.T
        be, h, q = c["beta"], c["h"], c["q"]
        r = be - a * h
        v = stack3(a * s * y * z + r * x, -be * y, a * h * z)
        H = stack3(a * y * z * q + (b / 2 - a) * x, -b / 2 * y, a * z)
        mu0 = self.consts.mu0
        phi = ((c["dbeta"] - a * c["dh"] + r ** 2) * x ** 2 / 2 + (-c["dbeta"] + be ** 2) * y ** 2 / 2
               + a * (c["dh"] + a * h ** 2) * z ** 2 / 2
               - mu0 * q ** 2 * a ** 2 * z ** 2 * y ** 2 / 2 - mu0 * q * a * (b / 2 - a) * x * y * z)
        return v, H, -self.consts.rho * phi


def build_thm31(p: Thm31Params, consts: PhysicalConstants | None = None) -> Thm31Field:
    return Thm31Field(p, consts or PhysicalConstants())


# --------------------------------------------------------------------------
# twelve-coefficient chain
# --------------------------------------------------------------------------

_L_NAMES = ("C1", "C2", "D1", "D2", "F1", "F2", "G1", "G2", "H1", "H2")


@dataclass
class Thm32Params:
    beta: TimeProfile | str | float | None = None
    l: TimeProfile | str | float | None = None
    a: float = 1.0
    b: float = 0.6
    q: float = 0.4
    E: float = 0.2
    k: float = 0.3
    consts: Mapping[str, float] = field(default_factory=dict)   # l_C1 ... l_H2
    as_printed: bool = False

    def lconst(self, name: str) -> float:
        defaults = {"C1": 0.3, "C2": -0.2, "D1": 0.25, "D2": 0.1, "F1": 0.2, "F2": -0.1,
                    "G1": 0.15, "G2": 0.05, "H1": -0.2, "H2": 0.1}
        unknown = set(self.consts) - set(_L_NAMES)
        if unknown:
            raise ConfigError(f"unknown free constants {sorted(unknown)}; expected {_L_NAMES}")
        return float(self.consts.get(name, defaults[name]))


class Thm32Field(SolutionField):
    family = "thm3.2"

    def __init__(self, p: Thm32Params, consts: PhysicalConstants):
        super().__init__({"a": p.a, "b": p.b, "q": p.q, "E": p.E, "k": p.k}, p.as_printed)
        self.p, self.consts = p, consts
        a, b, q, E = p.a, p.b, p.q, p.E
        for name, v in (("a", a), ("b", b), ("q", q), ("b/2+a", b / 2 + a), ("b/2-a", b / 2 - a)):
            _nonzero(name, v)
        mu0, nu, eta = consts.mu0, consts.nu, consts.eta
        pr = p.as_printed
        beta = _prof(p.beta, "(sum (const 0.2) (trigexp 0.1 0 1.5 0 sin))")
        l = _prof(p.l, "(sum (const 0.3) (trigexp 0.1 0 1 0 cos))")
        lc = p.lconst
        Ib = Integral(beta)
        tt = t_profile()
        m = (l * (beta - q) - l.d()) / a            # h l - l'/a with h = (beta - q)/a

        lamC = q ** 2 - (1.5 * b - a) * (b / 2 + a) * mu0
        bC = osc_basis(lamC, exp(Ib * 2.0))
        C = solve_forced(bC, 0.0, lc("C1"), lc("C2"))
        I = (C.d() - (beta * 2.0 - q) * C) / ((b / 2 + a) * mu0)

        lamD = q ** 2 + (b / 2 - 3 * a) * (b / 2 + a) * mu0
        envD = exp((Ib + q * tt) * -2.0) if pr else exp((Ib - q * tt) * -2.0)
        bD = osc_basis(lamD, envD)
        D = solve_forced(bD, 0.0, lc("D1"), lc("D2"))
        J = -(D.d() + (beta * 2.0 - q) * D) / ((b / 2 + a) * mu0)

        K = TrigExp(p.k, 2 * q) + (b - 2 * a) * E / (2 * q)

        S = m * E + K * l * mu0
        midF = Const(2 * q) if pr else beta + q
        fF = -S.d() + midF * S - (m * K - l * E) * (a * mu0)
        lamF = q ** 2 - (b - a) * a * mu0
        bF = osc_basis(lamF, exp(Ib))
        F = solve_forced(bF, fF, lc("F1"), lc("F2"))
        if pr:
            L = ((m * a + (a * (b - 2 * a) / (2 * q))) * E / a + TrigExp(p.k, 2 * q)
                 + F.d() - (beta - q) * F) / (a * mu0)
        else:
            L = (F.d() - (beta - q) * F + S) / (a * mu0)

        T = m * D * 2.0 + l * J * (2 * mu0)
        fG = -T.d() - (beta - 2 * q) * T + (m * J - l * D) * (b * mu0)
        lamG = q ** 2 + (b / 2) * (b / 2 - 2 * a) * mu0
        bG = osc_basis(lamG, exp((Ib - q * tt) * -1.0))
        G = solve_forced(bG, fG, lc("G1"), lc("G2"))
        if pr:
            dterm = D * (beta - q - l.d()) * (2 / a) - l * (D.d() + (beta * 2.0 - q) * D) * (2 / (b / 2 + a))
            M = (dterm + G.d() + beta * G) * (-2 / mu0)
        else:
            M = (G.d() + beta * G + T) * (-2 / (b * mu0))

        R = m * G - (C + E) * (2 * nu) + l * M * mu0
        fH = -R.d() + q * R + (m * M - (I + J) * (2 * eta) - l * G) * ((b / 2 - a) * mu0)
        lamH = q ** 2 + ((b / 2 - a) * mu0 ** 2 if pr else (b / 2 - a) ** 2 * mu0)
        bH = osc_basis(lamH)
        Hc = solve_forced(bH, fH, lc("H1"), lc("H2"))
        N = -(Hc.d() + q * Hc + R) / ((b / 2 - a) * mu0)

        self.lams = {"C": lamC, "D": lamD, "F": lamF, "G": lamG, "H": lamH}
        self.chain = {"C": C, "D": D, "F": F, "G": G, "H": Hc, "I": I, "J": J, "K": K,
                      "L": L, "M": M, "N": N}
        self._pr = dict(self.chain)
        self._pr.update({"beta": beta, "dbeta": beta.d(), "l": l, "dl": l.d(), "ddl": l.d().d(),
                         "m": m, "dC": C.d(), "dD": D.d(), "dF": F.d(), "dG": G.d(), "dH": Hc.d()})

    def profiles(self):
        return self._pr

    def fields(self, c, t, pts):
        p = self.p
        a, b, q, E = p.a, p.b, p.q, p.E
        x, y, z = pts.T
        C, D, F, G, Hc = c["C"], c["D"], c["F"], c["G"], c["H"]
        I, J, K, L, M, N = c["I"], c["J"], c["K"], c["L"], c["M"], c["N"]
        be, l, m = c["beta"], c["l"], c["m"]
        f = C * y ** 2 + D * z ** 2 + E * y * z + F * y + G * z + Hc
        g = I * y ** 2 + J * z ** 2 + K * y * z + L * y + M * z + N
        v = stack3(f + q * x, -be * y, (be - q) * z + m)
        H = stack3(g + (b / 2 - a) * x, -b / 2 * y, a * z + l)
        phi = self._printed_phi(c, x, y, z) if self.as_printed else self._phi(c, x, y, z)
        return v, H, -self.consts.rho * phi

    def _phi(self, c, x, y, z):
        p = self.p
        a, b, q, E = p.a, p.b, p.q, p.E
        mu0, nu = self.consts.mu0, self.consts.nu
        C, D, G, Hc = c["C"], c["D"], c["G"], c["H"]
        I, J, K, L, M, N = c["I"], c["J"], c["K"], c["L"], c["M"], c["N"]
        be, dbe, l, dl, ddl = c["beta"], c["dbeta"], c["l"], c["dl"], c["ddl"]
        F, dC, dD, dF, dG, dH = c["F"], c["dC"], c["dD"], c["dF"], c["dG"], c["dH"]
        terms = [
            (q ** 2 / 2, x ** 2),
            ((dC + (q - 2 * be) * C + 2 * (a - b) * mu0 * I) / 3, x * y ** 2),
            (mu0 * (2 * a - b) * K / 2, x * y * z),
            ((E * (be - q) * l - E * dl + a * a * mu0 * L - a * b * mu0 * L + a * mu0 * K * l
              + a * (q - be) * F + a * dF) / (2 * a), x * y),
            ((dD + (2 * be - q) * D + (4 * a - b) * mu0 * J) / 3, x * z ** 2),
            (-(-4 * a * a * mu0 * M + a * b * mu0 * M - 4 * a * mu0 * J * l - 2 * a * G * be
               - 2 * a * dG + 4 * (q - be) * D * l + 4 * D * dl) / (4 * a), x * z),
            ((a * mu0 * M * l - 2 * a * nu * (C + D) + a * q * Hc + a * dH
              + (be - q) * G * l - G * dl) / a, x),
            (-mu0 * I ** 2 / 2, y ** 4),
            (-mu0 * I * K, y ** 3 * z),
            (-mu0 * I * L, y ** 3),
            (-mu0 * (2 * I * J + K ** 2) / 2, y ** 2 * z ** 2),
            (-mu0 * (I * M + K * L), y ** 2 * z),
            (-(2 * mu0 * I * N + mu0 * L ** 2 - be ** 2 + dbe) / 2, y ** 2),
            (-mu0 * J * K, y * z ** 3),
            (-mu0 * (J * L + K * M), y * z ** 2),
            (-mu0 * (K * N + L * M), y * z),
            (-mu0 * L * N, y),
            (-mu0 * J ** 2 / 2, z ** 4),
            (-mu0 * J * M, z ** 3),
            ((-2 * mu0 * J * N - mu0 * M ** 2 + (be - q) ** 2 + dbe) / 2, z ** 2),
            ((-a * mu0 * M * N + (be - q) ** 2 * l + l * dbe - ddl) / a, z),
        ]
        return sum(co * mono for co, mono in terms)

    def _printed_phi(self, c, x, y, z):
        p = self.p
        a, b, q = p.a, p.b, p.q
        mu0, nu = self.consts.mu0, self.consts.nu
        C, D, G, Hc = c["C"], c["D"], c["G"], c["H"]
        I, J, K, L, M, N = c["I"], c["J"], c["K"], c["L"], c["M"], c["N"]
        be, dbe, l, dl, ddl = c["beta"], c["dbeta"], c["l"], c["dl"], c["ddl"]
        dH = c["dH"]
        w = b / 2 - a
        terms = [
            (q ** 2 / 2, x ** 2),
            (dH + q * Hc + ((be - q) * l - dl) / a * G + mu0 * l * M - 2 * nu * (C + D), x),
            (-mu0 / 2 * I ** 2, y ** 4),
            (-mu0 * I * L, y ** 3),
            ((-dbe + be ** 2 - mu0 * (2 * I * N + L ** 2)) / 2, y ** 2),
            (-mu0 * L * N, y),
            (-mu0 / 2 * J ** 2, z ** 4),
            (-mu0 * J * M, z ** 3),
            (dbe + (be - q) ** 2 - mu0 * (2 * J * N + M ** 2), z ** 2),
            (-mu0 * M * N + (dbe * l + (be - q) * dl - ddl) / a + (be - q) / a * ((be - q) * l - dl), z),
            (-w * mu0 * K, x * y * z),
            (-(b - 2 * a) / 2 * mu0 * I, x * y ** 2),
            (-w * mu0 * L, x * y),
            (-w * mu0 * J, x * z ** 2),
            (-w * mu0 * M, x * z),
            (-mu0 * K * J, y * z ** 3),
            (-mu0 * K * I, y ** 3 * z),
            (-mu0 / 2 * (2 * I * J + K ** 2), y ** 2 * z ** 2),
            (-mu0 * (J * L + K * M), y * z ** 2),
            (-mu0 * (K * L + I * M), y ** 2 * z),
            (-mu0 * (K * N + L * M), y * z),
        ]
        return sum(co * mono for co, mono in terms)


def build_thm32(p: Thm32Params, consts: PhysicalConstants | None = None) -> Thm32Field:
    return Thm32Field(p, consts or PhysicalConstants())


# --------------------------------------------------------------------------
# rotational polynomial family
# --------------------------------------------------------------------------

@dataclass
class Thm33Params:
    b: float = 0.6
    k: float = 1.0
    l: float = -0.5
    n: int = 1
    lconsts: Mapping = field(default_factory=dict)   # {(m, j): value}, j in {1, 2}
    qconsts: Mapping = field(default_factory=dict)
    max_degree: int = MAX_DEGREE
    as_printed: bool = False

    def free(self, which: str, m: int, j: int) -> float:
        src = self.lconsts if which == "l" else self.qconsts
        key = (m, j)
        if key in src:
            return float(src[key])
        if f"{m},{j}" in src:
            return float(src[f"{m},{j}"])
        base = 0.2 if which == "l" else 0.15
        return base * (1.0 if j == 1 else -0.5) / (m + 1)


def _ipow(p: TimeProfile, n: int) -> TimeProfile:
    out = Const(1.0)
    for _ in range(n):
        out = out * p
    return out


def _poly_mul(a: list, b: list) -> list:
    out = [None] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = x * y if out[i + j] is None else out[i + j] + x * y
    return out


def _polyval(coeffs, w):
    out = np.zeros_like(w)
    for c in reversed(coeffs):
        out = out * w + c
    return out


class Thm33Field(SolutionField):
    family = "thm3.3"

    def __init__(self, p: Thm33Params, consts: PhysicalConstants):
        super().__init__({"b": p.b, "k": p.k, "l": p.l, "n": p.n}, p.as_printed)
        self.p, self.consts = p, consts
        _nonzero("b", p.b)
        if not (isinstance(p.n, (int, np.integer)) and p.n >= 1):
            raise ConfigError("degree n must be a positive integer")
        if p.n > p.max_degree:
            raise ConfigError(f"degree n = {p.n} exceeds the cap {p.max_degree}")
        n, b, k, l = int(p.n), p.b, p.k, p.l
        mu0, nu, eta = consts.mu0, consts.nu, consts.eta
        pr = p.as_printed
        alpha = bernoulli_alpha(k, l)
        y = TrigExp(1.0, k / 2) - TrigExp(2 * k * l, -k / 2)
        g = y.d() / y
        a_: list = [None] * (n + 2)
        c_: list = [None] * (n + 2)
        f_: list = [None] * (n + 2)
        g_: list = [None] * (n + 2)
        a_[n + 1] = c_[n + 1] = f_[n + 1] = g_[n + 1] = Const(0.0)
        self.lams: dict = {}
        for m in range(n, -1, -1):
            a1, c1, f1, g1 = a_[m + 1], c_[m + 1], f_[m + 1], g_[m + 1]
            lam = k * k / 4 - m * (m + 1) * b * b * mu0
            if pr:
                env = TrigExp(1.0, m * k) * y
                Fm = (alpha * a1 * (m * nu) + a1.d() * nu + c1 * eta) * (4 * (m + 1) * (m + 2))
            else:
                env = _ipow(y, 2 * m + 1)
                Fm = (a1.d() * nu + alpha * a1 * (m * nu) - c1 * (eta * (m + 1) * b * mu0)) \
                    * (4 * (m + 1) * (m + 2))
            am = solve_forced(osc_basis(lam, env), Fm, p.free("l", m, 1), p.free("l", m, 2))
            if pr:
                cm = -(am.d() + alpha * am * (m + 1) + a1 * (4 * nu * (m + 1) * (m + 2))) / (b * mu0 * (m + 1))
            else:
                cm = (a1 * (4 * nu * (m + 1) * (m + 2)) - am.d() - alpha * am * (m + 1)) / (b * mu0 * (m + 1))

            if pr:
                tau = k * k / 4 - (m * m - 1) * b * b * mu0
                basis = osc_basis(tau, TrigExp(1.0, m * k) * y)
                Gm = (alpha * f1 * ((m - 1) * eta) + f1.d() * eta + g1 * nu) * (4 * (m + 1) ** 2)
            else:
                tau = k * k - (m * m - 1) * b * b * mu0
                psi = osc_basis(tau)
                env = _ipow(y, 2 * m)
                basis = custom_basis(env * (psi.xi1.d() - g * psi.xi1), env * (psi.xi2.d() - g * psi.xi2), tau)
                Gm = (f1.d() * eta + alpha * f1 * ((m - 1) * eta) + g1 * (nu * b * (m + 1))) \
                    * (4 * (m + 1) ** 2)
            fm = solve_forced(basis, Gm, p.free("q", m, 1), p.free("q", m, 2))
            mult = m if pr else m + 1
            gm = (fm.d() + alpha * fm * mult - f1 * (4 * eta * (m + 1) ** 2)) / (b * (m + 1))
            a_[m], c_[m], f_[m], g_[m] = am, cm, fm, gm
            self.lams[m] = (lam, tau)
        self.a, self.c, self.f, self.g = a_[:n + 1], c_[:n + 1], f_[:n + 1], g_[:n + 1]
        self.alpha = alpha
        self._pr = {"alpha": alpha, "dalpha": alpha.d()}
        for m in range(n + 1):
            self._pr.update({f"a{m}": self.a[m], f"c{m}": self.c[m], f"f{m}": self.f[m], f"g{m}": self.g[m]})

    def profiles(self):
        return self._pr

    def fields(self, c, t, pts):
        n, b = self.p.n, self.p.b
        mu0 = self.consts.mu0
        x, y, z = pts.T
        w = x * x + y * y
        al, dal = c["alpha"], c["dalpha"]
        A = [c[f"a{m}"] for m in range(n + 1)]
        Cc = [c[f"c{m}"] for m in range(n + 1)]
        Ff = [c[f"f{m}"] for m in range(n + 1)]
        Gg = [c[f"g{m}"] for m in range(n + 1)]
        phi, xi, sig, psi = (_polyval(s, w) for s in (A, Cc, Ff, Gg))
        v = stack3(al / 2 * x + y * phi, al / 2 * y - x * phi, -al * z + psi)
        H = stack3(b / 2 * x + y * xi, b / 2 * y - x * xi, -b * z + sig)
        # polynomial antiderivatives in w, constant 0
        phi2 = _poly_mul(A, A)
        int_phi2 = _polyval([0.0] + [cf / (i + 1) for i, cf in enumerate(phi2)], w)
        dxi = [Cc[i] * i for i in range(1, n + 1)] or [np.zeros_like(w)]
        xxw = [np.zeros_like(w)] + _poly_mul(Cc, dxi)           # w * xi * xi_w
        int_xxw = _polyval([0.0] + [cf / (i + 1) for i, cf in enumerate(xxw)], w)
        if self.as_printed:
            Phi = ((dal + al ** 2) / 2 * w + (2 * al ** 2 - dal) * z ** 2 / 2 + b * mu0 * z * sig
                   - int_phi2 / 2 - xi ** 2 + int_xxw)
        else:
            Phi = ((dal / 2 + al ** 2 / 4) * w / 2 + (al ** 2 - dal) * z ** 2 / 2 + b * mu0 * z * sig
                   - int_phi2 / 2 - mu0 * (w * xi ** 2 - int_xxw) - mu0 * sig ** 2 / 2)
        return v, H, -self.consts.rho * Phi


def build_thm33(p: Thm33Params, consts: PhysicalConstants | None = None) -> Thm33Field:
    return Thm33Field(p, consts or PhysicalConstants())
