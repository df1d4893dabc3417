"""Time profiles: scalar functions of t with exact derivatives.

A profile is an immutable expression tree.  Evaluation propagates truncated
Taylor series ("jets") through the tree, so every composite built from the
closed-form kinds has exact derivatives of any order.  Definite integrals from
the anchor t0 = 0 are tabulated once, at construction, as piecewise Chebyshev
antiderivatives; their higher Taylor coefficients come from the integrand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy import integrate as _spi

from .errors import (ConfigError, DomainViolation, MaxRefinementExceeded,
                     OrderUnsupported, PoleProximity)

POLE_GUARD = 1e-8
DEFAULT_TOL = 1e-10
DEFAULT_WINDOW = (-2.0, 4.0)
MAX_ORDER = 8


# --------------------------------------------------------------------------
# Taylor jets
# --------------------------------------------------------------------------

class Jet:
    """Truncated Taylor series c[k] = f^(k)(t)/k!, vectorised over t.

    ``c`` has shape (n+1, N).
    """

    __slots__ = ("c",)

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)

    @property
    def n(self) -> int:
        return self.c.shape[0] - 1

    @classmethod
    def const(cls, value, n: int, size: int) -> "Jet":
        c = np.zeros((n + 1, size))
        c[0] = value
        return cls(c)

    def trunc(self, n: int) -> "Jet":
        return self if n == self.n else Jet(self.c[: n + 1])

    def derivs(self) -> np.ndarray:
        fact = np.array([math.factorial(k) for k in range(self.n + 1)], dtype=float)
        return self.c * fact[:, None]

    def d(self) -> "Jet":
        k = np.arange(1, self.n + 1, dtype=float)[:, None]
        return Jet(self.c[1:] * k)

    def _pair(self, other):
        if isinstance(other, Jet):
            n = min(self.n, other.n)
            return self.c[: n + 1], other.c[: n + 1]
        return self.c, None

    def __add__(self, other):
        a, b = self._pair(other)
        if b is None:
            out = a.copy()
            out[0] = out[0] + other
            return Jet(out)
        return Jet(a + b)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._pair(other)
        if b is None:
            return Jet(a * other)
        n = a.shape[0] - 1
        out = np.empty_like(a)
        for k in range(n + 1):
            out[k] = np.einsum("i...,i...->...", a[: k + 1], b[k::-1])
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        a, b = self._pair(other)
        n = a.shape[0] - 1
        q = np.empty_like(a)
        for k in range(n + 1):
            s = a[k].copy()
            for i in range(1, k + 1):
                s -= b[i] * q[k - i]
            q[k] = s / b[0]
        return Jet(q)

    def __rtruediv__(self, other):
        return Jet.const(other, self.n, self.c.shape[1]) / self

    def exp(self) -> "Jet":
        a = self.c
        e = np.empty_like(a)
        e[0] = np.exp(a[0])
        for k in range(1, a.shape[0]):
            e[k] = sum(i * a[i] * e[k - i] for i in range(1, k + 1)) / k
        return Jet(e)

    def log(self) -> "Jet":
        a = self.c
        out = np.empty_like(a)
        out[0] = np.log(a[0])
        for k in range(1, a.shape[0]):
            s = a[k] - sum(i * out[i] * a[k - i] for i in range(1, k)) / k
            out[k] = s / a[0]
        return Jet(out)

    def sincos(self) -> tuple["Jet", "Jet"]:
        a = self.c
        s = np.empty_like(a)
        c = np.empty_like(a)
        s[0] = np.sin(a[0])
        c[0] = np.cos(a[0])
        for k in range(1, a.shape[0]):
            s[k] = sum(i * a[i] * c[k - i] for i in range(1, k + 1)) / k
            c[k] = -sum(i * a[i] * s[k - i] for i in range(1, k + 1)) / k
        return Jet(s), Jet(c)

    def pow(self, p: float) -> "Jet":
        a = self.c
        y = np.empty_like(a)
        y[0] = a[0] ** p
        for k in range(1, a.shape[0]):
            s = sum((p * i - (k - i)) * a[i] * y[k - i] for i in range(1, k + 1))
            y[k] = s / (k * a[0])
        return Jet(y)


# --------------------------------------------------------------------------
# Profile tree
# --------------------------------------------------------------------------

def _as_t(t) -> tuple[np.ndarray, bool]:
    arr = np.asarray(t, dtype=float)
    return np.atleast_1d(arr).ravel(), arr.ndim == 0


def as_profile(x) -> "TimeProfile":
    if isinstance(x, TimeProfile):
        return x
    if isinstance(x, (int, float, np.floating, np.integer)):
        return Const(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to a TimeProfile")


def _fmt(x: float) -> str:
    return repr(float(x))


class TimeProfile:
    """Base class.  Subclasses implement ``_jet(t, n, memo)``."""

    kind = "abstract"

    # evaluation ---------------------------------------------------------
    def jet(self, t, n: int = 0) -> Jet:
        tt, _ = _as_t(t)
        return self._get(tt, n, {})

    def _get(self, t: np.ndarray, n: int, memo: dict) -> Jet:
        key = id(self)
        hit = memo.get(key)
        if hit is not None and hit.n >= n:
            return hit.trunc(n)
        out = self._jet(t, n, memo)
        memo[key] = out
        return out

    def _jet(self, t: np.ndarray, n: int, memo: dict) -> Jet:
        raise NotImplementedError

    def __call__(self, t, order: int = 0):
        tt, scalar = _as_t(t)
        val = self._get(tt, order, {}).derivs()[order]
        return float(val[0]) if scalar else val.reshape(np.shape(t))

    def value(self, t):
        return self(t, 0)

    # structure ------------------------------------------------------------
    def children(self) -> Sequence["TimeProfile"]:
        return ()

    def has_integral(self) -> bool:
        return any(c.has_integral() for c in self.children())

    def is_zero(self) -> bool:
        return False

    def to_expr(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"TimeProfile({self.to_expr()})"

    # algebra --------------------------------------------------------------
    def __add__(self, other):
        other = as_profile(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        return Sum(self, other)

    def __radd__(self, other):
        return as_profile(other) + self

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-as_profile(other))

    def __rsub__(self, other):
        return as_profile(other) + (-self)

    def __mul__(self, other):
        other = as_profile(other)
        if self.is_zero() or other.is_zero():
            return Const(0.0)
        if isinstance(other, Const) and other.c == 1.0:
            return self
        if isinstance(self, Const) and self.c == 1.0:
            return other
        if isinstance(self, Const) and isinstance(other, Const):
            return Const(self.c * other.c)
        return Product(self, other)

    def __rmul__(self, other):
        return as_profile(other) * self

    def __truediv__(self, other):
        other = as_profile(other)
        if isinstance(other, Const):
            if other.c == 0.0:
                raise ZeroDivisionError("division of a profile by the constant 0")
            return self * (1.0 / other.c)
        if self.is_zero():
            return Const(0.0)
        return Quotient(self, other)

    def __rtruediv__(self, other):
        return Quotient(as_profile(other), self)

    def __pow__(self, p):
        return Func("pow", self, float(p))

    def d(self) -> "TimeProfile":
        """Derivative profile."""
        if isinstance(self, (Const,)):
            return Const(0.0)
        return Deriv(self)


class Const(TimeProfile):
    kind = "constant"

    def __init__(self, c: float):
        self.c = float(c)

    def _jet(self, t, n, memo):
        return Jet.const(self.c, n, t.size)

    def is_zero(self):
        return self.c == 0.0

    def to_expr(self):
        return f"(const {_fmt(self.c)})"


class Poly(TimeProfile):
    """sum_k coeffs[k] t^k"""

    kind = "polynomial"

    def __init__(self, coeffs: Iterable[float]):
        self.coeffs = np.array(list(coeffs), dtype=float)
        if self.coeffs.size == 0:
            self.coeffs = np.zeros(1)

    def _jet(self, t, n, memo):
        out = np.zeros((n + 1, t.size))
        c = self.coeffs
        fact = 1.0
        for k in range(n + 1):
            if c.size == 0:
                break
            out[k] = P.polyval(t, c) / fact
            c = P.polyder(c) if c.size > 1 else np.zeros(0)
            fact *= k + 1
        return Jet(out)

    def is_zero(self):
        return not np.any(self.coeffs)

    def to_expr(self):
        return "(poly " + " ".join(_fmt(x) for x in self.coeffs) + ")"


class TrigExp(TimeProfile):
    """c * exp(a t) * cos(b t + phase)   (or sin)"""

    kind = "trig-exp"

    def __init__(self, c: float, a: float, b: float = 0.0, phase: float = 0.0,
                 fn: str = "cos"):
        if fn not in ("cos", "sin"):
            raise ConfigError("trigexp function must be 'cos' or 'sin'")
        self.c, self.a, self.b, self.phase, self.fn = float(c), float(a), float(b), float(phase), fn

    def _jet(self, t, n, memo):
        z = complex(self.a, self.b)
        base = self.c * np.exp(z * t + 1j * self.phase)
        out = np.empty((n + 1, t.size))
        zk = 1.0 + 0j
        for k in range(n + 1):
            v = base * zk / math.factorial(k)
            out[k] = v.real if self.fn == "cos" else v.imag
            zk *= z
        return Jet(out)

    def is_zero(self):
        return self.c == 0.0

    def to_expr(self):
        return (f"(trigexp {_fmt(self.c)} {_fmt(self.a)} {_fmt(self.b)} "
                f"{_fmt(self.phase)} {self.fn})")


class Sum(TimeProfile):
    kind = "sum"

    def __init__(self, *terms):
        flat = []
        for t in terms:
            t = as_profile(t)
            flat.extend(t.terms if isinstance(t, Sum) else [t])
        self.terms = tuple(flat)

    def children(self):
        return self.terms

    def _jet(self, t, n, memo):
        acc = Jet(np.zeros((n + 1, t.size)))
        for term in self.terms:
            acc = acc + term._get(t, n, memo)
        return acc

    def to_expr(self):
        return "(sum " + " ".join(x.to_expr() for x in self.terms) + ")"


class Product(TimeProfile):
    kind = "product"

    def __init__(self, *factors):
        flat = []
        for f in factors:
            f = as_profile(f)
            flat.extend(f.factors if isinstance(f, Product) else [f])
        self.factors = tuple(flat)

    def children(self):
        return self.factors

    def _jet(self, t, n, memo):
        acc = None
        for f in self.factors:
            j = f._get(t, n, memo)
            acc = j if acc is None else acc * j
        return acc

    def to_expr(self):
        return "(prod " + " ".join(x.to_expr() for x in self.factors) + ")"


class Quotient(TimeProfile):
    """num/den.  ``poles`` lists known zeros of den; without it the guard uses
    the Newton distance |den/den'| as the estimate of the nearest zero."""

    kind = "quotient"

    def __init__(self, num, den, poles: Sequence[float] | None = None):
        self.num, self.den = as_profile(num), as_profile(den)
        self.poles = None if poles is None else tuple(float(p) for p in poles)

    def children(self):
        return (self.num, self.den)

    def _guard(self, t, dj: Jet):
        if self.poles is not None:
            for p in self.poles:
                if np.any(np.abs(t - p) < POLE_GUARD):
                    raise PoleProximity(f"t within {POLE_GUARD:g} of pole {p!r}")
            if np.any(dj.c[0] == 0.0):
                raise PoleProximity("denominator vanishes")
            return
        d0 = np.abs(dj.c[0])
        if np.any(d0 == 0.0):
            raise PoleProximity("denominator vanishes")
        if dj.n >= 1:
            d1 = np.abs(dj.c[1])
            with np.errstate(divide="ignore"):
                dist = np.where(d1 > 0, d0 / np.where(d1 > 0, d1, 1.0), np.inf)
            if np.any(dist < POLE_GUARD):
                raise PoleProximity(f"denominator root within {POLE_GUARD:g}")

    def _jet(self, t, n, memo):
        dj = self.den._get(t, max(n, 1), memo)
        self._guard(t, dj)
        return self.num._get(t, n, memo) / dj.trunc(n)

    def to_expr(self):
        return f"(quot {self.num.to_expr()} {self.den.to_expr()})"


class Func(TimeProfile):
    """Elementary function of a profile: exp, log, sin, cos, sqrt, pow."""

    kind = "function"
    NAMES = ("exp", "log", "sin", "cos", "sqrt", "pow")

    def __init__(self, name: str, arg, param: float | None = None):
        if name not in self.NAMES:
            raise ConfigError(f"unknown function {name!r}")
        self.name, self.arg = name, as_profile(arg)
        self.param = None if param is None else float(param)

    def children(self):
        return (self.arg,)

    def _jet(self, t, n, memo):
        a = self.arg._get(t, n, memo)
        if self.name == "exp":
            return a.exp()
        if self.name == "sin":
            return a.sincos()[0]
        if self.name == "cos":
            return a.sincos()[1]
        if self.name == "log":
            if np.any(a.c[0] <= 0):
                raise DomainViolation("log of a non-positive profile value")
            return a.log()
        p = 0.5 if self.name == "sqrt" else self.param
        integer = float(p).is_integer()
        if integer and p >= 0:
            out = Jet.const(1.0, n, t.size)
            for _ in range(int(p)):
                out = out * a
            return out
        if not integer and np.any(a.c[0] < 0):
            raise DomainViolation(f"{self.name} of a negative profile value")
        if np.any(np.abs(a.c[0]) < POLE_GUARD ** 2):
            raise PoleProximity(f"{self.name} of a profile value near zero")
        return a.pow(p)

    def to_expr(self):
        if self.name == "pow":
            return f"(pow {self.arg.to_expr()} {_fmt(self.param)})"
        return f"({self.name} {self.arg.to_expr()})"


class Deriv(TimeProfile):
    kind = "derivative"

    def __init__(self, arg):
        self.arg = as_profile(arg)

    def children(self):
        return (self.arg,)

    def _jet(self, t, n, memo):
        return self.arg._get(t, n + 1, memo).d()

    def to_expr(self):
        return f"(deriv {self.arg.to_expr()})"


class Guard(TimeProfile):
    """Passes ``inner`` through, raising DomainViolation where ``test`` <= floor."""

    kind = "guard"

    def __init__(self, inner, test, floor: float, message: str):
        self.inner, self.test = as_profile(inner), as_profile(test)
        self.floor, self.message = float(floor), message

    def children(self):
        return (self.inner, self.test)

    def _jet(self, t, n, memo):
        if np.any(self.test._get(t, 0, memo).c[0] <= self.floor):
            raise DomainViolation(self.message)
        return self.inner._get(t, n, memo)

    def to_expr(self):
        return self.inner.to_expr()


# --------------------------------------------------------------------------
# Definite integral with an eager cumulative table
# --------------------------------------------------------------------------

_PANEL_DEG = 20
_MAX_PANELS = 4000


@dataclass(frozen=True)
class _CumTable:
    edges: np.ndarray       # (P+1,)
    coef: np.ndarray        # (P, deg+2) Chebyshev antiderivative per panel
    offset: np.ndarray      # (P,) value of the integral at each left edge

    @property
    def lo(self):
        return self.edges[0]

    @property
    def hi(self):
        return self.edges[-1]

    def __call__(self, t: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, len(self.offset) - 1)
        a, b = self.edges[idx], self.edges[idx + 1]
        x = (2.0 * t - (a + b)) / (b - a)
        cf = self.coef[idx]
        # Clenshaw, vectorised over points with per-point coefficient rows
        b1 = np.zeros_like(x)
        b2 = np.zeros_like(x)
        for k in range(cf.shape[1] - 1, 0, -1):
            b1, b2 = 2.0 * x * b1 - b2 + cf[:, k], b1
        return self.offset[idx] + x * b1 - b2 + cf[:, 0]


def _fit_panel(f, a: float, b: float, rtol: float, out: list, budget: list):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    coef = C.chebinterpolate(lambda x: f(mid + half * x), _PANEL_DEG)
    if not np.all(np.isfinite(coef)):
        raise MaxRefinementExceeded("non-finite integrand")
    scale = max(np.max(np.abs(coef)), 1e-300)
    if np.max(np.abs(coef[-3:])) <= rtol * scale:
        anti = C.chebint(coef, lbnd=-1.0) * half
        out.append((a, b, anti))
        return
    budget[0] -= 1
    if budget[0] <= 0 or half < 1e-9:
        raise MaxRefinementExceeded("cumulative table refinement budget exhausted")
    _fit_panel(f, a, mid, rtol, out, budget)
    _fit_panel(f, mid, b, rtol, out, budget)


def _build_table(f, anchor: float, window: tuple[float, float], rtol: float) -> _CumTable | None:
    lo, hi = window
    lo, hi = min(lo, anchor), max(hi, anchor)
    budget = [_MAX_PANELS]
    pieces: list = []

    def sweep(edges):
        got = []
        for a, b in zip(edges[:-1], edges[1:]):
            a, b = min(a, b), max(a, b)
            part: list = []
            try:
                _fit_panel(f, a, b, rtol, part, budget)
            except (MaxRefinementExceeded, PoleProximity, DomainViolation,
                    FloatingPointError, ZeroDivisionError):
                break
            got.append(part)
        return got

    m = 8
    right = sweep(np.linspace(anchor, hi, m + 1)) if hi > anchor else []
    left = sweep(np.linspace(anchor, lo, m + 1)) if lo < anchor else []
    for part in reversed(left):
        pieces.extend(part)
    for part in right:
        pieces.extend(part)
    if not pieces:
        return None
    pieces.sort(key=lambda p: p[0])
    edges = np.array([p[0] for p in pieces] + [pieces[-1][1]])
    deg = max(len(p[2]) for p in pieces)
    coef = np.zeros((len(pieces), deg))
    for i, p in enumerate(pieces):
        coef[i, : len(p[2])] = p[2]
    incr = np.array([C.chebval(1.0, p[2]) for p in pieces])
    offset = np.concatenate([[0.0], np.cumsum(incr)[:-1]])
    k0 = int(np.searchsorted(edges, anchor, side="right") - 1)
    k0 = min(max(k0, 0), len(pieces) - 1)
    offset -= offset[k0] + C.chebval((2 * anchor - edges[k0] - edges[k0 + 1]) / (edges[k0 + 1] - edges[k0]), coef[k0])
    return _CumTable(edges, coef, offset)


class Integral(TimeProfile):
    """t -> integral of ``integrand`` from ``anchor`` to t."""

    kind = "integral"

    def __init__(self, integrand, anchor: float = 0.0,
                 window: tuple[float, float] | None = None, tol: float = 1e-14):
        self.integrand = as_profile(integrand)
        self.anchor = float(anchor)
        self.window = tuple(window) if window is not None else DEFAULT_WINDOW
        self.tol = tol
        if self.integrand.is_zero():
            self._table = None
            self._zero = True
            return
        self._zero = False
        f = self.integrand
        self._table = _build_table(lambda s: f.jet(s, 0).c[0], self.anchor, self.window, tol)

    def children(self):
        return (self.integrand,)

    def has_integral(self):
        return True

    def is_zero(self):
        return self._zero

    def primitive(self, t: np.ndarray) -> np.ndarray:
        if self._zero:
            return np.zeros_like(t)
        out = np.empty_like(t)
        tab = self._table
        inside = np.zeros(t.shape, bool) if tab is None else (t >= tab.lo) & (t <= tab.hi)
        if np.any(inside):
            out[inside] = tab(t[inside])
        for i in np.flatnonzero(~inside):
            out[i] = _quad(self.integrand, self.anchor, float(t[i]), 1e-14, 1e-13)
        return out

    def _jet(self, t, n, memo):
        out = np.empty((n + 1, t.size))
        out[0] = self.primitive(t)
        if n >= 1:
            g = self.integrand._get(t, n - 1, memo)
            for k in range(1, n + 1):
                out[k] = g.c[k - 1] / k
        return Jet(out)

    def to_expr(self):
        return f"(int {self.integrand.to_expr()})"


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------

def exp(p):
    return Func("exp", p)


def log(p):
    return Func("log", p)


def sin(p):
    return Func("sin", p)


def cos(p):
    return Func("cos", p)


def sqrt(p):
    return Func("sqrt", p)


def t_profile() -> Poly:
    return Poly([0.0, 1.0])


def eval_profile(p: TimeProfile, t: float, order: int = 0) -> float:
    if order < 0:
        raise OrderUnsupported("negative derivative order")
    limit = 2 if p.has_integral() else MAX_ORDER
    if order > limit:
        raise OrderUnsupported(f"order {order} > {limit} for kind {p.kind}")
    return p(float(t), order)


def _quad(p: TimeProfile, t0: float, t1: float, epsabs: float, epsrel: float) -> float:
    res = _spi.quad(lambda s: p(s), t0, t1, epsabs=epsabs, epsrel=epsrel, limit=500,
                    full_output=1)
    val, err = res[0], res[1]
    if len(res) > 3:
        roundoff = "roundoff" in str(res[3])
        # round-off detection is tolerated when the error estimate meets the request
        if not (roundoff and err <= max(epsabs, epsrel * abs(val))):
            raise MaxRefinementExceeded(str(res[3]).strip().splitlines()[0])
    return float(val)


def integrate(p: TimeProfile, t0: float, t1: float, tol: float = DEFAULT_TOL) -> float:
    """Adaptive Gauss-Kronrod quadrature of p over [t0, t1] with absolute tolerance tol."""
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    if t0 == t1 or p.is_zero():
        return 0.0
    return _quad(p, t0, t1, tol, 0.0)


def bernoulli_alpha(k: float, l: float) -> TimeProfile:
    """alpha = (k + 2k^2 l e^{-kt}) / (-1 + 2kl e^{-kt}); alpha' = (alpha^2 - k^2)/2."""
    k, l = float(k), float(l)
    if k == 0.0:
        return Const(0.0)
    if l == 0.0:
        return Const(-k)
    poles = [math.log(2 * k * l) / k] if 2 * k * l > 0 else []
    num = Const(k) + TrigExp(2 * k * k * l, -k)
    den = Const(-1.0) + TrigExp(2 * k * l, -k)
    return Quotient(num, den, poles=poles)


def beta_from_alpha(alpha: TimeProfile, d: float, d0: float, sign: int = 1,
                    window: tuple[float, float] | None = None) -> TimeProfile:
    """beta = sign * int_0^t alpha' / (sin^2 alpha sqrt(d - 1/sin^2 alpha)) + d0."""
    if not d > 1:
        raise DomainViolation("beta_from_alpha requires d > 1")
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")
    alpha = as_profile(alpha)
    s2 = sin(alpha) * sin(alpha)
    test = s2 - 1.0 / d
    integrand = Guard(sign * alpha.d() / (s2 * sqrt(d - 1.0 / s2)), test, 1e-10,
                      "sin^2(alpha) <= 1/d: beta integrand not real")
    if isinstance(alpha, Const):
        # still enforce the domain condition at construction
        if alpha.c == alpha.c and math.sin(alpha.c) ** 2 <= 1.0 / d + 1e-10:
            raise DomainViolation("sin^2(alpha) <= 1/d")
        return Const(d0)
    return Integral(integrand, window=window) + d0


def mu_profile(k: float, l1: float, l2: float, as_printed: bool = False) -> TimeProfile:
    """The exponential-rational mu of the first moving-frame family.

    Default: mu = l1 (y/y(0))^-4 with y = e^{kt/2} - 2 l2 e^{-kt/2}, so that
    mu'/mu = 2k + 4k/(-1 + 2 l2 e^{-kt}).
    ``as_printed``: mu'/mu = 2k + 4/(-1 + 2 l2 e^{-kt}), integrated in closed form.
    """
    k, l1, l2 = float(k), float(l1), float(l2)
    if as_printed:
        if k == 0.0:
            if 2 * l2 - 1 == 0:
                raise DomainViolation("mu undefined: 2 l2 = 1 with k = 0")
            return Const(l1) * TrigExp(1.0, 4.0 / (2 * l2 - 1))
        if 2 * l2 - 1 == 0:
            raise DomainViolation("mu undefined: pole at t = 0")
        ratio = (Const(2 * l2) - TrigExp(1.0, k)) / (2 * l2 - 1)
        return Const(l1) * TrigExp(1.0, 2 * k) * Func("pow", ratio * ratio, -2.0 / k)
    y = TrigExp(1.0, k / 2) - TrigExp(2 * l2, -k / 2)
    y0 = 1.0 - 2 * l2
    if y0 == 0:
        raise DomainViolation("mu undefined: pole at t = 0")
    return Const(l1) * Func("pow", y / y0, -4.0)


# --------------------------------------------------------------------------
# Prefix grammar
# --------------------------------------------------------------------------

GRAMMAR = """\
expr   := number | 't' | '(' head arg* ')'
(const c)                    constant c
(poly c0 c1 ... cn)          c0 + c1 t + ... + cn t^n
(trigexp c a b phi cos|sin)  c e^{a t} cos(b t + phi)  (or sin)
(sum e1 e2 ...)              e1 + e2 + ...
(prod e1 e2 ...)             e1 * e2 * ...
(quot num den)               num / den
(int e)                      integral of e from 0 to t
(exp e) (log e) (sin e) (cos e) (sqrt e)
(pow e r)                    e^r
(deriv e)                    de/dt
"""


def _tokenize(s: str) -> list[str]:
    return s.replace("(", " ( ").replace(")", " ) ").split()


def parse_profile(text: str) -> TimeProfile:
    toks = _tokenize(text)
    if not toks:
        raise ConfigError("empty profile expression")
    pos = [0]

    def num(tok: str) -> float:
        try:
            return float(tok)
        except ValueError:
            raise ConfigError(f"expected a number, got {tok!r}") from None

    def expr() -> TimeProfile:
        if pos[0] >= len(toks):
            raise ConfigError("unexpected end of profile expression")
        tok = toks[pos[0]]
        pos[0] += 1
        if tok == ")":
            raise ConfigError("unexpected ')'")
        if tok != "(":
            return t_profile() if tok == "t" else Const(num(tok))
        head = toks[pos[0]]
        pos[0] += 1
        args: list = []
        while pos[0] < len(toks) and toks[pos[0]] != ")":
            if head in ("const", "poly", "trigexp") or (head == "pow" and args):
                tk = toks[pos[0]]
                pos[0] += 1
                args.append(tk)
            else:
                args.append(expr())
        if pos[0] >= len(toks):
            raise ConfigError("missing ')'")
        pos[0] += 1
        return build(head, args)

    def build(head, args) -> TimeProfile:
        if head == "const" and len(args) == 1:
            return Const(num(args[0]))
        if head == "poly" and args:
            return Poly([num(a) for a in args])
        if head == "trigexp" and len(args) == 5:
            return TrigExp(*[num(a) for a in args[:4]], fn=args[4])
        if head == "sum" and args:
            return Sum(*args)
        if head == "prod" and args:
            return Product(*args)
        if head == "quot" and len(args) == 2:
            return Quotient(*args)
        if head == "int" and len(args) == 1:
            return Integral(args[0])
        if head in ("exp", "log", "sin", "cos", "sqrt") and len(args) == 1:
            return Func(head, args[0])
        if head == "pow" and len(args) == 2:
            return Func("pow", args[0], num(args[1]))
        if head == "deriv" and len(args) == 1:
            return Deriv(args[0])
        raise ConfigError(f"bad profile form ({head} ...) with {len(args)} arguments")

    out = expr()
    if pos[0] != len(toks):
        raise ConfigError("trailing tokens after profile expression")
    return out
