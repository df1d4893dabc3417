"""Second-order machinery: oscillator bases, Wronskian kernels, variation of
parameters.

For a basis (xi1, xi2) of the homogeneous equation a'' + p a' + q a = 0 the
forced solution of a'' + p a' + q a = f is

    A(t) = sum_j xi_j(t) (l_j + int_0^t (W_j/W)(s) f(s) ds),
    W = xi1 xi2' - xi1' xi2,  W1 = -xi2,  W2 = xi1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularWronskian
from .timefns import (Const, Integral, Jet, Poly, TimeProfile, TrigExp, as_profile)

ZERO_BAND = 1e-12
W_RTOL = 1e-12


@dataclass(frozen=True)
class OscBasis:
    lam: float
    branch: str            # "positive" | "zero" | "negative" | "custom"
    envelope: TimeProfile
    xi1: TimeProfile
    xi2: TimeProfile
    wronskian: TimeProfile  # W as a profile (constant times envelope^2 for oscillators)

    def values(self, t, order: int = 0):
        return self.xi1(t, order), self.xi2(t, order)


def _branch(lam: float) -> str:
    if abs(lam) <= ZERO_BAND:
        return "zero"
    return "positive" if lam > 0 else "negative"


def osc_basis(lam: float, envelope=None, branch: str | None = None) -> OscBasis:
    """Basis of xi'' = lam xi, multiplied by ``envelope``.

    ``branch`` forces a branch; by default |lam| <= 1e-12 selects {1, t}.
    """
    lam = float(lam)
    env = Const(1.0) if envelope is None else as_profile(envelope)
    br = branch or _branch(lam)
    if br == "positive":
        r = math.sqrt(lam)
        b1, b2, w = TrigExp(1.0, r), TrigExp(1.0, -r), -2.0 * r
    elif br == "zero":
        b1, b2, w = Const(1.0), Poly([0.0, 1.0]), 1.0
    elif br == "negative":
        r = math.sqrt(-lam)
        b1, b2, w = TrigExp(1.0, 0.0, r), TrigExp(1.0, 0.0, r, 0.0, "sin"), r
    else:
        raise ValueError(f"unknown branch {br!r}")
    unit = isinstance(env, Const) and env.c == 1.0
    xi1 = b1 if unit else env * b1
    xi2 = b2 if unit else env * b2
    wr = Const(w) if unit else env * env * w
    return OscBasis(lam, br, env, xi1, xi2, wr)


def custom_basis(xi1, xi2, lam: float = float("nan"), envelope=None) -> OscBasis:
    """Basis from two arbitrary solutions; W is formed from their derivatives."""
    xi1, xi2 = as_profile(xi1), as_profile(xi2)
    w = xi1 * xi2.d() - xi1.d() * xi2
    env = Const(1.0) if envelope is None else as_profile(envelope)
    return OscBasis(float(lam), "custom", env, xi1, xi2, w)


def wronskian_weights(b: OscBasis, t):
    """(W, W1, W2) at t, including the envelope."""
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    j1, j2 = b.xi1.jet(tt, 1), b.xi2.jet(tt, 1)
    x1, d1 = j1.c[0], j1.c[1]
    x2, d2 = j2.c[0], j2.c[1]
    W = x1 * d2 - d1 * x2
    scale = np.maximum(np.abs(x1 * d2), np.abs(d1 * x2))
    scale = np.where(scale > 0, scale, 1.0)
    if np.any(np.abs(W) < W_RTOL * scale) or np.any(W == 0):
        raise SingularWronskian("Wronskian vanishes relative to the basis scale")
    out = (W, -x2, x1)
    if np.ndim(t) == 0:
        return tuple(float(v[0]) for v in out)
    return out


class ForcedSolution(TimeProfile):
    """A(t) = sum_j xi_j (l_j + int_0^t (W_j/W) f)."""

    kind = "forced"

    def __init__(self, basis: OscBasis, forcing, l1: float = 0.0, l2: float = 0.0,
                 window=None):
        self.basis, self.forcing = basis, as_profile(forcing)
        self.l1, self.l2 = float(l1), float(l2)
        wronskian_weights(basis, 0.0)
        if self.forcing.is_zero():
            self.int1 = self.int2 = Const(0.0)
        else:
            w = basis.wronskian
            self.int1 = Integral(-basis.xi2 * self.forcing / w, window=window)
            self.int2 = Integral(basis.xi1 * self.forcing / w, window=window)
        self._tree = basis.xi1 * (self.int1 + self.l1) + basis.xi2 * (self.int2 + self.l2)

    def children(self):
        return (self._tree,)

    def is_zero(self):
        return self._tree.is_zero()

    def _jet(self, t, n, memo) -> Jet:
        return self._tree._get(t, n, memo)

    def to_expr(self):
        return self._tree.to_expr()


def solve_forced(b: OscBasis, f, l1: float = 0.0, l2: float = 0.0, window=None) -> ForcedSolution:
    return ForcedSolution(b, f, l1, l2, window=window)
