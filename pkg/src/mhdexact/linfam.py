"""Velocity and magnetic field linear in space: v = A(t) x, H = B(t) x."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Case2DegenerateB, ConfigError
from .fields import PhysicalConstants, SolutionField
from .timefns import Const, TimeProfile, as_profile

SYM_TOL = 1e-12


def skew(a12, a13, a23) -> np.ndarray:
    a12, a13, a23 = np.broadcast_arrays(*(np.asarray(x, float) for x in (a12, a13, a23)))
    z = np.zeros_like(a12)
    rows = [[z, a12, a13], [-a12, z, a23], [-a13, -a23, z]]
    return np.stack([np.stack(r, -1) for r in rows], -2)


def sym5(v) -> np.ndarray:
    """Symmetric traceless matrix from (m11, m12, m13, m22, m23); v may be (..., 5)."""
    m11, m12, m13, m22, m23 = np.moveaxis(np.asarray(v, float), -1, 0)
    rows = [[m11, m12, m13], [m12, m22, m23], [m13, m23, -m11 - m22]]
    return np.stack([np.stack(r, -1) for r in rows], -2)


def vec5(m: np.ndarray) -> np.ndarray:
    return np.array([m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2]])


def commuting_matrix(B: np.ndarray, as_printed: bool = False) -> np.ndarray:
    """3x5 matrix whose kernel is the set of symmetric traceless A with AB = BA."""
    b11, b12, b13, b22, b23 = vec5(B)
    r1 = [b12, -b11 + b22, b23, -b23 if as_printed else -b12, -b13]
    r2 = [2 * b13, b23, -2 * b11 - b22, b13, -b12]
    r3 = [b23, b13, -b12, b23 if as_printed else 2 * b23, -b11 - 2 * b22]
    return np.array([r1, r2, r3], float)


def nullspace_2_10(B, as_printed: bool = False) -> np.ndarray:
    """Orthonormal kernel basis (rows) of the 3x5 commutation system."""
    B = np.asarray(B, float)
    if not np.allclose(B, B.T, atol=SYM_TOL, rtol=0):
        raise ConfigError("B must be symmetric")
    if abs(np.trace(B)) > SYM_TOL:
        raise ConfigError("B must be trace-free")
    Mx = commuting_matrix(B, as_printed)
    _, s, vt = np.linalg.svd(Mx)
    norm = np.linalg.norm(Mx, 2)
    rank = int(np.sum(s > 1e-12 * norm)) if norm > 0 else 0
    return vt[rank:]


def matrix_m(a12: float, a13: float, a23: float, as_printed: bool = False) -> np.ndarray:
    """Generator of B' = AB - BA on the 5-vector of a symmetric traceless B."""
    M = np.array([
        [0, 2 * a12, 2 * a13, 0, 0],
        [-a12, 0, a23, a12, a13],
        [-2 * a13, -a23, 0, -a13, a12],
        [0, -2 * a12, 0, 0, 2 * a23],
        [-a23, -a13, -a12, -2 * a23, 0],
    ], float)
    if as_printed:
        M[1, 0] = -2 * a12
    return M


def matrix_n(a12: float, a13: float, a23: float) -> np.ndarray:
    """Generator of B' = AB - BA on (b12, b13, b23) of a skew B."""
    return np.array([[0, a23, -a13], [-a23, 0, a12], [a13, -a12, 0]], float)


def matrix_exp(M, t: float = 1.0) -> np.ndarray:
    """exp(M t) by scaling and squaring a degree-18 Taylor polynomial."""
    A = np.asarray(M, float) * float(t)
    n = A.shape[0]
    if A.shape != (n, n) or n not in (3, 5):
        raise ConfigError("matrix_exp supports 3x3 and 5x5 matrices")
    if not np.all(np.isfinite(A)):
        raise ConfigError("matrix entries must be finite")
    nrm = np.linalg.norm(A, 1)
    s = max(0, int(math.ceil(math.log2(nrm / 0.5)))) if nrm > 0.5 else 0
    A = A / 2.0 ** s
    # ||A|| <= 1/2: Taylor remainder after degree 18 is below 1e-19 relative
    E = np.eye(n)
    term = np.eye(n)
    for k in range(1, 19):
        term = term @ A / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


@dataclass
class LinearFamilyParams:
    case: int
    B: Sequence | None = None                  # case 1 (symmetric) or case 2 (skew)
    A: Sequence | None = None                  # (a12, a13, a23) for cases 3 and 4
    g: TimeProfile | float | None = None       # case 2 free function
    c: Sequence | None = None                  # case 3: 5-vector, case 4: 3-vector
    coeffs: Sequence | None = None             # case 1 kernel combination (profiles or numbers)
    as_printed: bool = False

    def __post_init__(self):
        if self.case not in (1, 2, 3, 4):
            raise ConfigError("case must be 1, 2, 3 or 4")


class LinearFamily(SolutionField):
    def __init__(self, p: LinearFamilyParams, consts: PhysicalConstants):
        super().__init__({"case": p.case}, p.as_printed)
        self.p, self.consts = p, consts
        self.family = f"prop2.{p.case}"
        case = p.case
        if case == 1:
            B = np.asarray(p.B, float).reshape(3, 3)
            basis = nullspace_2_10(B, p.as_printed)
            coeffs = p.coeffs if p.coeffs is not None else [1.0] * len(basis)
            if len(coeffs) != len(basis):
                raise ConfigError(f"case 1 needs {len(basis)} combination coefficients")
            cp = [as_profile(x) for x in coeffs]
            entries = []
            for i in range(5):
                e = Const(0.0)
                for k, prof in enumerate(cp):
                    if basis[k, i] != 0.0:
                        e = e + prof * float(basis[k, i])
                entries.append(e)
            self.A5 = entries
            self.Bconst = B
            self.basis = basis
        elif case == 2:
            B = np.asarray(p.B, float).reshape(3, 3)
            if not np.allclose(B, -B.T, atol=SYM_TOL, rtol=0):
                raise ConfigError("case 2 needs skew B")
            b12, b13, b23 = B[0, 1], B[0, 2], B[1, 2]
            if min(abs(b12), abs(b13), abs(b23)) < 1e-12:
                raise Case2DegenerateB("b12, b13 and b23 must all be nonzero")
            g = as_profile(1.0 if p.g is None else p.g)
            d = 3 * b12 * b13 * b23
            self.A5 = [g * ((b12 ** 2 + b13 ** 2 - 2 * b23 ** 2) / d), g * (1 / b12), g * (-1 / b13),
                       g * ((b12 ** 2 - 2 * b13 ** 2 + b23 ** 2) / d), g * (1 / b23)]
            self.Bconst = B
        else:
            if p.A is None or len(p.A) != 3:
                raise ConfigError("cases 3 and 4 need A as (a12, a13, a23)")
            self.a = tuple(float(x) for x in p.A)
            self.Aconst = skew(*self.a)
            if case == 3:
                self.gen = matrix_m(*self.a, as_printed=p.as_printed)
                c = np.asarray(p.c if p.c is not None else [1, 0, 0, 0, 0], float)
                if c.shape != (5,):
                    raise ConfigError("case 3 needs a 5-vector c")
            else:
                self.gen = matrix_n(*self.a)
                c = np.asarray(p.c if p.c is not None else [1, 0, 0], float)
                if c.shape != (3,):
                    raise ConfigError("case 4 needs a 3-vector c")
            self.c = c

    # matrices at arrays of t --------------------------------------------------
    def matrices(self, t):
        """A(t), A'(t), B(t) with shape (N, 3, 3)."""
        t = np.atleast_1d(np.asarray(t, float))
        n = t.size
        if self.p.case in (1, 2):
            memo: dict = {}
            vals = [e._get(t, 1, memo) for e in self.A5]
            A = sym5(np.stack([v.c[0] for v in vals], -1))
            dA = sym5(np.stack([v.c[1] for v in vals], -1))
            B = np.broadcast_to(self.Bconst, (n, 3, 3)).copy()
            return A, dA, B
        tu, inv = np.unique(t, return_inverse=True)
        vecs = np.stack([matrix_exp(self.gen, ti) @ self.c for ti in tu])[inv]
        if self.p.case == 3:
            B = sym5(vecs)
        else:
            B = skew(vecs[:, 0], vecs[:, 1], vecs[:, 2])
        A = np.broadcast_to(self.Aconst, (n, 3, 3)).copy()
        return A, np.zeros_like(A), B

    def pressure_matrix(self, A, dA, B):
        """Symmetric K with p = (rho/2) x^T K x."""
        mu0 = self.consts.mu0
        if not self.as_printed:
            Bt = np.swapaxes(B, -1, -2)
            K = -(dA + A @ A) + mu0 * (Bt @ B - B @ B)
            return 0.5 * (K + np.swapaxes(K, -1, -2))
        return self._printed_k(A, dA, B)

    def _printed_k(self, A, dA, B):
        mu0 = self.consts.mu0
        n = A.shape[0]
        K = np.zeros((n, 3, 3))
        case = self.p.case
        if case in (1, 2):
            row = np.einsum("nij,nkj->nik", A, A)   # sum_j a_ij a_kj
            diag_d = [dA[:, 0, 0], dA[:, 0, 1], dA[:, 2, 2] if case == 1 else dA[:, 0, 2]]
            for i in range(3):
                K[:, i, i] = -(diag_d[i] + row[:, i, i])
            for i, j in ((0, 1), (0, 2), (1, 2)):
                K[:, i, j] = K[:, j, i] = -(dA[:, i, j] + row[:, i, j])
            if case == 2:
                b12, b13, b23 = B[:, 0, 1], B[:, 0, 2], B[:, 1, 2]
                K[:, 0, 0] -= 2 * mu0 * (b12 ** 2 + b13 ** 2)
                K[:, 1, 1] -= 2 * mu0 * (b12 ** 2 + b23 ** 2)
                K[:, 2, 2] -= 2 * mu0 * (b13 ** 2 + b23 ** 2)
                for (i, j), v in (((0, 1), -2 * mu0 * b13 * b23), ((0, 2), 2 * mu0 * b12 * b23),
                                  ((1, 2), -2 * mu0 * b12 * b13)):
                    K[:, i, j] -= v
                    K[:, j, i] -= v
            return K
        a12, a13, a23 = self.a
        a32, a21 = -a23, -a12
        diag = np.array([-(a12 ** 2 + a13 ** 2), -(a12 ** 2 + a23 ** 2), -(a13 ** 2 + a23 ** 2)])
        off = {(0, 1): -a13 * a32, (0, 2): -a12 * a23, (1, 2): -a21 * a13}
        if case == 3:
            for i in range(3):
                K[:, i, i] = -diag[i]
            for (i, j), v in off.items():
                K[:, i, j] = K[:, j, i] = -v
            return K
        b12, b13, b23 = B[:, 0, 1], B[:, 0, 2], B[:, 1, 2]
        b32, b21 = -b23, -b12
        dg = [diag[0] + 2 * mu0 * (b12 ** 2 + b13 ** 2), diag[1] + 2 * mu0 * (b12 ** 2 + b23 ** 2),
              diag[2] + 2 * mu0 * (b13 ** 2 + b23 ** 2)]
        for i in range(3):
            K[:, i, i] = -dg[i]
        cross = {(0, 1): off[(0, 1)] + 2 * mu0 * b13 * b32, (0, 2): off[(0, 2)] + 2 * mu0 * b12 * b23,
                 (1, 2): off[(1, 2)] + 2 * mu0 * b21 * b13}
        for (i, j), v in cross.items():
            K[:, i, j] = K[:, j, i] = -v
        return K

    def coefficients(self, t):
        return {}

    def fields(self, c, t, pts):
        A, dA, B = self.matrices(t)
        v = np.einsum("nij,nj->ni", A, pts)
        H = np.einsum("nij,nj->ni", B, pts)
        K = self.pressure_matrix(A, dA, B)
        p = 0.5 * self.consts.rho * np.einsum("ni,nij,nj->n", pts, K, pts)
        return v, H, p


def build_linear_family(p: LinearFamilyParams, consts: PhysicalConstants | None = None) -> LinearFamily:
    return LinearFamily(p, consts or PhysicalConstants())
