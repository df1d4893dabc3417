"""Field containers shared by the family builders and the residual oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigError, SingularPoint
from .timefns import TimeProfile, as_profile


@dataclass(frozen=True)
class PhysicalConstants:
    rho: float = 1.0
    nu: float = 0.1
    mu0: float = 1.0
    eta: float = 0.1

    def __post_init__(self):
        for name in ("rho", "nu", "mu0", "eta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"physical constant {name} must be finite and > 0, got {v!r}")


@dataclass(frozen=True)
class FieldSample:
    v: np.ndarray   # (N, 3)
    H: np.ndarray   # (N, 3)
    p: np.ndarray   # (N,)


@dataclass(frozen=True)
class SingularSet:
    """Blow-up set of a family.  ``distance(t, pts)`` returns the Euclidean
    distance of each point to the set at its time."""

    description: str
    distance: Callable[[np.ndarray, np.ndarray], np.ndarray]
    delta: float = 1e-3


def eval_profiles(profiles: Mapping[str, TimeProfile], t: np.ndarray) -> dict[str, np.ndarray]:
    """Order-0 values of several profiles sharing one evaluation memo."""
    memo: dict = {}
    return {k: as_profile(p)._get(t, 0, memo).c[0] for k, p in profiles.items()}


def _points(t, pts):
    t = np.atleast_1d(np.asarray(t, dtype=float)).ravel()
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if pts.shape[-1] != 3:
        raise ValueError("points must have shape (N, 3)")
    if t.size == 1 and pts.shape[0] > 1:
        t = np.full(pts.shape[0], t[0])
    if t.size != pts.shape[0]:
        raise ValueError("t and points must have the same length")
    return t, pts


class SolutionField:
    """Evaluator (t, x, y, z) -> (v, H, p).

    Subclasses provide ``profiles()`` (named time profiles, evaluated once per
    distinct t) and ``fields(c, t, pts)`` returning (v, H, p) from the per-point
    coefficient arrays ``c``.
    """

    family: str = "?"

    def __init__(self, params: Mapping | None = None, as_printed: bool = False,
                 singular: SingularSet | None = None):
        self.params = dict(params or {})
        self.as_printed = bool(as_printed)
        self.singular = singular

    # subclass hooks ---------------------------------------------------------
    def profiles(self) -> Mapping[str, TimeProfile]:
        return {}

    def fields(self, c: Mapping[str, np.ndarray], t: np.ndarray, pts: np.ndarray):
        raise NotImplementedError

    # public -----------------------------------------------------------------
    def coefficients(self, t) -> dict[str, np.ndarray]:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        tu, inv = np.unique(t, return_inverse=True)
        vals = eval_profiles(self.profiles(), tu)
        return {k: v[inv] for k, v in vals.items()}

    def admissible(self, t, pts, margin: float = 0.0) -> np.ndarray:
        t, pts = _points(t, pts)
        if self.singular is None:
            return np.ones(t.size, bool)
        return self.singular.distance(t, pts) >= self.singular.delta + margin

    def evaluate(self, t, pts, check: bool = True) -> FieldSample:
        t, pts = _points(t, pts)
        if check and self.singular is not None:
            bad = ~self.admissible(t, pts)
            if np.any(bad):
                raise SingularPoint(f"{int(bad.sum())} point(s) inside the singular tube "
                                    f"({self.singular.description})")
        c = self.coefficients(t)
        v, H, p = self.fields(c, t, pts)
        return FieldSample(np.asarray(v, float), np.asarray(H, float), np.asarray(p, float))

    def __call__(self, t, x, y, z) -> FieldSample:
        return self.evaluate(t, np.array([[x, y, z]], dtype=float))


# --------------------------------------------------------------------------
# moving frame
# --------------------------------------------------------------------------

def rotation_matrix(alpha, beta) -> np.ndarray:
    """T(alpha, beta), vectorised: returns (..., 3, 3)."""
    a = np.asarray(alpha, float)
    b = np.asarray(beta, float)
    ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
    z = np.zeros_like(ca * cb)
    T = np.stack([
        np.stack([ca + z, sa * cb, sa * sb], -1),
        np.stack([-sa + z, ca * cb, ca * sb], -1),
        np.stack([z, -sb + z, cb + z], -1),
    ], -2)
    return T


@dataclass(frozen=True)
class FrameRotation:
    alpha: TimeProfile
    beta: TimeProfile

    def T(self, t) -> np.ndarray:
        tt = np.atleast_1d(np.asarray(t, float))
        vals = eval_profiles({"a": self.alpha, "b": self.beta}, tt)
        out = rotation_matrix(vals["a"], vals["b"])
        return out[0] if np.ndim(t) == 0 else out

    def to_frame(self, t, pts) -> np.ndarray:
        t, pts = _points(t, pts)
        return np.einsum("nij,nj->ni", self.T(t), pts)

    def to_lab(self, t, frame_pts) -> np.ndarray:
        t, frame_pts = _points(t, frame_pts)
        return np.einsum("nji,nj->ni", self.T(t), frame_pts)


def frame_to_lab(frame: FrameRotation, frame_field: Callable, t, x, y, z) -> FieldSample:
    """Evaluate a frame-component field at lab points.

    ``frame_field(t, X)`` returns (U, Hf, p) in frame components at frame
    coordinates X (N, 3).
    """
    pts = np.stack(np.broadcast_arrays(*[np.atleast_1d(np.asarray(a, float)) for a in (x, y, z)]), -1)
    t, pts = _points(t, pts)
    T = frame.T(t)
    X = np.einsum("nij,nj->ni", T, pts)
    U, Hf, p = frame_field(t, X)
    v = np.einsum("nji,nj->ni", T, np.asarray(U, float))
    H = np.einsum("nji,nj->ni", T, np.asarray(Hf, float))
    return FieldSample(v, H, np.asarray(p, float))


class FrameField(SolutionField):
    """Family defined in moving-frame components; ``frame_fields`` returns
    (U, Hf, p) at frame coordinates.  The coefficient dict must contain the
    rotation angles under keys 'alpha' and 'beta'."""

    def frame_fields(self, c, t, X):
        raise NotImplementedError

    def fields(self, c, t, pts):
        T = rotation_matrix(c["alpha"], c["beta"])
        X = np.einsum("nij,nj->ni", T, pts)
        U, Hf, p = self.frame_fields(c, t, X)
        v = np.einsum("nji,nj->ni", T, U)
        H = np.einsum("nji,nj->ni", T, Hf)
        return v, H, p


def stack3(a, b, c) -> np.ndarray:
    a, b, c = np.broadcast_arrays(a, b, c)
    return np.stack([a, b, c], -1)
