import numpy as np

from mhdexact.fields import SolutionField, stack3


def grid_points(n: int, seed: int = 0, box: float = 1.0, t_range=(0.0, 1.0)) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = rng.uniform(*t_range, n)
    return np.column_stack([t, rng.uniform(-box, box, (n, 3))])


class Probe(SolutionField):
    """Hand-written field from three callables of (t, x, y, z)."""

    family = "probe"

    def __init__(self, v=None, H=None, p=None):
        super().__init__()
        zero3 = lambda t, x, y, z: stack3(0 * x, 0 * x, 0 * x)
        self._v, self._H = v or zero3, H or zero3
        self._p = p or (lambda t, x, y, z: 0 * x)

    def fields(self, c, t, pts):
        x, y, z = pts.T
        return self._v(t, x, y, z), self._H(t, x, y, z), self._p(t, x, y, z)
