import numpy as np
import pytest

from mhdexact.asymfam import (Thm31Params, Thm32Params, Thm33Params, build_thm31, build_thm32,
                              build_thm33)
from mhdexact.errors import ConfigError, MHDExactError
from mhdexact.fields import PhysicalConstants
from mhdexact.timefns import Poly, TrigExp
from mhdexact.verify import convergence_study

from helpers import grid_points

H3 = (1e-2, 5e-3, 2.5e-3)
ZERO_L = {k: 0.0 for k in ("C1", "C2", "D1", "D2", "F1", "F2", "G1", "G2", "H1", "H2")}


def test_thm31_static_limit():
    a, b = 0.8, 0.4
    f = build_thm31(Thm31Params(h=0.0, beta=0.0, a=a, b=b, c=0.0, s=0.0))
    pts = grid_points(20)
    s = f.evaluate(pts[:, 0], pts[:, 1:])
    x, y, z = pts[:, 1:].T
    assert np.allclose(s.v, 0.0, atol=1e-15)
    assert np.allclose(s.H, np.column_stack([(b / 2 - a) * x, -b / 2 * y, a * z]), atol=1e-15)


def test_thm31_rejects_zero_a():
    with pytest.raises(MHDExactError):
        build_thm31(Thm31Params(a=0.0))


def test_thm31_seeded_convergence():
    f = build_thm31(Thm31Params(h=Poly([0.2, -0.5]), beta=TrigExp(0.4, 0.0, 1.3), a=-0.6, b=0.9,
                                c=0.2, s=-0.8))
    st = convergence_study(f, grid_points(60, seed=3), H3)
    assert st.passes()


def test_thm32_zero_chain():
    q, a, b = 0.4, 1.0, 0.6
    beta = Poly([0.2, 0.3])
    f = build_thm32(Thm32Params(beta=beta, l=0.0, E=0.0, k=0.0, a=a, b=b, q=q, consts=ZERO_L))
    pts = grid_points(20, seed=4)
    s = f.evaluate(pts[:, 0], pts[:, 1:])
    t = pts[:, 0]
    x, y, z = pts[:, 1:].T
    bt = beta(t)
    assert np.allclose(s.v, np.column_stack([q * x, -bt * y, (bt - q) * z]), atol=1e-12)
    assert np.allclose(s.H, np.column_stack([(b / 2 - a) * x, -b / 2 * y, a * z]), atol=1e-12)


def test_thm32_lambda_c_exponential_branch():
    f = build_thm32(Thm32Params(q=1.0, a=1e-3, b=1e-3), PhysicalConstants(mu0=1.0))
    assert f.lams["C"] == pytest.approx(1.0, abs=1e-5)
    q, a, b, mu0 = 0.4, 1.0, 0.6, 1.3
    f = build_thm32(Thm32Params(q=q, a=a, b=b), PhysicalConstants(mu0=mu0))
    assert f.lams["C"] == pytest.approx(q * q - (1.5 * b - a) * (b / 2 + a) * mu0)


def test_thm32_unknown_constant():
    with pytest.raises(ConfigError):
        build_thm32(Thm32Params(consts={"Z9": 1.0}))


def test_thm33_zero_recursion():
    b, k, l = 0.6, 1.0, -0.5
    zero = {(0, 1): 0, (0, 2): 0, (1, 1): 0, (1, 2): 0}
    f = build_thm33(Thm33Params(b=b, k=k, l=l, n=1, lconsts=zero, qconsts=zero))
    pts = grid_points(20, seed=5)
    s = f.evaluate(pts[:, 0], pts[:, 1:])
    al = f.alpha(pts[:, 0])
    x, y, z = pts[:, 1:].T
    assert np.allclose(s.v, np.column_stack([al / 2 * x, al / 2 * y, -al * z]), atol=1e-12)
    assert np.allclose(s.H, np.column_stack([b / 2 * x, b / 2 * y, -b * z]), atol=1e-12)


def test_thm33_lambda_table():
    f = build_thm33(Thm33Params(b=1.0, k=2.0, l=-0.5, n=1), PhysicalConstants(mu0=1.0))
    assert f.lams[1][0] == pytest.approx(-1.0)
    assert f.lams[0][0] == pytest.approx(1.0)


def test_thm33_swirl_is_rotational():
    f = build_thm33(Thm33Params(n=2))
    pts = grid_points(10, seed=6)
    s = f.evaluate(pts[:, 0], pts[:, 1:])
    x, y = pts[:, 1], pts[:, 2]
    # the swirl part phi (y, -x) is orthogonal to the radial direction
    al = f.alpha(pts[:, 0])
    radial = s.v[:, 0] * x + s.v[:, 1] * y
    assert np.allclose(radial, al / 2 * (x * x + y * y), atol=1e-12)


def test_thm33_degree_cap():
    with pytest.raises(ConfigError):
        build_thm33(Thm33Params(n=3, max_degree=2))
    with pytest.raises(ConfigError):
        build_thm33(Thm33Params(n=0))


@pytest.mark.parametrize("n", [1, 2])
def test_thm33_printed_variant_fails(n):
    f = build_thm33(Thm33Params(n=n, as_printed=True))
    assert not convergence_study(f, grid_points(20, seed=7), H3).passes()

