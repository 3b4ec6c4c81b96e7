"""Blow-up map, Jacobian and pushforward checks against finite differences."""

import numpy as np
import pytest

from cloakwave import geometry as geo


def fd_jacobian(m, x, h=1e-7):
    x = np.asarray(x, dtype=float)
    d = len(x)
    J = np.zeros((d, d))
    for k in range(d):
        dx = np.zeros(d)
        dx[k] = h
        J[:, k] = (m.forward(x + dx) - m.forward(x - dx)) / (2 * h)
    return J


def test_identity_branch():
    m = geo.BlowupMap(rho=0.25, dimension=3)
    x = np.array([3.0, 0.0, 0.0])
    assert np.allclose(m.forward(x), x)


def test_branch_continuity_at_two():
    m = geo.BlowupMap(rho=0.25, dimension=3)
    x = np.array([0.0, 2.0, 0.0])
    assert abs(np.linalg.norm(m.forward(x)) - 2.0) < 1e-12


def test_inner_branch():
    m = geo.BlowupMap(rho=0.25, dimension=3)
    x = np.array([0.125, 0.0, 0.0])
    assert abs(np.linalg.norm(m.forward(x)) - 0.5) < 1e-15


def test_inverse_identity_branch():
    m = geo.BlowupMap(rho=0.25, dimension=2)
    y = np.array([3.0, 0.0])
    assert np.allclose(m.inverse(y), y)


def test_inverse_unit_sphere_to_rho():
    m = geo.BlowupMap(rho=0.25, dimension=3)
    y = np.array([0.0, 0.0, 1.0])
    assert abs(np.linalg.norm(m.inverse(y)) - 0.25) < 1e-15


def test_inverse_middle_branch_value():
    # |y| = 1.5, rho = 1/4: |x| = 1.5 (2 - rho) - (2 - 2 rho) = 1.125,
    # frozen from the forward-map round trip
    m = geo.BlowupMap(rho=0.25, dimension=3)
    y = np.array([1.5, 0.0, 0.0])
    x = m.inverse(y)
    assert abs(np.linalg.norm(x) - 1.125) < 1e-14
    assert np.allclose(m.forward(x), y, atol=1e-14)


def test_round_trip_random_points():
    rng = np.random.default_rng(11)
    for dim in (2, 3):
        m = geo.BlowupMap(rho=0.3, dimension=dim)
        for _ in range(500):
            x = rng.uniform(-4, 4, size=dim)
            y = m.forward(x)
            back = m.inverse(y)
            assert np.linalg.norm(back - x) <= 1e-12 * (1 + np.linalg.norm(x))


def test_branch_continuity_radial():
    for rho in (0.1, 0.25, 0.49):
        m = geo.BlowupMap(rho=rho, dimension=3)
        for r in (rho, 2.0):
            lo = m.radius_map(r * (1 - 1e-13))
            hi = m.radius_map(r * (1 + 1e-13))
            assert abs(lo - hi) < 1e-12


def test_jacobian_identity_branch():
    m = geo.BlowupMap(rho=0.25, dimension=3)
    J = m.jacobian(np.array([0.0, 2.5, 0.0]))
    assert np.allclose(J, np.eye(3))


def test_jacobian_inner_branch():
    m = geo.BlowupMap(rho=0.25, dimension=3)
    J = m.jacobian(np.array([0.1, 0.05, 0.0]))
    assert np.allclose(J, np.eye(3) / 0.25)


def test_jacobian_middle_branch_eigenvalues():
    # d=3, rho=1/4, r=1.125: radial eigenvalue 1/(2-rho)=4/7, tangential 4/3
    m = geo.BlowupMap(rho=0.25, dimension=3)
    x = np.array([1.125, 0.0, 0.0])
    J = m.jacobian(x)
    assert abs(J[0, 0] - 4.0 / 7.0) < 1e-14
    assert abs(J[1, 1] - 4.0 / 3.0) < 1e-14
    assert abs(J[2, 2] - 4.0 / 3.0) < 1e-14


def test_jacobian_against_finite_differences():
    rng = np.random.default_rng(5)
    m = geo.BlowupMap(rho=0.25, dimension=3)
    for _ in range(25):
        x = rng.uniform(-3, 3, size=3)
        r = np.linalg.norm(x)
        if r < 1e-2 or min(abs(r - 0.25), abs(r - 2.0)) < 1e-3:
            continue
        assert np.abs(m.jacobian(x) - fd_jacobian(m, x)).max() < 1e-6


def test_jacobian_rejects_origin():
    m = geo.BlowupMap(rho=0.25, dimension=3)
    with pytest.raises(geo.GeometryError):
        m.jacobian(np.zeros(3))


def test_pushforward_identity_map():
    class Identity(geo.RadialMap):
        dimension = 3

        def radius_map(self, r):
            return r

        def radius_slope(self, r, side="outer"):
            return 1.0

        def radius_inverse(self, s):
            return s

    A = np.array([[2.0, 0.5, 0], [0.5, 1.0, 0], [0, 0, 3.0]])
    cf = geo.pushforward_coeffs(Identity(), A, 1.7, np.array([1.0, 0.2, -0.3]))
    assert np.allclose(cf.matrix, A)
    assert abs(cf.scalar - 1.7) < 1e-15


def test_pushforward_lossy_layer_scaling():
    # F = x/rho on B_rho with A=I, Sigma=1+i/(rho^2 w), d=3
    # gives (rho I, rho^3 + rho i/w)
    rho, w = 0.2, 1.3
    m = geo.BlowupMap(rho=rho, dimension=3)
    x = np.array([0.0, rho / 2, 0.0])
    sigma = 1 + 1j / (rho ** 2 * w)
    cf = geo.pushforward_coeffs(m, 1.0, sigma, x)
    assert abs(cf.radial - rho) < 1e-14
    assert abs(cf.tangential - rho) < 1e-14
    assert np.allclose(cf.matrix, rho * np.eye(3))
    assert abs(cf.scalar - (rho ** 3 + rho * 1j / w)) < 1e-14


def test_pushforward_inverse_map_inclusion_scaling():
    # y -> rho y on B_1 sends isotropic eps to rho^{-1} eps(./rho), d=3
    rho = 0.1

    class Shrink(geo.RadialMap):
        dimension = 3

        def radius_map(self, r):
            return rho * r

        def radius_slope(self, r, side="outer"):
            return rho

        def radius_inverse(self, s):
            return s / rho

    eps = 2.5
    cf = geo.pushforward_coeffs(Shrink(), eps, eps, np.array([0.5, 0.1, 0.0]))
    assert abs(cf.radial - eps / rho) < 1e-12
    assert abs(cf.scalar - eps / rho ** 3) < 1e-12


def test_pushforward_field_constant():
    rho = 0.25

    class Scale(geo.RadialMap):
        dimension = 3

        def radius_map(self, r):
            return r / rho

        def radius_slope(self, r, side="outer"):
            return 1.0 / rho

        def radius_inverse(self, s):
            return rho * s

    E = np.array([1.0, -2.0, 0.5])
    out = geo.pushforward_field(Scale(), lambda x: E, np.array([1.0, 1.0, 0.2]))
    assert np.allclose(out, rho * E)


def test_pushforward_field_gradient_identity():
    # pushforward of grad(u) equals grad(u o F^{-1}), finite differences
    m = geo.BlowupMap(rho=0.25, dimension=3)

    def u(x):
        return x[0] ** 2 * x[1] + 0.5 * x[2] ** 3 + x[0] * x[2]

    def grad_u(x):
        return np.array([2 * x[0] * x[1] + x[2], x[0] ** 2, 1.5 * x[2] ** 2 + x[0]])

    rng = np.random.default_rng(2)
    h = 1e-6
    for _ in range(20):
        y = rng.uniform(-3, 3, size=3)
        s = np.linalg.norm(y)
        if s < 0.1 or min(abs(s - 1.0), abs(s - 2.0)) < 1e-2:
            continue
        push = geo.pushforward_field(m, grad_u, y)
        comp = np.zeros(3)
        for k in range(3):
            dy = np.zeros(3)
            dy[k] = h
            comp[k] = (u(m.inverse(y + dy)) - u(m.inverse(y - dy))) / (2 * h)
        assert np.abs(push - comp).max() < 1e-8 * max(1.0, np.abs(push).max())


def test_pushforward_composition():
    # (F o G)_* A = F_*(G_* A) for radial maps, checked on the full matrix
    rng = np.random.default_rng(9)

    class Power(geo.RadialMap):
        dimension = 3

        def __init__(self, p, c):
            self.p, self.c = p, c

        def radius_map(self, r):
            return self.c * r ** self.p

        def radius_slope(self, r, side="outer"):
            return self.c * self.p * r ** (self.p - 1)

        def radius_inverse(self, s):
            return (s / self.c) ** (1.0 / self.p)

    class Compose(geo.RadialMap):
        dimension = 3

        def __init__(self, f, g):
            self.f, self.g = f, g

        def radius_map(self, r):
            return self.f.radius_map(self.g.radius_map(r))

        def radius_slope(self, r, side="outer"):
            return self.f.radius_slope(self.g.radius_map(r)) * self.g.radius_slope(r)

        def radius_inverse(self, s):
            return self.g.radius_inverse(self.f.radius_inverse(s))

    F = Power(1.3, 0.8)
    G = Power(0.7, 1.4)
    FG = Compose(F, G)
    for _ in range(10):
        x = rng.uniform(0.2, 2.0, size=3)
        B = rng.normal(size=(3, 3))
        A = B + B.T
        sig = complex(rng.normal(), rng.normal())
        one = geo.pushforward_coeffs(FG, A, sig, x)
        inner = geo.pushforward_coeffs(G, A, sig, x)
        outer = geo.pushforward_coeffs(F, inner.matrix, inner.scalar, G.forward(x))
        assert np.abs(one.matrix - outer.matrix).max() < 1e-10 * max(1, np.abs(one.matrix).max())
        assert abs(one.scalar - outer.scalar) < 1e-10 * max(1, abs(one.scalar))


def test_pushforward_positive_definite_real_part():
    m = geo.BlowupMap(rho=0.2, dimension=3)
    rng = np.random.default_rng(4)
    for _ in range(50):
        r = rng.uniform(0.2, 2.0)
        u = rng.normal(size=3)
        x = r * u / np.linalg.norm(u)
        cf = geo.pushforward_coeffs(m, 1.0, 1.0, x)
        eig = np.linalg.eigvalsh(cf.matrix.real)
        assert eig.min() > 0


def test_rho_validation():
    with pytest.raises(geo.GeometryError):
        geo.BlowupMap(rho=0.7, dimension=3)
    with pytest.raises(geo.GeometryError):
        geo.BlowupMap(rho=0.0, dimension=2)
