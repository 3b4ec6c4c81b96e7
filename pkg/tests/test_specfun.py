"""Special-function identities: Wronskians, closed forms, recurrences."""

import numpy as np
import pytest

from cloakwave import specfun as sf


def test_j0_at_zero():
    assert sf.cyl_bessel("J", 0, 0.0).value == 1.0


def test_cylindrical_wronskian():
    # J_n Y_n' - J_n' Y_n = 2/(pi z)
    z = 3.7
    for n in range(9):
        J = sf.cyl_bessel("J", n, z)
        Y = sf.cyl_bessel("Y", n, z)
        w = J.value * Y.derivative - J.derivative * Y.value
        assert abs(w - 2.0 / (np.pi * z)) < 1e-12


def test_h1_is_j_plus_iy():
    z = 2.2 + 0.7j
    for n in range(6):
        H = sf.cyl_bessel("H1", n, z)
        J = sf.cyl_bessel("J", n, z)
        Y = sf.cyl_bessel("Y", n, z)
        assert H.value == J.value + 1j * Y.value
        assert H.derivative == J.derivative + 1j * Y.derivative


def test_j0_first_zero_by_bisection():
    # oracle: bisection on the implemented J_0
    f = lambda x: sf.cyl_bessel("J", 0, x).value.real
    root = sf.bisect_root(f, 2.0, 3.0)
    assert abs(root - 2.404825557695773) < 1e-11


def test_sph_j0_at_pi():
    assert abs(sf.sph_bessel("j", 0, np.pi).value) < 1e-15


def test_sph_h0_closed_form():
    z = 1 + 0.5j
    h = sf.sph_bessel("h1", 0, z)
    assert abs(h.value - (-1j * np.exp(1j * z) / z)) < 1e-13


def test_sph_wronskian():
    # j_n y_n' - j_n' y_n = 1/z^2
    z = 2.3
    j, jp, y, yp = sf.sph_jy_arrays(8, z)
    w = j * yp - jp * y
    assert np.abs(w - 1.0 / z ** 2).max() < 1e-12


def test_riccati_definitions():
    z = 1.9 + 0.3j
    for n in range(7):
        psi = sf.riccati("psi", n, z)
        chi = sf.riccati("chi", n, z)
        xi = sf.riccati("xi", n, z)
        jn = sf.sph_bessel("j", n, z)
        assert abs(psi.value - z * jn.value) < 1e-12 * max(1, abs(psi.value))
        assert abs(xi.value - (psi.value - 1j * chi.value)) < 1e-12 * abs(xi.value)
        assert abs(xi.derivative - (psi.derivative - 1j * chi.derivative)) < 1e-12 * abs(xi.derivative)


def test_riccati_psi0_is_sin():
    z = 0.83
    assert abs(sf.riccati("psi", 0, z).value - np.sin(z)) < 1e-14


def test_riccati_wronskian():
    # psi_n xi_n' - psi_n' xi_n = i
    z = 4.1
    psi, psip, xi, xip = sf.riccati_arrays(6, z)
    w = psi * xip - psip * xi
    assert np.abs(w - 1j).max() < 1e-11


def test_legendre_p1():
    theta = np.linspace(0.01, np.pi - 0.01, 7)
    p, _, _ = sf.legendre_angular(1, 0, theta)
    assert np.abs(p - np.cos(theta)).max() < 1e-14


def test_pi1_tau1():
    theta = np.array([0.0, 0.3, 1.1, np.pi / 2, 2.6, np.pi])
    _, pi1, tau1 = sf.legendre_angular(1, 1, theta)
    assert np.abs(pi1 - 1.0).max() < 1e-14
    assert np.abs(tau1 - np.cos(theta)).max() < 1e-14


def test_pi_tau_against_symbolic_samples():
    # oracle values computed by symbolic differentiation of P_n:
    # pi_n = dP_n/dmu, tau_n = n mu pi_n - (n+1) pi_{n-1}
    # P_2 = (3mu^2-1)/2 -> pi_2 = 3mu; P_3 -> pi_3 = (15mu^2-3)/2
    theta = 0.77
    mu = np.cos(theta)
    _, pi2, tau2 = sf.legendre_angular(2, 1, theta)
    assert abs(pi2 - 3 * mu) < 1e-13
    assert abs(tau2 - (2 * mu * 3 * mu - 3 * 1.0)) < 1e-13
    _, pi3, tau3 = sf.legendre_angular(3, 1, theta)
    assert abs(pi3 - (15 * mu ** 2 - 3) / 2) < 1e-13


def test_legendre_orthogonality_by_quadrature():
    # int P_n P_k sin(theta) dtheta = 2 delta_nk / (2n+1)
    nodes, weights = np.polynomial.legendre.leggauss(40)
    for n in range(7):
        pn = sf.legendre_pn_array(6, nodes)
        for k in range(7):
            val = np.sum(weights * pn[n] * pn[k])
            expect = 2.0 / (2 * n + 1) if n == k else 0.0
            assert abs(val - expect) < 1e-10


def test_assoc_legendre_no_condon_shortley():
    theta = 0.9
    p, _, _ = sf.legendre_angular(1, 1, theta)
    assert abs(p - np.sin(theta)) < 1e-14


def test_recurrence_consistency_grid():
    # defining recurrence f_{n-1} + f_{n+1} = (2n+1)/z f_n over a grid of
    # real and complex arguments, moderate orders
    rng = np.random.default_rng(7)
    for _ in range(40):
        mag = 10 ** rng.uniform(-3, np.log10(50))
        phase = rng.uniform(-np.pi, np.pi)
        z = mag * np.exp(1j * phase)
        j, jp, y, yp = sf.sph_jy_arrays(40, z)
        for f in (j, y):
            lhs = f[:-2] + f[2:]
            n = np.arange(1, 40)
            rhs = (2 * n + 1) / z * f[1:-1]
            scale = np.maximum(np.abs(lhs), np.abs(rhs)) + 1e-300
            assert np.max(np.abs(lhs - rhs) / scale) < 1e-10


def test_wronskian_complex_grid():
    # |Im z| capped: the Wronskian subtracts e^{2|Im z|}-sized products, so
    # beyond that double precision cannot represent the identity itself
    rng = np.random.default_rng(3)
    count = 0
    while count < 30:
        mag = 10 ** rng.uniform(-3, np.log10(50))
        phase = rng.uniform(-np.pi, np.pi)
        z = mag * np.exp(1j * phase)
        if abs(z.imag) > 6.0:
            continue
        count += 1
        j, jp, y, yp = sf.sph_jy_arrays(12, z)
        w = j * yp - jp * y
        assert np.abs(w * z ** 2 - 1.0).max() < 1e-9


def test_scaled_riccati_large_imag():
    z = 3.0 + 40j
    xi = sf.riccati("xi", 2, z, scaled=True)
    # true = value * exp(scale) with scale = i z; values stay O(1)
    assert xi.scale == 1j * z
    assert abs(xi.value) < 1e3
    xi0 = sf.riccati("xi", 0, z, scaled=True)
    # closed form: xi_0 e^{-iz} = -i exactly
    assert abs(xi0.value - (-1j)) < 1e-12
    assert abs(xi0.derivative - 1.0) < 1e-12
    # moderate argument: scaled and unscaled variants agree after restoring
    zm = 2.0 + 1.5j
    a = sf.riccati("xi", 3, zm, scaled=True)
    b = sf.riccati("xi", 3, zm)
    assert abs(a.value * np.exp(a.scale) - b.value) < 1e-12 * abs(b.value)
    assert abs(a.derivative * np.exp(a.scale) - b.derivative) < 1e-12 * abs(b.derivative)


def test_y_rejects_zero():
    with pytest.raises(sf.SpecFunError):
        sf.sph_bessel("y", 0, 0.0)
    with pytest.raises(sf.SpecFunError):
        sf.cyl_bessel("Y", 1, 0.0)


def test_scan_roots_finds_bessel_zeros():
    f = lambda x: sf.cyl_bessel("J", 0, x).value.real
    roots = sf.scan_roots(f, 0.5, 12.0)
    expect = [2.404825557695773, 5.5200781102863106, 8.653727912911013, 11.791534439014281]
    assert len(roots) == 4
    assert np.abs(np.array(roots) - np.array(expect)).max() < 1e-10
