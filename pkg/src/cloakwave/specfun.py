"""Cylindrical and spherical Bessel families with derivatives.

Everything the mode solvers need: J/Y/H1 (cylindrical, complex argument,
via scipy's AMOS routines), j/y/h1 (spherical, complex argument, computed
from the closed trigonometric recursions with a Miller-type downward
recurrence for j), the Riccati functions psi/chi/xi, and the Legendre /
angular functions P_n^m, pi_n, tau_n.

Conventions:
  * chi_n(z) = -z * y_n(z), so xi_n = z * h1_n = psi_n - i*chi_n.
  * Associated Legendre P_n^m carries no Condon-Shortley phase:
    P_n^m(mu) = (1-mu^2)^(m/2) d^m P_n/dmu^m, hence P_1^1(cos t) = +sin t.
  * pi_n = P_n^1/sin(theta) = dP_n/dmu, tau_n = dP_n^1/dtheta, so
    pi_1 = 1 and tau_1 = cos(theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp


class SpecFunError(ValueError):
    """Invalid argument or non-finite result in a special-function call."""


@dataclass(frozen=True)
class BesselEval:
    """One function evaluation: order, argument, value and first derivative.

    ``scale`` is a log-magnitude offset: the true value is
    ``value * exp(scale)`` (and likewise for the derivative).  It is 0
    except for the explicitly scaled Riccati variants.
    """

    order: int
    argument: complex
    value: complex
    derivative: complex
    scale: complex = 0.0


def _require_finite(name, n, z, *vals):
    for v in vals:
        if not np.isfinite(v):
            raise SpecFunError(
                f"{name}(n={n}, z={z!r}) overflowed or is undefined; "
                "use a scaled variant for arguments with large |Im z|"
            )


# ----------------------------------------------------------------------
# cylindrical family (AMOS-backed)
# ----------------------------------------------------------------------

def cyl_bessel(kind: str, n: int, z: complex) -> BesselEval:
    """Cylindrical Bessel function of integer order with derivative.

    kind: 'J', 'Y' or 'H1'.  H1 = J + iY exactly.  Y and H1 reject z = 0.
    """
    if n < 0:
        raise SpecFunError("order must be nonnegative")
    z = complex(z)
    if kind == "J":
        if z == 0:
            val = 1.0 + 0j if n == 0 else 0.0 + 0j
            der = 0.5 + 0j if n == 1 else 0.0 + 0j
            return BesselEval(n, z, val, der)
        val = complex(_sp.jv(n, z))
        der = complex(_sp.jvp(n, z))
    elif kind in ("Y", "H1"):
        if z == 0:
            raise SpecFunError(f"{kind}_n is singular at z = 0")
        if kind == "Y":
            val = complex(_sp.yv(n, z))
            der = complex(_sp.yvp(n, z))
        else:
            # assembled from J and Y so that H1 = J + iY holds exactly
            val = complex(_sp.jv(n, z)) + 1j * complex(_sp.yv(n, z))
            der = complex(_sp.jvp(n, z)) + 1j * complex(_sp.yvp(n, z))
    else:
        raise SpecFunError(f"unknown cylindrical kind {kind!r}")
    _require_finite(f"cyl_bessel[{kind}]", n, z, val, der)
    return BesselEval(n, z, val, der)


def cyl_jy_arrays(nmax: int, z: complex):
    """(J_n, J_n', Y_n, Y_n') for n = 0..nmax at one complex argument."""
    ns = np.arange(nmax + 1)
    j = _sp.jv(ns, z)
    jp = _sp.jvp(ns, z)
    y = _sp.yv(ns, z)
    yp = _sp.yvp(ns, z)
    out = (np.asarray(j, complex), np.asarray(jp, complex),
           np.asarray(y, complex), np.asarray(yp, complex))
    if not all(np.all(np.isfinite(a)) for a in out):
        raise SpecFunError(f"cylindrical overflow at z={z!r}, nmax={nmax}")
    return out


# ----------------------------------------------------------------------
# spherical family (closed trig recursions)
# ----------------------------------------------------------------------

_RENORM = 1e250


def sph_jn_array(nmax: int, z: complex) -> np.ndarray:
    """j_0..j_nmax by Miller downward recurrence, normalized on j_0/j_1.

    Downward recurrence is stable for all n; the anchor is whichever of
    the closed forms sin(z)/z, sin(z)/z^2 - cos(z)/z is larger.
    """
    z = complex(z)
    if z == 0:
        out = np.zeros(nmax + 1, complex)
        out[0] = 1.0
        return out
    nstart = nmax + int(1.2 * abs(z)) + 22
    s_up = 0.0 + 0j      # placeholder for s_{n+1}
    s = 1e-30 + 0j       # s_n at n = nstart
    vals = np.zeros(nstart + 1, complex)
    vals[nstart] = s
    for n in range(nstart, 0, -1):
        s_dn = (2 * n + 1) / z * s - s_up
        s_up, s = s, s_dn
        vals[n - 1] = s
        if abs(s.real) > _RENORM or abs(s.imag) > _RENORM:
            # rescale everything stored so far; the whole sequence stays
            # uniformly scaled and the anchor ratio below fixes the factor
            vals[n - 1:] /= _RENORM
            s_up /= _RENORM
            s /= _RENORM
    j0 = np.sin(z) / z
    j1 = np.sin(z) / z ** 2 - np.cos(z) / z
    # pick the anchor with the better-conditioned ratio
    if abs(j0) >= abs(j1) or vals[1] == 0:
        ratio = j0 / vals[0]
    else:
        ratio = j1 / vals[1]
    out = vals[: nmax + 1] * ratio
    if not np.all(np.isfinite(out)):
        raise SpecFunError(f"spherical j overflow at z={z!r}, nmax={nmax}")
    return out


def _upward(nmax: int, z: complex, f0: complex, f1: complex) -> np.ndarray:
    out = np.zeros(nmax + 1, complex)
    out[0] = f0
    if nmax >= 1:
        out[1] = f1
    for n in range(1, nmax):
        out[n + 1] = (2 * n + 1) / z * out[n] - out[n - 1]
    return out


def sph_yn_array(nmax: int, z: complex) -> np.ndarray:
    """y_0..y_nmax at one complex argument.

    Real z uses the classical upward recurrence (y dominant).  Off the
    real axis the upward pass must run on the Hankel branch that grows
    with the order through the turning region -- the exponentially small
    one, h1 for Im z > 0 and h2 for Im z < 0 -- and y is recovered from
    it and the Miller-computed j, which stays accurate for any |Im z|.
    """
    z = complex(z)
    if z == 0:
        raise SpecFunError("y_n is singular at z = 0")
    if z.imag == 0:
        out = _upward(nmax, z, -np.cos(z) / z, -np.cos(z) / z ** 2 - np.sin(z) / z)
    elif z.imag > 0:
        h1 = _upward(nmax, z, -1j * np.exp(1j * z) / z,
                     -(z + 1j) * np.exp(1j * z) / z ** 2)
        out = -1j * (h1 - sph_jn_array(nmax, z))
    else:
        h2 = _upward(nmax, z, 1j * np.exp(-1j * z) / z,
                     -(z - 1j) * np.exp(-1j * z) / z ** 2)
        out = 1j * (h2 - sph_jn_array(nmax, z))
    if not np.all(np.isfinite(out)):
        raise SpecFunError(f"spherical y overflow at z={z!r}, nmax={nmax}")
    return out


def _sph_derivative(vals: np.ndarray, z: complex) -> np.ndarray:
    """f_n' = f_{n-1} - (n+1)/z f_n for any spherical Bessel family."""
    if len(vals) < 2:
        raise SpecFunError("need at least orders 0..1 for derivatives")
    n = np.arange(len(vals))
    der = np.empty_like(vals)
    der[0] = -vals[1]
    der[1:] = vals[:-1] - (n[1:] + 1) / z * vals[1:]
    return der


def sph_jy_arrays(nmax: int, z: complex):
    """(j, j', y, y') arrays for n = 0..nmax at one complex argument."""
    nb = max(nmax, 1)
    j = sph_jn_array(nb + 1, z)
    y = sph_yn_array(nb + 1, z)
    jp = _sph_derivative(j, z)[: nmax + 1]
    yp = _sph_derivative(y, z)[: nmax + 1]
    return j[: nmax + 1], jp, y[: nmax + 1], yp


def sph_bessel(kind: str, n: int, z: complex) -> BesselEval:
    """Spherical Bessel function j/y/h1 of order n with derivative."""
    if n < 0:
        raise SpecFunError("order must be nonnegative")
    z = complex(z)
    if kind == "j":
        if z == 0:
            val = 1.0 + 0j if n == 0 else 0.0 + 0j
            der = (1 / 3) + 0j if n == 1 else 0.0 + 0j
            return BesselEval(n, z, val, der)
        j, jp, _, _ = sph_jy_arrays(n, z)
        return BesselEval(n, z, j[n], jp[n])
    if kind in ("y", "h1"):
        if z == 0:
            raise SpecFunError(f"{kind}_n is singular at z = 0")
        j, jp, y, yp = sph_jy_arrays(n, z)
        if kind == "y":
            return BesselEval(n, z, y[n], yp[n])
        val = j[n] + 1j * y[n]
        der = jp[n] + 1j * yp[n]
        _require_finite("sph_bessel[h1]", n, z, val, der)
        return BesselEval(n, z, val, der)
    raise SpecFunError(f"unknown spherical kind {kind!r}")


# ----------------------------------------------------------------------
# Riccati-Bessel functions
# ----------------------------------------------------------------------

def _xi_scaled_upward(nmax: int, z: complex):
    """xi_n exp(-iz) and its z-derivative scaled the same way.

    In the upper half plane xi exp(-iz) is O(1) and its upward recurrence
    runs on the branch that grows with order, so it stays accurate where
    psi - i chi would cancel catastrophically.
    """
    vals = _upward(nmax, z, -1j + 0j, -(z + 1j) / z)
    ders = np.empty_like(vals)
    # xi_0 = -i e^{iz}, so the scaled derivative at order 0 is exactly 1;
    # above that, xi'_n = xi_{n-1} - (n/z) xi_n (scaling commutes)
    ders[0] = 1.0 + 0j
    if nmax >= 1:
        n = np.arange(1, nmax + 1)
        ders[1:] = vals[:-1] - (n / z) * vals[1:]
    return vals, ders


def riccati(kind: str, n: int, z: complex, scaled: bool = False) -> BesselEval:
    """Riccati-Bessel psi/chi/xi with derivative.

    psi_n = z j_n, chi_n = -z y_n, xi_n = z h1_n = psi_n - i chi_n.
    With ``scaled=True`` both value and derivative carry a removed factor
    exp(scale): true = value * exp(scale).  scale is i*z for xi (the
    spec'd e^{-iz} xi_n variant) and |Im z| for psi/chi.
    """
    z = complex(z)
    if z == 0:
        raise SpecFunError("Riccati functions are singular/degenerate at z = 0")
    if kind == "xi" and z.imag > 0:
        vals, ders = _xi_scaled_upward(n, z)
        if scaled:
            val, der, scale = vals[n], ders[n], 1j * z
        else:
            fac = np.exp(1j * z)
            val, der, scale = vals[n] * fac, ders[n] * fac, 0.0
        _require_finite("riccati[xi]", n, z, val, der)
        return BesselEval(n, z, val, der, scale)
    j, jp, y, yp = sph_jy_arrays(n, z)
    if kind == "psi":
        val, der = z * j[n], j[n] + z * jp[n]
    elif kind == "chi":
        val, der = -z * y[n], -(y[n] + z * yp[n])
    elif kind == "xi":
        h, hp = j[n] + 1j * y[n], jp[n] + 1j * yp[n]
        val, der = z * h, h + z * hp
    else:
        raise SpecFunError(f"unknown Riccati kind {kind!r}")
    scale = 0.0
    if scaled:
        scale = complex(1j * z) if kind == "xi" else abs(z.imag)
        fac = np.exp(-scale)
        val, der = val * fac, der * fac
    _require_finite(f"riccati[{kind}]", n, z, val, der)
    return BesselEval(n, z, val, der, scale)


def riccati_arrays(nmax: int, z: complex):
    """(psi, psi', xi, xi') arrays for n = 0..nmax."""
    j, jp, y, yp = sph_jy_arrays(nmax, z)
    psi = z * j
    psip = j + z * jp
    h = j + 1j * y
    hp = jp + 1j * yp
    xi = z * h
    xip = h + z * hp
    return psi, psip, xi, xip


# ----------------------------------------------------------------------
# Legendre / Mie angular functions
# ----------------------------------------------------------------------

def legendre_pn_array(nmax: int, mu):
    """P_0..P_nmax(mu) by the three-term recurrence; mu scalar or array."""
    mu = np.asarray(mu, dtype=float)
    out = np.zeros((nmax + 1,) + mu.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = mu
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + 1) * mu * out[n] - n * out[n - 1]) / (n + 1)
    return out


def mie_pi_tau_arrays(nmax: int, theta):
    """pi_n and tau_n for n = 0..nmax (pi_0 = tau_0 = 0).

    pi_n = dP_n/dmu, tau_n = n mu pi_n - (n+1) pi_{n-1}; both polynomial
    in mu = cos(theta), so the poles need no special handling.
    """
    theta = np.asarray(theta, dtype=float)
    mu = np.cos(theta)
    pi = np.zeros((nmax + 1,) + mu.shape)
    tau = np.zeros_like(pi)
    if nmax >= 1:
        pi[1] = 1.0
        tau[1] = mu
    for n in range(2, nmax + 1):
        pi[n] = ((2 * n - 1) * mu * pi[n - 1] - n * pi[n - 2]) / (n - 1)
        tau[n] = n * mu * pi[n] - (n + 1) * pi[n - 1]
    return pi, tau


def assoc_legendre(n: int, m: int, mu):
    """P_n^m(mu) without the Condon-Shortley phase, |m| <= n."""
    if m < 0 or m > n:
        raise SpecFunError("need 0 <= m <= n")
    mu = np.asarray(mu, dtype=float)
    if m == 0:
        return legendre_pn_array(n, mu)[n]
    s = np.sqrt(np.maximum(0.0, 1.0 - mu * mu))
    pmm = np.ones_like(mu)
    for k in range(1, m + 1):
        pmm = pmm * (2 * k - 1) * s
    if n == m:
        return pmm
    pmm1 = (2 * m + 1) * mu * pmm
    if n == m + 1:
        return pmm1
    for k in range(m + 2, n + 1):
        pmm, pmm1 = pmm1, ((2 * k - 1) * mu * pmm1 - (k + m - 1) * pmm) / (k - m)
    return pmm1


def legendre_angular(n: int, m: int, theta):
    """(P_n^m(cos theta), pi_n(theta), tau_n(theta)).

    theta in [0, pi], scalar or array.  pi_n, tau_n are the order-1 Mie
    angular functions regardless of m.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < -1e-12) or np.any(theta > np.pi + 1e-12):
        raise SpecFunError("theta must lie in [0, pi]")
    p = assoc_legendre(n, abs(m), np.cos(theta))
    pi_n, tau_n = mie_pi_tau_arrays(n, theta)
    return p, pi_n[n], tau_n[n]


def legendre_theta_funcs(n: int, m: int, theta):
    """(P_n^m, dP_n^m/dtheta, m P_n^m/sin(theta)) at theta in (0, pi).

    The last two are the vector-harmonic component functions; for m = 1
    they reduce to tau_n and pi_n.
    """
    theta = np.asarray(theta, dtype=float)
    mu = np.cos(theta)
    s = np.sin(theta)
    p = assoc_legendre(n, m, mu)
    pm1 = assoc_legendre(n - 1, m, mu) if n - 1 >= m else np.zeros_like(mu)
    dp = (n * mu * p - (n + m) * pm1) / s
    pms = m * p / s if m > 0 else np.zeros_like(mu)
    return p, dp, pms


def assoc_legendre_norm_sq(n: int, m: int) -> float:
    """Integral of (P_n^m)^2 over mu in [-1, 1]."""
    m = abs(m)
    fac = 1.0
    for k in range(n - m + 1, n + m + 1):
        fac *= k
    return 2.0 / (2 * n + 1) * fac


# ----------------------------------------------------------------------
# root bracketing / bisection (resonance scans and zero tables)
# ----------------------------------------------------------------------

def bisect_root(f, a: float, b: float, tol: float = 1e-12, maxit: int = 200) -> float:
    """Bisection on a bracketing interval [a, b] with f(a) f(b) < 0."""
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if fa * fb > 0:
        raise ValueError(f"no sign change on [{a}, {b}]")
    while b - a > tol * max(1.0, abs(a), abs(b)) and maxit > 0:
        c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0:
            return c
        if fa * fc < 0:
            b, fb = c, fc
        else:
            a, fa = c, fc
        maxit -= 1
    return 0.5 * (a + b)


def scan_roots(f, lo: float, hi: float, step: float = np.pi / 8,
               tol: float = 1e-12) -> list[float]:
    """All simple roots of a smooth real function on [lo, hi].

    Bracketing scan with the given step followed by bisection; intended
    for the resonance conditions, which have well-separated simple roots.
    """
    if hi <= lo:
        return []
    nstep = max(2, int(np.ceil((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, nstep)
    vals = np.array([f(g) for g in grid])
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(bisect_root(f, grid[i], grid[i + 1], tol))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    return roots
