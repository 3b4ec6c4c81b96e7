"""Radial blow-up map, its Jacobian, and coefficient/field pushforwards.

The map expands the ball of radius rho onto the unit ball, transitions
linearly across the annulus rho < |x| < 2 and is the identity outside
|x| = 2.  All operations below work for any radial map r -> phi(r)
implemented by a :class:`RadialMap`; the three-branch blow-up map is the
concrete case used by the cloak assemblers.

Orientation convention: (grad F)_{ij} = dF_i/dx_j, verified against the
finite-difference oracle in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientField:
    """Pushforward of an (A, sigma) pair at one point.

    ``matrix`` is the full d x d symmetric matrix; ``radial`` and
    ``tangential`` are its eigenvalues in the radial eigenbasis (the
    layered solvers consume these directly); ``scalar`` is the mapped
    scalar coefficient.
    """

    matrix: np.ndarray
    scalar: complex
    radial: complex
    tangential: complex


class RadialMap:
    """A bijective radial map y = phi(|x|) x/|x| fixing the origin.

    Subclasses provide ``radius_map``, ``radius_slope`` and
    ``radius_inverse``.  ``side`` selects the branch at profile kinks:
    'outer' (default, the branch valid just above the interface radius)
    or 'inner'.
    """

    dimension: int

    def radius_map(self, r: float) -> float:
        raise NotImplementedError

    def radius_slope(self, r: float, side: str = "outer") -> float:
        raise NotImplementedError

    def radius_inverse(self, s: float) -> float:
        raise NotImplementedError

    # -- vector operations -------------------------------------------------

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros_like(x)
        return (self.radius_map(r) / r) * x

    def inverse(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        s = float(np.linalg.norm(y))
        if s == 0.0:
            return np.zeros_like(y)
        return (self.radius_inverse(s) / s) * y

    def jacobian(self, x, side: str = "outer") -> np.ndarray:
        """grad F at x: slope on the radial direction, phi(r)/r tangentially."""
        x = np.asarray(x, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            raise GeometryError("Jacobian undefined at the origin")
        rhat = x / r
        proj = np.outer(rhat, rhat)
        eye = np.eye(len(x))
        return self.radius_slope(r, side) * proj + (self.radius_map(r) / r) * (eye - proj)

    def det_jacobian(self, r: float, side: str = "outer") -> float:
        d = self.dimension
        return self.radius_slope(r, side) * (self.radius_map(r) / r) ** (d - 1)


@dataclass(frozen=True)
class BlowupMap(RadialMap):
    """Three-branch radial blow-up: B_rho -> B_1, identity outside B_2."""

    rho: float
    dimension: int

    def __post_init__(self):
        if not 0.0 < self.rho < 0.5:
            raise GeometryError(f"rho must lie in (0, 1/2), got {self.rho}")
        if self.dimension not in (2, 3):
            raise GeometryError("dimension must be 2 or 3")

    def radius_map(self, r: float) -> float:
        rho = self.rho
        if r >= 2.0:
            return r
        if r >= rho:
            return (2.0 - 2.0 * rho + r) / (2.0 - rho)
        return r / rho

    def radius_slope(self, r: float, side: str = "outer") -> float:
        rho = self.rho
        if side == "outer":
            if r >= 2.0:
                return 1.0
            if r >= rho:
                return 1.0 / (2.0 - rho)
            return 1.0 / rho
        if side == "inner":
            if r > 2.0:
                return 1.0
            if r > rho:
                return 1.0 / (2.0 - rho)
            return 1.0 / rho
        raise GeometryError(f"side must be 'outer' or 'inner', got {side!r}")

    def radius_inverse(self, s: float) -> float:
        rho = self.rho
        if s >= 2.0:
            return s
        if s >= 1.0:
            return (2.0 - rho) * s - (2.0 - 2.0 * rho)
        return rho * s


def map_forward(m: RadialMap, x) -> np.ndarray:
    return m.forward(x)


def map_inverse(m: RadialMap, y) -> np.ndarray:
    return m.inverse(y)


def jacobian(m: RadialMap, x, side: str = "outer") -> np.ndarray:
    return m.jacobian(x, side)


def pushforward_coeffs(m: RadialMap, A, sigma, x, side: str = "outer") -> CoefficientField:
    """Pushforward (grad F A grad F^T / |det|, sigma / |det|) at F(x).

    ``A`` may be a scalar (isotropic) or a symmetric d x d array.  The
    Jacobian determinant must be positive.
    """
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise GeometryError("pushforward undefined at the origin")
    d = m.dimension
    slope = m.radius_slope(r, side)
    ratio = m.radius_map(r) / r
    det = slope * ratio ** (d - 1)
    if not det > 0:
        raise GeometryError(f"degenerate Jacobian (det = {det}) at |x| = {r}")
    J = m.jacobian(x, side)
    A = np.asarray(A, dtype=complex)
    if A.ndim == 0:
        Amat = A * np.eye(d)
    else:
        Amat = A
        if Amat.shape != (d, d):
            raise GeometryError(f"A must be scalar or {d}x{d}")
        if not np.allclose(Amat, Amat.T, rtol=1e-12, atol=1e-12):
            raise GeometryError("A must be symmetric")
    matrix = J @ Amat @ J.T / det
    rhat = x / r
    radial = complex(rhat @ matrix @ rhat)
    # any tangential unit vector gives the same eigenvalue for isotropic A
    tang = None
    if A.ndim == 0:
        radial = complex(A) * slope ** 2 / det
        tang = complex(A) * ratio ** 2 / det
    else:
        t = _any_tangent(rhat)
        tang = complex(t @ matrix @ t)
    return CoefficientField(matrix=matrix, scalar=complex(sigma) / det,
                            radial=radial, tangential=tang)


def _any_tangent(rhat: np.ndarray) -> np.ndarray:
    k = int(np.argmin(np.abs(rhat)))
    e = np.zeros_like(rhat)
    e[k] = 1.0
    t = e - (e @ rhat) * rhat
    return t / np.linalg.norm(t)


def pushforward_field(m: RadialMap, field, y, side: str = "outer") -> np.ndarray:
    """(grad F^{-T} E) o F^{-1} evaluated at y; ``field`` maps x -> vector."""
    y = np.asarray(y, dtype=float)
    x = m.inverse(y)
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise GeometryError("field pushforward undefined at the origin")
    J = m.jacobian(x, side)
    det = np.linalg.det(J)
    if not det > 0:
        raise GeometryError(f"degenerate Jacobian (det = {det}) at |x| = {r}")
    E = np.asarray(field(x), dtype=complex)
    return np.linalg.solve(J.T, E)


def cloak_layer_profiles(m: RadialMap, alpha: complex, beta: complex):
    """Radial/tangential/scalar profiles of the pushforward medium.

    For the annulus an isotropic background (alpha, beta) is mapped onto:
    returns callables (a_r(s), a_t(s), sig(s)) in image coordinates s,
    with r = phi^{-1}(s) evaluated on the middle branch.
    """
    d = m.dimension

    def a_r(s):
        r = m.radius_inverse(s)
        slope = m.radius_slope(r, "outer")
        return alpha * slope * (r / s) ** (d - 1)

    def a_t(s):
        r = m.radius_inverse(s)
        slope = m.radius_slope(r, "outer")
        return alpha * (s / r) ** (3 - d) / slope

    def sig(s):
        r = m.radius_inverse(s)
        slope = m.radius_slope(r, "outer")
        return beta * (r / s) ** (d - 1) / slope

    return a_r, a_t, sig
