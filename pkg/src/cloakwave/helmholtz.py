"""Outgoing time-harmonic acoustic solver for radially layered media.

Solves div(A grad u) + w^2 S u = f per angular mode by transfer matrices
over Bessel bases in piecewise-constant layers and by adaptive radial ODE
integration in radial-profile layers (the direct anisotropic path used to
cross-check the pullback route).  Exterior medium is homogeneous (1, 1);
sources are plane waves, exterior point sources / radial shells, and
interior modal densities handled by variation of parameters.

Conventions: outgoing solutions behave like h1_n / H1_n at infinity for
the e^{-i w t} time dependence; interface conditions are continuity of u
and of the radial flux a_r du/dr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from . import specfun as sf
from .config import CloakConfig, ConfigError
from .geometry import BlowupMap, cloak_layer_profiles
from .quadrature import panel_nodes


class SolverError(RuntimeError):
    pass


class ConditioningError(SolverError):
    """Transfer-matrix system remained singular after rescaling."""


# ----------------------------------------------------------------------
# media
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class IsoLayer:
    """Layer with isotropic constant matrix part alpha and scalar beta."""

    r_in: float
    r_out: float
    alpha: complex
    beta: complex


@dataclass(frozen=True)
class ProfileLayer:
    """Layer with radial/tangential matrix eigenvalue and scalar profiles."""

    r_in: float
    r_out: float
    a_r: object   # callable r -> complex
    a_t: object
    sigma: object


@dataclass(frozen=True)
class DirichletCore:
    """Sound-soft core: u = 0 on the sphere of this radius."""

    radius: float


@dataclass(frozen=True)
class LayeredMedium:
    """Contiguous radial layers, homogeneous (1, 1) exterior."""

    dimension: int
    layers: tuple

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ConfigError("dimension must be 2 or 3")
        prev = None
        for lay in self.layers:
            if isinstance(lay, DirichletCore):
                if prev is not None:
                    raise ConfigError("Dirichlet core must be innermost")
                prev = lay.radius
                continue
            if prev is None:
                if lay.r_in != 0.0:
                    raise ConfigError("innermost layer must start at r = 0")
            elif abs(lay.r_in - prev) > 1e-14:
                raise ConfigError("layers must be contiguous")
            if lay.r_out <= lay.r_in:
                raise ConfigError("layer radii must increase")
            if isinstance(lay, IsoLayer):
                if lay.alpha.real <= 0 or lay.beta.imag < -1e-15:
                    raise ConfigError("need Re alpha > 0 and Im beta >= 0")
            prev = lay.r_out

    @property
    def outer_radius(self) -> float:
        if not self.layers:
            return 0.0
        last = self.layers[-1]
        return last.radius if isinstance(last, DirichletCore) else last.r_out

    @property
    def interface_radii(self) -> list:
        out = []
        for lay in self.layers:
            if isinstance(lay, DirichletCore):
                out.append(lay.radius)
            else:
                out.append(lay.r_out)
        return out


HOMOGENEOUS_2D = LayeredMedium(2, ())
HOMOGENEOUS_3D = LayeredMedium(3, ())


def homogeneous_medium(dimension: int) -> LayeredMedium:
    return HOMOGENEOUS_3D if dimension == 3 else HOMOGENEOUS_2D


# ----------------------------------------------------------------------
# angular modes
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AngularMode:
    """One angular factor: P_n^m-type in 3D, cos/sin(n theta) in 2D.

    ``axis`` is the polar axis for axisymmetric (m = 0) families; modes
    with m != 0 are taken in the lab frame (axis +z).
    """

    dimension: int
    n: int
    m: int = 0
    parity: str = "cos"
    axis: tuple = (0.0, 0.0, 1.0)

    @property
    def eigenvalue(self) -> float:
        return self.n * (self.n + 1) if self.dimension == 3 else self.n ** 2

    @property
    def norm_sq(self) -> float:
        """Integral of the squared angular factor over the unit sphere."""
        n, m = self.n, abs(self.m)
        if self.dimension == 2:
            return 2.0 * np.pi if n == 0 else np.pi
        base = 2.0 * np.pi / (2 * n + 1) * sf.assoc_legendre_norm_sq(n, m) * (2 * n + 1) / 2.0
        if m == 0:
            return 2.0 * base
        return base

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.dimension == 2:
            theta = math.atan2(x[1], x[0]) - math.atan2(self.axis[1], self.axis[0])
            return math.cos(self.n * theta) if self.parity == "cos" else math.sin(self.n * theta)
        r = np.linalg.norm(x)
        if r == 0:
            return 1.0 if self.n == 0 else 0.0
        ax = np.asarray(self.axis, dtype=float)
        ax = ax / np.linalg.norm(ax)
        if self.m == 0:
            mu = float(np.clip(x @ ax / r, -1.0, 1.0))
            return float(sf.legendre_pn_array(self.n, mu)[self.n])
        theta = math.acos(max(-1.0, min(1.0, x[2] / r)))
        phi = math.atan2(x[1], x[0])
        p = float(sf.assoc_legendre(self.n, abs(self.m), math.cos(theta)))
        trig = math.cos(abs(self.m) * phi) if self.parity == "cos" else math.sin(abs(self.m) * phi)
        return p * trig


# ----------------------------------------------------------------------
# sources
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneWaveSource:
    """Unit plane wave exp(i w x . direction)."""

    direction: tuple

    def unit(self, dimension):
        v = np.asarray(self.direction, dtype=float)
        if v.shape != (dimension,):
            raise ConfigError("plane-wave direction has wrong dimension")
        return v / np.linalg.norm(v)


@dataclass(frozen=True)
class PointSourceSpec:
    """Exterior point source whose free field is the outgoing fundamental
    solution centered at ``location`` (must lie strictly outside B_2)."""

    location: tuple


@dataclass(frozen=True)
class ModalShellSource:
    """Exterior radial shell carrying a single angular mode.

    ``width`` = 0 gives a surface delta normalized against the radial
    measure r^{d-1} dr; a positive width gives the C^1 bump profile
    amplitude * cos^2(pi (r - radius)/width) on |r - radius| < width/2.
    With ``normalize`` the amplitude is rescaled so the full source has
    unit L^2 norm (delta shells cannot be normalized this way).
    """

    n: int
    radius: float
    width: float = 0.0
    m: int = 0
    parity: str = "cos"
    amplitude: complex = 1.0
    normalize: bool = False


@dataclass(frozen=True)
class InteriorModalSource:
    """Source density g(r) * Y on one mode, supported in the cloaked region.

    The profile is given in physical coordinates on [0, support]; the
    equivalent-coordinate solve rescales it onto [0, rho * support].
    """

    n: int
    profile: object            # callable r -> complex, physical coordinates
    support: float = 1.0
    m: int = 0
    parity: str = "cos"
    amplitude: complex = 1.0


@dataclass(frozen=True)
class ExtPiece:
    """Free-space field of one exterior radial source on one mode.

    Contributes A * reg(w r) for r <= lo and B * out(w r) for r >= hi;
    for finite-width shells the coefficients roll over smoothly across
    the support via partial Green integrals against ``profile``.
    """

    lo: float
    hi: float
    A: complex
    B: complex
    profile: object = None     # callable, only for finite width

    def coefficients(self, omega, dimension, n, r):
        if r <= self.lo:
            return self.A, 0.0 + 0j
        if r >= self.hi:
            return 0.0 + 0j, self.B
        reg = _green_partial(self.profile, omega, dimension, n, r, self.hi, "reg")
        out = _green_partial(self.profile, omega, dimension, n, self.lo, r, "out")
        return reg, out


def _green_kernels(omega, dimension, n, r):
    """(reg, out) radial basis values entering the free Green function."""
    if dimension == 3:
        j, jp, y, yp = sf.sph_jy_arrays(n, omega * r)
        return j[n], j[n] + 1j * y[n]
    J = sf.cyl_bessel("J", n, omega * r)
    H = sf.cyl_bessel("H1", n, omega * r)
    return J.value, H.value


def _green_partial(profile, omega, dimension, n, lo, hi, which):
    if hi <= lo:
        return 0.0 + 0j
    nodes, weights = panel_nodes(lo, hi, max_panel=(hi - lo) / 2 + 1e-30, n_nodes=24)
    acc = 0.0 + 0j
    for r, w in zip(nodes, weights):
        reg, out = _green_kernels(omega, dimension, n, r)
        kern = out if which == "reg" else reg
        meas = r ** (dimension - 1)
        fac = -1j * omega if dimension == 3 else -1j * np.pi / 2.0
        acc += w * fac * kern * profile(r) * meas
    return acc


@dataclass
class ModalSource:
    """Everything one radial solve needs: the angular factor, the global
    regular coefficient of a plane wave, exterior source pieces, and an
    interior density profile."""

    angular: AngularMode
    plane_reg: complex = 0.0
    ext_pieces: tuple = ()
    interior_profile: object = None     # callable r -> complex (solve coords)
    interior_support: float = 0.0

    @property
    def incident_reg(self) -> complex:
        """Total regular coefficient seen by a scatterer below all pieces."""
        return self.plane_reg + sum(p.A for p in self.ext_pieces)


def shell_green_coefficients(omega, dimension, n, shell: ModalShellSource):
    """(A, B, profile) for an exterior shell via the free Green function."""
    if shell.width == 0.0:
        reg, out = _green_kernels(omega, dimension, n, shell.radius)
        fac = -1j * omega if dimension == 3 else -1j * np.pi / 2.0
        amp = shell.amplitude
        return fac * out * amp, fac * reg * amp, None
    lo = shell.radius - shell.width / 2.0
    hi = shell.radius + shell.width / 2.0
    amp = shell.amplitude
    if shell.normalize:
        nodes, weights = panel_nodes(lo, hi, max_panel=shell.width, n_nodes=32)
        prof2 = np.array([np.cos(np.pi * (r - shell.radius) / shell.width) ** 4
                          * r ** (dimension - 1) for r in nodes])
        norm_ang = AngularMode(dimension, shell.n, shell.m, shell.parity).norm_sq
        amp = amp / np.sqrt(np.sum(weights * prof2) * norm_ang)

    def profile(r, _amp=amp, _c=shell.radius, _w=shell.width):
        if abs(r - _c) >= _w / 2.0:
            return 0.0
        return _amp * np.cos(np.pi * (r - _c) / _w) ** 2

    A = _green_partial(profile, omega, dimension, n, lo, hi, "reg")
    B = _green_partial(profile, omega, dimension, n, lo, hi, "out")
    return A, B, profile


def expand_source(source, omega: float, dimension: int, n_modes: int):
    """Decompose a source into per-mode solve inputs.

    Plane waves use the standard regular-wave expansions; point sources
    use the addition theorem; shells pass through on their single mode.
    """
    if n_modes < 1:
        raise ConfigError("n_modes must be >= 1")
    out = []
    if isinstance(source, PlaneWaveSource):
        direction = source.unit(dimension)
        for n in range(n_modes):
            if dimension == 3:
                coeff = (1j) ** n * (2 * n + 1)
            else:
                coeff = (2.0 if n else 1.0) * (1j) ** n
            ang = AngularMode(dimension, n, axis=tuple(direction))
            out.append(ModalSource(angular=ang, plane_reg=coeff))
        return out
    if isinstance(source, PointSourceSpec):
        x0 = np.asarray(source.location, dtype=float)
        r0 = float(np.linalg.norm(x0))
        if r0 <= 0:
            raise ConfigError("point source cannot sit at the origin")
        for n in range(n_modes):
            reg, outk = _green_kernels(omega, dimension, n, r0)
            if dimension == 3:
                c = 1j * omega / (4 * np.pi) * (2 * n + 1)
            else:
                c = 1j / 4.0 * (2.0 if n else 1.0)
            piece = ExtPiece(lo=r0, hi=r0, A=c * outk, B=c * reg)
            ang = AngularMode(dimension, n, axis=tuple(x0 / r0))
            out.append(ModalSource(angular=ang, ext_pieces=(piece,)))
        return out
    if isinstance(source, ModalShellSource):
        A, B, profile = shell_green_coefficients(omega, dimension, source.n, source)
        lo = source.radius - source.width / 2.0
        hi = source.radius + source.width / 2.0
        piece = ExtPiece(lo=lo, hi=hi, A=A, B=B, profile=profile)
        ang = AngularMode(dimension, source.n, source.m, source.parity)
        return [ModalSource(angular=ang, ext_pieces=(piece,))]
    if isinstance(source, InteriorModalSource):
        ang = AngularMode(dimension, source.n, source.m, source.parity)
        prof = source.profile
        amp = source.amplitude
        return [ModalSource(angular=ang,
                            interior_profile=lambda r: amp * prof(r),
                            interior_support=source.support)]
    if isinstance(source, (list, tuple)):
        merged = []
        for s in source:
            merged.extend(expand_source(s, omega, dimension, n_modes))
        return merged
    raise ConfigError(f"unknown source {source!r}")


def source_l2_norm(source, omega, dimension, n_modes=1) -> float:
    """L2 norm of a (finite-width shell / interior) source density."""
    total = 0.0
    for s in source if isinstance(source, (list, tuple)) else [source]:
        if isinstance(s, ModalShellSource):
            if s.width == 0.0:
                raise ConfigError("delta shells have no L2 norm")
            _, _, profile = shell_green_coefficients(omega, dimension, s.n, s)
            lo, hi = s.radius - s.width / 2, s.radius + s.width / 2
            nodes, weights = panel_nodes(lo, hi, max_panel=s.width, n_nodes=32)
            vals = np.array([abs(profile(r)) ** 2 * r ** (dimension - 1) for r in nodes])
            total += np.sum(weights * vals) * AngularMode(dimension, s.n, s.m, s.parity).norm_sq
        elif isinstance(s, InteriorModalSource):
            nodes, weights = panel_nodes(0.0, s.support, max_panel=0.05, n_nodes=24)
            vals = np.array([abs(s.amplitude * s.profile(r)) ** 2 * r ** (dimension - 1)
                             for r in nodes])
            total += np.sum(weights * vals) * AngularMode(dimension, s.n, s.m, s.parity).norm_sq
        else:
            raise ConfigError(f"source {s!r} has no L2 density")
    return float(np.sqrt(total))


# ----------------------------------------------------------------------
# per-layer radial bases
# ----------------------------------------------------------------------

class _IsoBasis:
    """Bessel basis of an isotropic layer: columns (regular, singular)."""

    def __init__(self, layer: IsoLayer, omega: float, dimension: int, n: int):
        self.layer = layer
        self.omega = omega
        self.dimension = dimension
        self.n = n
        self.k = omega * np.sqrt(complex(layer.beta) / complex(layer.alpha))

    def eval(self, r: float):
        """Rows (value, flux) x columns (regular, singular)."""
        k, n, al = self.k, self.n, self.layer.alpha
        z = k * r
        if self.dimension == 3:
            j, jp, y, yp = sf.sph_jy_arrays(n, z)
            f, fp, g, gp = j[n], jp[n], y[n], yp[n]
        else:
            f = complex(_cyl_cached("J", n, z))
            fp = complex(_cyl_cached("Jp", n, z))
            g = complex(_cyl_cached("Y", n, z))
            gp = complex(_cyl_cached("Yp", n, z))
        return np.array([[f, g], [al * k * fp, al * k * gp]], dtype=complex)

    def regular_state(self, r: float):
        m = self.eval(r)
        return m[:, 0]


def _cyl_cached(kind, n, z):
    if kind in ("J", "Jp"):
        ev = sf.cyl_bessel("J", n, z)
    else:
        ev = sf.cyl_bessel("Y", n, z)
    return ev.derivative if kind.endswith("p") else ev.value


class _ProfileBasis:
    """Two ODE-integrated fundamental solutions of a radial-profile layer.

    State (R, Q) with flux Q = a_r R'; columns seeded with (1, 0), (0, 1)
    at r_in and carried by an adaptive high-order integrator.
    """

    def __init__(self, layer: ProfileLayer, omega: float, dimension: int, n: int,
                 rtol: float = 1e-12, atol: float = 1e-14):
        self.layer = layer
        self.omega = omega
        self.dimension = dimension
        self.n = n
        nu = n * (n + 1) if dimension == 3 else n ** 2
        d = dimension
        a_r, a_t, sig = layer.a_r, layer.a_t, layer.sigma

        def rhs(r, u):
            R = u[0] + 1j * u[1]
            Q = u[2] + 1j * u[3]
            dR = Q / a_r(r)
            dQ = -(d - 1) / r * Q + (nu * a_t(r) / r ** 2 - omega ** 2 * sig(r)) * R
            return [dR.real, dR.imag, dQ.real, dQ.imag]

        self._sols = []
        span = (layer.r_in, layer.r_out)
        for init in ((1.0, 0.0, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0)):
            sol = solve_ivp(rhs, span, init, method="DOP853", dense_output=True,
                            rtol=rtol, atol=atol)
            if not sol.success:
                raise SolverError(
                    f"radial integration failed on [{span[0]}, {span[1]}] "
                    f"(mode {n}, omega {omega}): {sol.message}")
            self._sols.append(sol.sol)

    def eval(self, r: float):
        cols = []
        for s in self._sols:
            u = s(r)
            cols.append([u[0] + 1j * u[1], u[2] + 1j * u[3]])
        return np.array(cols, dtype=complex).T


def _layer_basis(layer, omega, dimension, n):
    if isinstance(layer, IsoLayer):
        return _IsoBasis(layer, omega, dimension, n)
    if isinstance(layer, ProfileLayer):
        return _ProfileBasis(layer, omega, dimension, n)
    raise SolverError(f"no basis for layer {layer!r}")


def _exterior_matrix(omega, dimension, n, r):
    """Columns (regular, outgoing) of the homogeneous exterior at r."""
    z = omega * r
    if dimension == 3:
        j, jp, y, yp = sf.sph_jy_arrays(n, z)
        f, fp = j[n], jp[n]
        g, gp = j[n] + 1j * y[n], jp[n] + 1j * yp[n]
    else:
        J = sf.cyl_bessel("J", n, z)
        H = sf.cyl_bessel("H1", n, z)
        f, fp, g, gp = J.value, J.derivative, H.value, H.derivative
    return np.array([[f, g], [omega * fp, omega * gp]], dtype=complex)


# ----------------------------------------------------------------------
# variation of parameters for sourced layers
# ----------------------------------------------------------------------

class _Particular:
    """Particular solution with P(r_in) = P'(r_in) = 0 inside one layer.

    Built from the layer's homogeneous Bessel basis by variation of
    parameters; ``state(r)`` returns (P, a_r P') via panel quadrature of
    the Green integrals from r_in to r.
    """

    def __init__(self, basis: _IsoBasis, g, r_lo: float, r_hi: float):
        self.basis = basis
        self.g = g
        self.r_lo = r_lo
        self.r_hi = r_hi

    def _kernels(self, r):
        k, n = self.basis.k, self.basis.n
        z = k * r
        if self.basis.dimension == 3:
            j, jp, y, yp = sf.sph_jy_arrays(n, z)
            return j[n], jp[n], y[n], yp[n]
        J = sf.cyl_bessel("J", n, z)
        Y = sf.cyl_bessel("Y", n, z)
        return J.value, J.derivative, Y.value, Y.derivative

    def state(self, r: float):
        lay = self.basis.layer
        k, al, d = self.basis.k, lay.alpha, self.basis.dimension
        lo = max(self.r_lo, lay.r_in)
        hi = min(r, self.r_hi)
        if hi <= lo:
            if r <= self.r_lo:
                return np.zeros(2, dtype=complex)
            hi = self.r_hi
        nodes, weights = panel_nodes(lo, hi, max_panel=0.05 if hi - lo < 1 else 0.25,
                                     n_nodes=24)
        ij = 0.0 + 0j   # int f * h, with h = r'^{d-1} g / alpha
        iy = 0.0 + 0j
        for rp, w in zip(nodes, weights):
            f, _, g2, _ = self._kernels(rp)
            h = rp ** (d - 1) * self.g(rp) / al
            ij += w * f * h
            iy += w * g2 * h
        f, fp, g2, gp = self._kernels(r)
        if d == 3:
            P = k * (g2 * ij - f * iy)
            dP = k * k * (gp * ij - fp * iy)
        else:
            P = np.pi / 2.0 * (g2 * ij - f * iy)
            dP = np.pi / 2.0 * k * (gp * ij - fp * iy)
        return np.array([P, al * dP], dtype=complex)


# ----------------------------------------------------------------------
# mode solve
# ----------------------------------------------------------------------

@dataclass
class ModeSolution:
    """Radial solution of one angular mode over a layered medium."""

    medium: LayeredMedium
    omega: float
    angular: AngularMode
    source: ModalSource
    layer_bases: list
    layer_coeffs: list
    layer_particulars: list
    outgoing: complex
    core_dirichlet: float = None

    @property
    def dimension(self):
        return self.angular.dimension

    def scattered_amplitude(self) -> complex:
        return self.outgoing

    def _exterior_value(self, r, with_deriv=False):
        omega, dim, n = self.omega, self.dimension, self.angular.n
        m = _exterior_matrix(omega, dim, n, r)
        reg_c = self.source.plane_reg
        out_c = self.outgoing
        for p in self.source.ext_pieces:
            a, b = p.coefficients(omega, dim, n, r)
            reg_c = reg_c + a
            out_c = out_c + b
        val = reg_c * m[0, 0] + out_c * m[0, 1]
        if not with_deriv:
            return val
        der = (reg_c * m[1, 0] + out_c * m[1, 1])  # flux with alpha = 1
        return val, der

    def radial_value(self, r: float) -> complex:
        return self._radial(r)[0]

    def radial_derivative(self, r: float) -> complex:
        return self._radial(r)[1]

    def _radial(self, r: float):
        """(value, derivative) at radius r (derivative, not flux)."""
        if r >= self.medium.outer_radius:
            v, d = self._exterior_value(r, with_deriv=True)
            return v, d
        for lay, basis, coef, part in zip(self.medium.layers, self.layer_bases,
                                          self.layer_coeffs, self.layer_particulars):
            if isinstance(lay, DirichletCore):
                if r <= lay.radius:
                    return 0.0 + 0j, 0.0 + 0j
                continue
            if lay.r_in <= r <= lay.r_out:
                m = basis.eval(r)
                state = m @ coef
                if part is not None:
                    state = state + part.state(r)
                a_r = lay.alpha if isinstance(lay, IsoLayer) else lay.a_r(r)
                return state[0], state[1] / a_r
        raise SolverError(f"radius {r} not inside the medium")


def _solve_2x2(Mcols, rhs):
    """Column-equilibrated 2x2 solve; raises ConditioningError when singular."""
    M = np.array(Mcols, dtype=complex).T
    scales = np.max(np.abs(M), axis=0)
    scales[scales == 0] = 1.0
    Ms = M / scales
    det = Ms[0, 0] * Ms[1, 1] - Ms[0, 1] * Ms[1, 0]
    if not np.isfinite(det) or abs(det) < 1e-14 * np.max(np.abs(Ms)) ** 2:
        raise ConditioningError(
            f"singular interface system (det = {det!r}); the mode is at or "
            "numerically indistinguishable from an interior resonance")
    sol = np.array([
        (rhs[0] * Ms[1, 1] - rhs[1] * Ms[0, 1]) / det,
        (Ms[0, 0] * rhs[1] - Ms[1, 0] * rhs[0]) / det,
    ])
    return sol / scales


def solve_mode(medium: LayeredMedium, omega: float, source: ModalSource) -> ModeSolution:
    """Transfer-matrix solve of one angular mode.

    Regularity at the origin (or zero Dirichlet trace), continuity of
    (u, a_r u') at interfaces, outgoing exterior with the source's
    incident regular coefficient.
    """
    if omega <= 0:
        raise ConfigError("omega must be positive")
    n = source.angular.n
    dim = source.angular.dimension
    if dim != medium.dimension:
        raise ConfigError("source and medium dimensions differ")

    layers = medium.layers
    if not layers:
        return ModeSolution(medium, omega, source.angular, source,
                            [], [], [], 0.0 + 0j)

    bases = []
    particulars = []
    # propagate state = A * w(r) + p(r) across interfaces
    w = None
    p = np.zeros(2, dtype=complex)
    coeffs_w = []
    coeffs_p = []
    start_idx = 0
    if isinstance(layers[0], DirichletCore):
        bases.append(None)
        particulars.append(None)
        coeffs_w.append(None)
        coeffs_p.append(None)
        start_idx = 1
        if len(layers) == 1:
            # bare sound-soft sphere in homogeneous space
            rc = layers[0].radius
            m_ext = _exterior_matrix(omega, dim, n, rc)
            c_inc = source.incident_reg
            s = -c_inc * m_ext[0, 0] / m_ext[0, 1]
            return ModeSolution(medium, omega, source.angular, source,
                                bases, coeffs_w, particulars, s)

    for idx in range(start_idx, len(layers)):
        lay = layers[idx]
        basis = _layer_basis(lay, omega, dim, n)
        bases.append(basis)
        part = None
        if source.interior_profile is not None and lay.r_in < source.interior_support:
            if not isinstance(lay, IsoLayer):
                raise SolverError("interior sources require isotropic layers")
            part = _Particular(basis, source.interior_profile,
                               lay.r_in, min(source.interior_support, lay.r_out))
        particulars.append(part)

        m_in = basis.eval(max(lay.r_in, 1e-300)) if lay.r_in > 0 else None
        if w is None:
            if isinstance(layers[0], DirichletCore) and idx == start_idx:
                rc = layers[0].radius
                m = basis.eval(rc)
                combo = np.array([m[0, 1], -m[0, 0]], dtype=complex)
                scale = np.max(np.abs(combo))
                combo = combo / (scale if scale > 0 else 1.0)
                coeffs_w.append(combo)
            else:
                # regular column only
                coeffs_w.append(np.array([1.0, 0.0], dtype=complex))
            coeffs_p.append(np.zeros(2, dtype=complex))
        else:
            cw = _solve_2x2([m_in[:, 0], m_in[:, 1]], w)
            cp = _solve_2x2([m_in[:, 0], m_in[:, 1]], p)
            coeffs_w.append(cw)
            coeffs_p.append(cp)
        m_out = basis.eval(lay.r_out)
        w = m_out @ coeffs_w[-1]
        p = m_out @ coeffs_p[-1]
        if part is not None:
            p = p + part.state(lay.r_out)

    # exterior matching at the outer radius
    R = medium.outer_radius
    m_ext = _exterior_matrix(omega, dim, n, R)
    c_inc = source.incident_reg
    rhs = c_inc * m_ext[:, 0] - p
    A, s = _solve_2x2([w, -m_ext[:, 1]], rhs)

    layer_coeffs = []
    for cw, cp in zip(coeffs_w, coeffs_p):
        if cw is None:
            layer_coeffs.append(None)
        else:
            layer_coeffs.append(A * cw + cp)
    return ModeSolution(medium, omega, source.angular, source,
                        bases, layer_coeffs, particulars, s)


def solve_free_mode(dimension: int, omega: float, source: ModalSource) -> ModeSolution:
    """Field of the source alone in the homogeneous background."""
    return solve_mode(homogeneous_medium(dimension), omega, source)


def default_n_modes(omega: float, radius: float) -> int:
    return int(np.ceil(omega * radius)) + 12


def solve_all_modes(medium, omega, source, n_modes=None, r_source=4.0):
    if n_modes is None:
        n_modes = default_n_modes(omega, max(medium.outer_radius, r_source))
    modal = expand_source(source, omega, medium.dimension, n_modes)
    return [solve_mode(medium, omega, ms) for ms in modal]


def eval_field(solutions, x) -> complex:
    """Sum of modal radial x angular factors at a point."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    total = 0.0 + 0j
    for sol in solutions:
        total += sol.radial_value(r) * sol.angular.value(x)
    return total


# ----------------------------------------------------------------------
# medium assembly from a CloakConfig
# ----------------------------------------------------------------------

def assemble_equivalent_medium(config: CloakConfig, omega: float) -> LayeredMedium:
    """Pulled-back small-inclusion medium for an acoustic scenario.

    fixed_lossy: [0, rho/2) (rho^{2-d} lam1, rho^{-d} lam2),
                 [rho/2, rho) (rho^{2-d}, rho^{-d}(1 + i/w));
    rho_lossy:   lossy layer (1, 1 + i/(w rho lam)) with lam = rho^{1+gamma};
    no_loss:     [0, rho) object only;
    drude_lorentz: fixed_lossy plus the dispersive cloak perturbation as a
                 radial-profile annulus on [rho, 2).
    """
    if config.is_maxwell:
        raise ConfigError("acoustic assembler got a Maxwell variant")
    if omega <= 0:
        raise ConfigError("omega must be positive")
    rho, d = config.rho, config.dimension
    lam1, lam2 = config.lam1, config.lam2
    obj_alpha = rho ** (2 - d) * lam1
    obj_beta = rho ** (-d) * lam2
    if config.variant == "no_loss":
        layers = (IsoLayer(0.0, rho, obj_alpha, obj_beta),)
    elif config.variant == "fixed_lossy":
        lossy = IsoLayer(rho / 2, rho, rho ** (2 - d), rho ** (-d) * (1 + 1j / omega))
        layers = (IsoLayer(0.0, rho / 2, obj_alpha, obj_beta), lossy)
    elif config.variant == "rho_lossy":
        lam = rho ** (1.0 + config.gamma)
        lossy = IsoLayer(rho / 2, rho, 1.0, 1.0 + 1j / (omega * rho * lam))
        layers = (IsoLayer(0.0, rho / 2, obj_alpha, obj_beta), lossy)
    elif config.variant == "drude_lorentz":
        lossy = IsoLayer(rho / 2, rho, rho ** (2 - d), rho ** (-d) * (1 + 1j / omega))
        m = BlowupMap(rho=rho, dimension=d)
        sig_c = drude_lorentz_coeff(omega, config)

        def sigma(r, _m=m, _s=sig_c):
            return 1.0 + _s * _m.det_jacobian(r)

        annulus = ProfileLayer(rho, 2.0, lambda r: 1.0 + 0j, lambda r: 1.0 + 0j, sigma)
        layers = (IsoLayer(0.0, rho / 2, obj_alpha, obj_beta), lossy, annulus)
    else:
        raise ConfigError(f"unhandled variant {config.variant}")
    return LayeredMedium(d, layers)


def assemble_physical_medium(config: CloakConfig, omega: float) -> LayeredMedium:
    """Physical-coordinate medium: cloak annulus as a radial-profile layer."""
    if config.is_maxwell:
        raise ConfigError("acoustic assembler got a Maxwell variant")
    rho, d = config.rho, config.dimension
    m = BlowupMap(rho=rho, dimension=d)
    a_r, a_t, sig = cloak_layer_profiles(m, 1.0, 1.0)
    if config.variant == "drude_lorentz":
        sig_c = drude_lorentz_coeff(omega, config)
        base = sig
        sig = lambda s, _b=base, _c=sig_c: _b(s) + _c
    cloak = ProfileLayer(1.0, 2.0, a_r, a_t, sig)
    if config.variant == "no_loss":
        layers = (IsoLayer(0.0, 1.0, config.lam1, config.lam2), cloak)
    elif config.variant in ("fixed_lossy", "drude_lorentz"):
        layers = (IsoLayer(0.0, 0.5, config.lam1, config.lam2),
                  IsoLayer(0.5, 1.0, 1.0, 1.0 + 1j / omega), cloak)
    elif config.variant == "rho_lossy":
        lam = rho ** (1.0 + config.gamma)
        layers = (IsoLayer(0.0, 0.5, config.lam1, config.lam2),
                  IsoLayer(0.5, 1.0, rho ** (d - 2),
                           rho ** d * (1 + 1j / (omega * rho * lam))), cloak)
    else:
        raise ConfigError(f"unhandled variant {config.variant}")
    return LayeredMedium(d, layers)


def drude_lorentz_coeff(omega: float, config) -> complex:
    """Dispersive cloak coefficient sigma_N / (w_c^2 - w^2 - i sigma_D w)."""
    wc = config.omega_c
    return config.sigma_n / (wc ** 2 - omega ** 2 - 1j * config.sigma_d * omega)


def pullback_interior_source(source: InteriorModalSource, rho: float,
                             dimension: int) -> InteriorModalSource:
    """Interior density in equivalent coordinates: rho^{-d} g(r/rho)."""
    g = source.profile
    scale = rho ** (-dimension)

    def prof(r, _g=g, _s=scale, _rho=rho):
        return _s * _g(r / _rho)

    return replace(source, profile=prof, support=rho * source.support)


def solve_config(config: CloakConfig, omega: float, source, n_modes=None,
                 coords: str = "equivalent"):
    """Solve a cloak scenario; returns the per-mode solution list.

    ``coords`` picks the pulled-back small-inclusion route ('equivalent')
    or the direct anisotropic physical route ('physical').  Exterior
    sources are identical in both; interior densities are rescaled for
    the equivalent route.
    """
    if coords == "equivalent":
        medium = assemble_equivalent_medium(config, omega)
    elif coords == "physical":
        medium = assemble_physical_medium(config, omega)
    else:
        raise ConfigError(f"coords must be 'equivalent' or 'physical', not {coords!r}")
    src = source
    if coords == "equivalent":
        if isinstance(source, InteriorModalSource):
            src = pullback_interior_source(source, config.rho, config.dimension)
        elif isinstance(source, (list, tuple)):
            src = [pullback_interior_source(s, config.rho, config.dimension)
                   if isinstance(s, InteriorModalSource) else s for s in source]
    return solve_all_modes(medium, omega, src, n_modes=n_modes)


def solve_anisotropic_direct(config: CloakConfig, omega: float, source,
                             n_modes=None):
    """Physical-coordinate solve through the anisotropic cloak annulus."""
    return solve_config(config, omega, source, n_modes=n_modes, coords="physical")


def solve_free(config_dimension: int, omega: float, source, n_modes=None):
    """Homogeneous-background solve (the comparison field u)."""
    medium = homogeneous_medium(config_dimension)
    return solve_all_modes(medium, omega, source, n_modes=n_modes)


# ----------------------------------------------------------------------
# norms
# ----------------------------------------------------------------------

def _mode_pairs(sols_c, sols_free):
    if len(sols_c) != len(sols_free):
        raise SolverError("solution lists differ in length")
    for a, b in zip(sols_c, sols_free):
        if a.angular != b.angular:
            raise SolverError("solution lists are not mode-aligned")
        yield a, b


def visibility_norm(sols_c, sols_free, region=(2.0, 4.0), norm: str = "h1") -> float:
    """Norm of the field discrepancy over an exterior annulus.

    Mode orthogonality reduces the norm to radial integrals; since both
    solutions share their sources, the difference per mode is the
    scattered-amplitude difference times the outgoing radial factor.
    """
    a, b = region
    total = 0.0
    for sc, sfree in _mode_pairs(sols_c, sols_free):
        ds = sc.outgoing - sfree.outgoing
        if ds == 0:
            continue
        omega, dim, n = sc.omega, sc.dimension, sc.angular.n
        if a < max(sc.medium.outer_radius, sfree.medium.outer_radius):
            raise SolverError("visibility region must lie in the common exterior")
        nu = sc.angular.eigenvalue
        ang = sc.angular.norm_sq
        breaks = []
        for p in sc.source.ext_pieces:
            breaks.extend([p.lo, p.hi])
        nodes, weights = panel_nodes(a, b, breakpoints=breaks,
                                     max_panel=min(0.5, 2 * np.pi / (6 * omega)))
        acc_l2 = 0.0
        acc_h1 = 0.0
        for r, w in zip(nodes, weights):
            m = _exterior_matrix(omega, dim, n, r)
            val = ds * m[0, 1]
            der = ds * m[1, 1]
            meas = r ** (dim - 1)
            acc_l2 += w * abs(val) ** 2 * meas
            acc_h1 += w * (abs(der) ** 2 + nu * abs(val / r) ** 2) * meas
        if norm == "l2":
            total += ang * acc_l2
        elif norm == "h1":
            total += ang * (acc_l2 + acc_h1)
        elif norm == "h1_semi":
            total += ang * acc_h1
        else:
            raise SolverError(f"unknown norm {norm!r}")
    return float(np.sqrt(total))


def field_region_norms(solutions, region=(2.0, 4.0)):
    """(L2^2, H1-seminorm^2) of the full field over an annulus."""
    a, b = region
    l2 = 0.0
    h1 = 0.0
    for sol in solutions:
        nu = sol.angular.eigenvalue
        ang = sol.angular.norm_sq
        dim = sol.dimension
        breaks = list(sol.medium.interface_radii)
        for p in sol.source.ext_pieces:
            breaks.extend([p.lo, p.hi])
        nodes, weights = panel_nodes(a, b, breakpoints=breaks,
                                     max_panel=min(0.5, 2 * np.pi / (6 * sol.omega)))
        for r, w in zip(nodes, weights):
            val, der = sol._radial(r)
            meas = r ** (dim - 1)
            l2 += w * abs(val) ** 2 * meas * ang
            h1 += w * (abs(der) ** 2 + nu * abs(val / r) ** 2) * meas * ang
    return l2, h1


def interior_norms_physical(solutions, rho: float):
    """(L2^2, H1^2) of the physical field over the cloaked ball B_1.

    Takes equivalent-coordinate solutions; the physical norms follow from
    the scaling identities ||u_c||^2_{L2(B_1)} = rho^{-d} ||u_rho||^2_{L2(B_rho)}
    and ||grad u_c||^2 = rho^{2-d} ||grad u_rho||^2_{L2(B_rho)}.
    """
    l2 = 0.0
    h1s = 0.0
    for sol in solutions:
        d = sol.dimension
        nu = sol.angular.eigenvalue
        ang = sol.angular.norm_sq
        breaks = [r for r in sol.medium.interface_radii if r < rho]
        nodes, weights = panel_nodes(1e-9, rho, breakpoints=breaks,
                                     max_panel=rho / 8.0)
        for r, w in zip(nodes, weights):
            val, der = sol._radial(r)
            meas = r ** (d - 1)
            l2 += w * abs(val) ** 2 * meas * ang
            h1s += w * (abs(der) ** 2 + nu * abs(val / r) ** 2) * meas * ang
    d = solutions[0].dimension if solutions else 3
    l2_phys = rho ** (-d) * l2
    h1_phys = l2_phys + rho ** (2 - d) * h1s
    return l2_phys, h1_phys


def scattering_matrix_entry(sol: ModeSolution) -> complex:
    """Modal S-matrix entry 1 + 2 s/c; unitary (|S| = 1) for lossless media."""
    c = sol.source.incident_reg
    if c == 0:
        raise SolverError("mode not excited; S-matrix entry undefined")
    return 1.0 + 2.0 * sol.outgoing / c
