"""Quadrature and real spherical harmonics on the unit sphere.

The grid is Gauss-Legendre in colatitude crossed with a uniform (trapezoid)
rule in longitude, which integrates band-limited functions exactly up to the
grid's degree.  Spectral fields use the orthonormal real basis

    Y_l0        = Pbar_l0(cos th)
    Y_lm^cos    = sqrt(2) Pbar_lm(cos th) cos(m ph)
    Y_lm^sin    = sqrt(2) Pbar_lm(cos th) sin(m ph)

with Pbar the fully normalized associated Legendre functions, so that the
surface integral of Y^2 is one.  The solver below finds, for smooth F, a
constant c and a tangent vector field h with (gamma, curl h) = F + c on the
sphere: it picks c so that F + c has zero mean, inverts the Laplace-Beltrami
operator in the basis above, and takes h as the rotated surface gradient of
the resulting potential, extended to R^3 as a degree-zero homogeneous field.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import DomainError, ScalarField, VectorField3, fd_curl

Array = np.ndarray

FOUR_PI = 4.0 * np.pi


# ---------------------------------------------------------------------------
# grid and quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereGrid:
    """Product quadrature grid exact for band limit roughly 2L."""

    L: int
    x: Array        # Gauss-Legendre nodes, cos(theta), shape (ntheta,)
    w: Array        # Gauss-Legendre weights, shape (ntheta,)
    phi: Array      # uniform longitudes, shape (nphi,)

    @property
    def ntheta(self) -> int:
        return self.x.size

    @property
    def nphi(self) -> int:
        return self.phi.size

    def points(self) -> Array:
        """All grid points as unit vectors, shape (ntheta, nphi, 3)."""
        st = np.sqrt(1.0 - self.x**2)
        ct = self.x
        cp, sp = np.cos(self.phi), np.sin(self.phi)
        pts = np.empty((self.ntheta, self.nphi, 3))
        pts[..., 0] = st[:, None] * cp[None, :]
        pts[..., 1] = st[:, None] * sp[None, :]
        pts[..., 2] = ct[:, None] * np.ones_like(cp)[None, :]
        return pts


@lru_cache(maxsize=8)
def make_grid(L: int) -> SphereGrid:
    ntheta = 2 * (L + 1)
    nphi = 2 * L + 1
    x, w = np.polynomial.legendre.leggauss(ntheta)
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    return SphereGrid(L, x, w, phi)


def sphere_quadrature(field, L: int = 32) -> float:
    """Surface integral of a scalar field over the unit sphere."""
    grid = make_grid(L)
    pts = grid.points()
    vals = np.array([[field(pts[i, j]) for j in range(grid.nphi)]
                     for i in range(grid.ntheta)])
    if not np.all(np.isfinite(vals)):
        raise DomainError("field is non-finite on the quadrature grid")
    return float((grid.w @ vals.sum(axis=1)) * (2.0 * np.pi / grid.nphi))


# ---------------------------------------------------------------------------
# normalized associated Legendre functions
# ---------------------------------------------------------------------------

def _legendre_tables(L: int, x: Array) -> tuple[Array, Array]:
    """Pbar_lm(x) and d/dtheta Pbar_lm for all l, m <= L.

    x is an array of cos(theta) values strictly inside (-1, 1); the standard
    three-term recursion is run once per degree with the order dimension
    vectorized.  Returns arrays of shape (L+1, L+1, len(x)) indexed [l, m].
    """
    x = np.asarray(x, float)
    n = x.size
    s = np.sqrt(1.0 - x**2)
    P = np.zeros((L + 1, L + 1, n))
    P[0, 0] = 1.0 / np.sqrt(FOUR_PI)
    for m in range(1, L + 1):
        P[m, m] = s * np.sqrt((2.0 * m + 1.0) / (2.0 * m)) * P[m - 1, m - 1]
    for m in range(L):
        P[m + 1, m] = np.sqrt(2.0 * m + 3.0) * x * P[m, m]
    for l in range(2, L + 1):
        m = np.arange(0, l - 1)
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
        b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
        P[l, : l - 1] = a[:, None] * (x[None, :] * P[l - 1, : l - 1] - b[:, None] * P[l - 2, : l - 1])
    dP = np.zeros_like(P)
    for l in range(1, L + 1):
        m = np.arange(0, l + 1)
        c = np.sqrt(np.maximum(l * l - m * m, 0.0) * (2.0 * l + 1.0) / (2.0 * l - 1.0))
        prev = np.zeros((l + 1, n))
        prev[: l] = P[l - 1, : l]
        dP[l, : l + 1] = (l * x[None, :] * P[l, : l + 1] - c[:, None] * prev) / s[None, :]
    return P, dP


def _angles(point: Array) -> tuple[float, float, float]:
    """(cos theta, sin theta, phi) of the radial projection of a point."""
    p = np.asarray(point, float)
    r = np.linalg.norm(p)
    if r == 0.0:
        raise DomainError("spectral field evaluated at the origin")
    u = p / r
    ct = np.clip(u[2], -1.0, 1.0)
    st = np.sqrt(max(1.0 - ct * ct, 0.0))
    return ct, st, float(np.arctan2(u[1], u[0]))


# ---------------------------------------------------------------------------
# spectral fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereSpectralField:
    """A band-limited scalar field stored as real spherical-harmonic
    coefficients c_cos[l, m] (m <= l) and c_sin[l, m] (1 <= m <= l)."""

    L: int
    c_cos: Array
    c_sin: Array

    @classmethod
    def analyze(cls, field, L: int) -> "SphereSpectralField":
        """Project a scalar field onto the basis with the grid quadrature."""
        grid = make_grid(L)
        pts = grid.points()
        vals = np.array([[field(pts[i, j]) for j in range(grid.nphi)]
                         for i in range(grid.ntheta)])
        if not np.all(np.isfinite(vals)):
            raise DomainError("field is non-finite on the analysis grid")
        m = np.arange(L + 1)
        cosm = np.cos(m[:, None] * grid.phi[None, :])
        sinm = np.sin(m[:, None] * grid.phi[None, :])
        scale = 2.0 * np.pi / grid.nphi
        Fc = vals @ cosm.T * scale    # (ntheta, L+1)
        Fs = vals @ sinm.T * scale
        P, _ = _legendre_tables(L, grid.x)
        c_cos = np.zeros((L + 1, L + 1))
        c_sin = np.zeros((L + 1, L + 1))
        for l in range(L + 1):
            pw = P[l, : l + 1] * grid.w[None, :]      # (l+1, ntheta)
            c_cos[l, : l + 1] = np.einsum("mn,nm->m", pw, Fc[:, : l + 1])
            c_sin[l, : l + 1] = np.einsum("mn,nm->m", pw, Fs[:, : l + 1])
        c_cos[:, 1:] *= np.sqrt(2.0)
        c_sin[:, 1:] *= np.sqrt(2.0)
        c_sin[:, 0] = 0.0
        return cls(L, c_cos, c_sin)

    def value(self, point) -> float:
        ct, st, phi = _angles(point)
        P, _ = _legendre_tables(self.L, np.array([ct]))
        m = np.arange(self.L + 1)
        cm, sm = np.cos(m * phi), np.sin(m * phi)
        tot = 0.0
        for l in range(self.L + 1):
            pl = P[l, : l + 1, 0]
            pl = pl * np.where(m[: l + 1] > 0, np.sqrt(2.0), 1.0)
            tot += pl @ (self.c_cos[l, : l + 1] * cm[: l + 1] + self.c_sin[l, : l + 1] * sm[: l + 1])
        return float(tot)

    def surface_gradient(self, point) -> Array:
        """Tangential gradient at the radial projection of ``point``."""
        ct, st, phi = _angles(point)
        if st < 1e-12:
            raise DomainError("surface gradient evaluated at a pole")
        P, dP = _legendre_tables(self.L, np.array([ct]))
        m = np.arange(self.L + 1)
        cm, sm = np.cos(m * phi), np.sin(m * phi)
        d_theta = 0.0
        d_phi = 0.0
        for l in range(self.L + 1):
            sq2 = np.where(m[: l + 1] > 0, np.sqrt(2.0), 1.0)
            pl = P[l, : l + 1, 0] * sq2
            dl = dP[l, : l + 1, 0] * sq2
            cc, cs = self.c_cos[l, : l + 1], self.c_sin[l, : l + 1]
            d_theta += dl @ (cc * cm[: l + 1] + cs * sm[: l + 1])
            d_phi += pl @ (m[: l + 1] * (cs * cm[: l + 1] - cc * sm[: l + 1]))
        cp, sp = np.cos(phi), np.sin(phi)
        e_theta = np.array([ct * cp, ct * sp, -st])
        e_phi = np.array([-sp, cp, 0.0])
        return d_theta * e_theta + (d_phi / st) * e_phi

    def laplace_invert(self) -> "SphereSpectralField":
        """Solve Laplace-Beltrami(psi) = self with zero-mean data and result."""
        l = np.arange(self.L + 1)
        eig = -l * (l + 1.0)
        inv = np.zeros_like(eig)
        inv[1:] = 1.0 / eig[1:]
        return SphereSpectralField(self.L, self.c_cos * inv[:, None],
                                   self.c_sin * inv[:, None])

    def mean(self) -> float:
        """Average over the sphere; the l=0 coefficient carries it all."""
        return float(self.c_cos[0, 0] / np.sqrt(FOUR_PI))

    def drop_mean(self) -> "SphereSpectralField":
        c = self.c_cos.copy()
        c[0, 0] = 0.0
        return SphereSpectralField(self.L, c, self.c_sin)


# ---------------------------------------------------------------------------
# the tangential curl equation (gamma, curl h) = F + c
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurlSolution:
    c: float
    h: VectorField3
    residual: float
    psi: SphereSpectralField
    L: int


def _rotated_gradient(psi: SphereSpectralField, sign: float) -> VectorField3:
    """h(x) = sign * (u x grad_S psi)(u), u = x/|x|  (degree-zero extension)."""

    def fn(x):
        u = np.asarray(x, float)
        u = u / np.linalg.norm(u)
        return sign * np.cross(u, psi.surface_gradient(u))

    return VectorField3(fn)


@lru_cache(maxsize=1)
def _calibrated_sign() -> float:
    """Orientation of the rotated gradient, fixed by the F = gamma_3 case.

    For that right-hand side the exact potential is -gamma_3 / 2; the sign
    making (gamma, curl h) reproduce F is measured once with a
    finite-difference curl and cached.
    """
    L = 8
    F = ScalarField(lambda g: g[2])
    coeff = SphereSpectralField.analyze(F, L).drop_mean()
    psi = coeff.laplace_invert()
    probes = make_grid(4).points().reshape(-1, 3)[::7]
    best = (np.inf, 1.0)
    for sign in (1.0, -1.0):
        h = _rotated_gradient(psi, sign)
        r = max(abs(p @ fd_curl(h.fn, p, step=1e-4, richardson=True) - F(p))
                for p in probes)
        best = min(best, (r, sign))
    return best[1]


def solve_curl_equation(F, L: int = 32, residual_tol: float = 1e-6,
                        verify_stride: int = 4) -> CurlSolution:
    """Find c and a tangent field h with (gamma, curl h) = F(gamma) + c.

    The constant is forced by solvability: c = -mean(F) over the sphere.
    The reported residual is measured independently of the spectral route,
    with a finite-difference curl of h on a subsampled grid.
    """
    if not isinstance(F, ScalarField):
        F = ScalarField(F)
    c = -sphere_quadrature(F, L) / FOUR_PI
    coeff = SphereSpectralField.analyze(F, L).drop_mean()
    psi = coeff.laplace_invert()
    psi_scale = max(float(np.max(np.abs(psi.c_cos))), float(np.max(np.abs(psi.c_sin))))
    if psi_scale <= 1e-14 * max(1.0, abs(c)):
        # F + c is zero to round-off; the exact solution is h = 0 and the
        # analysis noise would only be amplified by the verification curl
        h = VectorField3.zero()
    else:
        h = _rotated_gradient(psi, _calibrated_sign())

    grid = make_grid(L)
    pts = grid.points()[::verify_stride, ::verify_stride].reshape(-1, 3)
    residual = 0.0
    for p in pts:
        lhs = p @ fd_curl(h.fn, p, step=1e-4, richardson=True)
        residual = max(residual, abs(lhs - F(p) - c))
    if residual > residual_tol:
        warnings.warn(
            f"curl-equation residual {residual:.3e} exceeds {residual_tol:.1e}; "
            f"consider raising the band limit to L={2 * L}",
            stacklevel=2,
        )
    return CurlSolution(c=c, h=h, residual=float(residual), psi=psi, L=L)
