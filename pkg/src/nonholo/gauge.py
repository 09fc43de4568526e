"""The fiberwise transformation group of the bracket family and the
constructive reduction to the e(3) bracket.

A transform is a triple (alpha(gamma), c, h(gamma)) acting on states by

    M  ->  alpha * M_perp + c * M_par + M_par x h,        gamma -> gamma,

where M_par = (M, gamma) gamma and M_perp = M - M_par.  Composition mirrors
the product of the 2x2 block matrices [[alpha, h], [0, c]]: performing
(alpha1, c1, h1) then (alpha2, c2, h2) equals
(alpha1 alpha2, c1 c2, h1 alpha2 + h2 c1).

The action on bracket parameters (g, f) is

    g~ = alpha g
    f~ = (alpha^2/c) f + (alpha/c - 1) (g~ - (gamma, dg~/dgamma))
         + (1/c) (gamma, g~ dalpha/dgamma + g~^2 curl(h/g~)).

Choosing alpha = 1/g and solving (gamma, curl h) = F + c for the target

    F = -(alpha^2 f + alpha + (gamma, dalpha/dgamma))

drives any (g, f) to (1, 0), i.e. to the standard e(3) structure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    DomainError,
    ScalarField,
    TOLS,
    VectorField3,
    pack,
    require_unit_gamma,
    unpack,
)
from .sphere import bivector_field, e3_bivector
from .spherical import CurlSolution, solve_curl_equation

Array = np.ndarray


@dataclass(frozen=True)
class GaugeTransform:
    alpha: ScalarField
    c: float
    h: VectorField3

    def __post_init__(self):
        if self.c == 0.0:
            raise DomainError("the normal dilation c must be nonzero")


@dataclass(frozen=True)
class GFParams:
    g: ScalarField
    f: ScalarField


def identity_gauge() -> GaugeTransform:
    return GaugeTransform(ScalarField.constant(1.0), 1.0, VectorField3.zero())


def compose(t2: GaugeTransform, t1: GaugeTransform) -> GaugeTransform:
    """The transform acting as 'first t1, then t2'."""
    return GaugeTransform(
        alpha=t1.alpha * t2.alpha,
        c=t1.c * t2.c,
        h=t1.h.scaled(t2.alpha) + t2.h.scaled(t1.c),
    )


def inverse(t: GaugeTransform) -> GaugeTransform:
    scale = (t.alpha * t.c).reciprocal() * (-1.0)
    return GaugeTransform(alpha=t.alpha.reciprocal(), c=1.0 / t.c, h=t.h.scaled(scale))


def _gauge_map(t: GaugeTransform, M: Array, gamma: Array) -> Array:
    """The raw fiber map, defined for any gamma (used off-sphere by FD)."""
    m_par = (M @ gamma) * gamma
    m_perp = M - m_par
    return t.alpha(gamma) * m_perp + t.c * m_par + np.cross(m_par, t.h(gamma))


def apply_gauge_state(t: GaugeTransform, x, tol: float = TOLS.unit_gamma) -> Array:
    """Image of a state; preserves gamma and scales (M, gamma) by c."""
    M, gamma = unpack(x)
    require_unit_gamma(gamma, tol)
    return pack(_gauge_map(t, M, gamma), gamma)


def gauge_state_jacobian(t: GaugeTransform, x, step: float = 1e-6) -> Array:
    """Jacobian of x -> (M~, gamma).  The M-block is analytic; the
    gamma-block is central-differenced on the raw fiber map."""
    M, gamma = unpack(x)
    a = t.alpha(gamma)
    gh = np.cross(gamma, t.h(gamma))
    J = np.zeros((6, 6))
    J[:3, :3] = a * np.eye(3) + (t.c - a) * np.outer(gamma, gamma) + np.outer(gh, gamma)
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        J[:3, 3 + j] = (_gauge_map(t, M, gamma + e) - _gauge_map(t, M, gamma - e)) / (2.0 * step)
    J[3:, 3:] = np.eye(3)
    return J


def pushforward_bivector(t: GaugeTransform, P_field, x) -> Array:
    """Congruence J P J^T of a bivector field under the state map.

    The result lives at the image point apply_gauge_state(t, x); compare it
    there against any direct assembly.
    """
    _, gamma = unpack(x)
    if abs(t.alpha(gamma)) < 1e-14:
        raise DomainError("alpha vanishes; the fiber map is singular here")
    J = gauge_state_jacobian(t, x)
    P = np.asarray(P_field(np.asarray(x, float)), float)
    return J @ P @ J.T


def pushforward_params(t: GaugeTransform, p: GFParams) -> GFParams:
    """Image parameters (g~, f~) of the action on the bracket family.

    g~ keeps an analytic gradient when both factors have one; f~ is a plain
    evaluation map (nothing downstream differentiates it analytically).
    """
    g_new = t.alpha * p.g

    def f_new(gamma):
        gamma = np.asarray(gamma, float)
        a = t.alpha(gamma)
        c = t.c
        gt = g_new(gamma)
        radial = gt - gamma @ g_new.gradient(gamma)
        grad_a = t.alpha.gradient(gamma)
        curl_term = t.h.scaled(g_new.reciprocal()).curl_at(gamma)
        return (a * a / c) * p.f(gamma) + (a / c - 1.0) * radial \
            + (gamma @ (gt * grad_a + gt * gt * curl_term)) / c

    return GFParams(g=g_new, f=ScalarField(f_new))


def gf_bivector(p: GFParams):
    """The bracket field x -> P(x) of a parameter pair (k = 0, Phi = 0)."""
    return bivector_field(g=p.g, f=p.f)


# ---------------------------------------------------------------------------
# zero-level reduction
# ---------------------------------------------------------------------------

def zero_level_reduce(g: ScalarField, x, tol: float = TOLS.zero_level) -> Array:
    """On (M, gamma) = 0 the rescaling M -> M / g(gamma) already lands on the
    e(3) bracket; this returns the rescaled state."""
    M, gamma = unpack(x)
    require_unit_gamma(gamma)
    level = abs(M @ gamma)
    if level > tol:
        raise DomainError(f"state is off the zero level: |(M, gamma)| = {level:.3e}")
    return pack(M / g(gamma), gamma)


def zero_level_jacobian(g: ScalarField, x) -> Array:
    """Analytic Jacobian of x -> (M / g, gamma), for the bracket congruence."""
    M, gamma = unpack(x)
    a = 1.0 / g(gamma)
    J = np.zeros((6, 6))
    J[:3, :3] = a * np.eye(3)
    J[:3, 3:] = -a * a * np.outer(M, g.gradient(gamma))
    J[3:, 3:] = np.eye(3)
    return J


# ---------------------------------------------------------------------------
# reduction to the e(3) bracket
# ---------------------------------------------------------------------------

def curl_target_F(p: GFParams) -> ScalarField:
    """Right-hand side F of the curl equation for the reducing gauge.

    With alpha = 1/g fixed by g~ = 1, driving f~ to zero asks for
    (gamma, curl h) = F + c with F = -(alpha^2 f + alpha + (gamma, dalpha)).
    """
    alpha = p.g.reciprocal()

    def F(gamma):
        gamma = np.asarray(gamma, float)
        a = alpha(gamma)
        return -(a * a * p.f(gamma) + a + gamma @ alpha.gradient(gamma))

    return ScalarField(F)


def reduce_to_e3(p: GFParams, L: int = 32) -> tuple[GaugeTransform, CurlSolution]:
    """The transform sending (g, f) to (1, 0), plus the solver diagnostics."""
    sol = solve_curl_equation(curl_target_F(p), L=L)
    gauge = GaugeTransform(alpha=p.g.reciprocal(), c=sol.c, h=sol.h)
    return gauge, sol


def reduction_report(p: GFParams, L: int = 32, n_states: int = 200,
                     seed: int = 0, probe_stride: int = 4) -> dict:
    """End-to-end diagnostics of the reduction, as plain floats.

    Reports the curl-equation residual, the sup deviation of the pushed
    parameters from (1, 0) on the verification grid, and the worst entrywise
    mismatch between the pushed-forward bivector and the e(3) bivector at
    seeded random unit-gamma states.
    """
    from .spherical import make_grid

    gauge, sol = reduce_to_e3(p, L=L)
    pushed = pushforward_params(gauge, p)

    grid_pts = make_grid(L).points()[::probe_stride, ::probe_stride].reshape(-1, 3)
    g_dev = max(abs(pushed.g(pt) - 1.0) for pt in grid_pts)
    f_dev = max(abs(pushed.f(pt)) for pt in grid_pts)

    P = gf_bivector(p)
    rng = np.random.default_rng(seed)
    bracket_dev = 0.0
    for _ in range(n_states):
        gamma = rng.standard_normal(3)
        gamma /= np.linalg.norm(gamma)
        x = pack(rng.standard_normal(3), gamma)
        left = pushforward_bivector(gauge, P, x)
        right = e3_bivector(apply_gauge_state(gauge, x))
        bracket_dev = max(bracket_dev, float(np.max(np.abs(left - right))))

    return {
        "L": L,
        "c": float(sol.c),
        "residual": float(sol.residual),
        "g_tilde_dev": float(g_dev),
        "f_tilde_dev": float(f_dev),
        "bracket_dev": float(bracket_dev),
        "n_states": n_states,
        "seed": seed,
    }
