"""Momentum-direction systems on R^6 and their rank-4 bracket family.

A system is the flow

    dM/dt     = (M + k - S*gamma) x dH/dM + gamma x dH/dgamma
    dgamma/dt = gamma x dH/dM

driven by a Hamiltonian H(M, gamma) that is quadratic and non-degenerate in
M, a function S linear in M, and a constant gyrostatic momentum k.  Every
such flow conserves gamma^2, (M + k, gamma) and H.  When S comes in the
reduced form

    S = (1/g) (-dg/dgamma + f*gamma, M) + Phi/g

the flow equals (1/g) P grad H for the skew 6x6 field

    P = g [[hat(M+k), hat(gamma)], [hat(gamma), 0]]
        - g S [[hat(gamma), 0], [0, 0]]

which satisfies the Jacobi identity, has Casimirs gamma^2 and (M+k, gamma),
and admits the invariant measure density rho = 1/g.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    ConfigError,
    DomainError,
    ScalarField,
    VectorField3,
    hat,
    pack,
    unpack,
)

Array = np.ndarray


# ---------------------------------------------------------------------------
# S-function specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedS:
    """S given through (g, f, Phi); requires g > 0 near the sphere."""

    g: ScalarField
    f: ScalarField
    phi: ScalarField | None = None


@dataclass(frozen=True)
class DirectS:
    """S given directly as (K(gamma), M) + offset(gamma)."""

    K: VectorField3
    offset: ScalarField | None = None


SFunctionSpec = ReducedS | DirectS


def k_from_gf(g: ScalarField, f: ScalarField, gamma) -> Array:
    """The S-vector of a reduced spec: K = (f*gamma - dg/dgamma) / g.

    This is exactly the one-parameter family of solutions of the
    invariant-measure equation for density rho = 1/g.
    """
    gamma = np.asarray(gamma, float)
    gv = g(gamma)
    if gv <= 0.0:
        raise DomainError(f"g(gamma) = {gv:.3e} is not positive")
    return (f(gamma) * gamma - g.gradient(gamma)) / gv


@dataclass(frozen=True)
class SphereSystem:
    """Immutable specification of a flow on R^6(M, gamma).

    Hamiltonian gradients are analytic callables of (M, gamma); the tight
    residual tolerances downstream are not reachable with finite-difference
    gradients.  ``extra_integrals`` holds named first integrals beyond the
    three automatic ones, e.g. M^2 where it is conserved.
    """

    name: str
    hamiltonian: Callable[[Array, Array], float]
    dH_dM: Callable[[Array, Array], Array]
    dH_dgamma: Callable[[Array, Array], Array]
    s_spec: SFunctionSpec
    k: Array = field(default_factory=lambda: np.zeros(3))
    extra_integrals: tuple[tuple[str, Callable[[Array, Array], float]], ...] = ()


@dataclass(frozen=True)
class IntegralValues:
    F1: float                      # gamma^2
    F2: float                      # (M + k, gamma)
    F3: float                      # H
    extras: dict[str, float]


def s_value(sys: SphereSystem, x) -> float:
    """Evaluate S at a state, for either spec form."""
    M, gamma = unpack(x)
    spec = sys.s_spec
    if isinstance(spec, DirectS):
        s = float(spec.K(gamma) @ M)
        if spec.offset is not None:
            s += spec.offset(gamma)
        return s
    K = k_from_gf(spec.g, spec.f, gamma)
    s = float(K @ M)
    if spec.phi is not None:
        s += spec.phi(gamma) / spec.g(gamma)
    return s


def rhs(sys: SphereSystem, x) -> Array:
    """Right-hand side of the equations of motion."""
    M, gamma = unpack(x)
    hm = np.asarray(sys.dH_dM(M, gamma), float)
    hg = np.asarray(sys.dH_dgamma(M, gamma), float)
    S = s_value(sys, x)
    Mdot = np.cross(M + sys.k - S * gamma, hm) + np.cross(gamma, hg)
    gdot = np.cross(gamma, hm)
    return pack(Mdot, gdot)


def integrals(sys: SphereSystem, x) -> IntegralValues:
    M, gamma = unpack(x)
    extras = {name: float(fn(M, gamma)) for name, fn in sys.extra_integrals}
    return IntegralValues(
        F1=float(gamma @ gamma),
        F2=float((M + sys.k) @ gamma),
        F3=float(sys.hamiltonian(M, gamma)),
        extras=extras,
    )


def measure_residual(sys_or_spec, x, rho: ScalarField | None = None) -> Array:
    """The obstruction ((1/rho) drho/dgamma - K) x gamma.

    Zero iff rho(gamma) dM dgamma is an invariant measure of the flow.  For
    a reduced spec the density defaults to rho = 1/g; a direct spec needs an
    explicit density.
    """
    spec = sys_or_spec.s_spec if isinstance(sys_or_spec, SphereSystem) else sys_or_spec
    _, gamma = unpack(x)
    if isinstance(spec, ReducedS):
        if rho is None:
            rho = spec.g.reciprocal()
        K = k_from_gf(spec.g, spec.f, gamma)
    else:
        if rho is None:
            raise ConfigError("a direct S-spec carries no density; pass rho explicitly")
        K = spec.K(gamma)
    dlog_rho = rho.gradient(gamma) / rho(gamma)
    return np.cross(dlog_rho - K, gamma)


# ---------------------------------------------------------------------------
# bivector assembly
# ---------------------------------------------------------------------------

def _pgf_matrix(M: Array, gamma: Array, g_val: float, S_val: float, k: Array) -> Array:
    P = np.zeros((6, 6))
    G = hat(gamma)
    P[:3, :3] = g_val * hat(M + k) - g_val * S_val * G
    P[:3, 3:] = g_val * G
    P[3:, :3] = g_val * G
    return P


def e3_bivector(x) -> Array:
    """The standard e(3) Lie-Poisson bivector [[hat(M), hat(g)], [hat(g), 0]]."""
    M, gamma = unpack(x)
    return _pgf_matrix(M, gamma, 1.0, 0.0, np.zeros(3))


def bivector_field(g: ScalarField, K: VectorField3 | None = None,
                   f: ScalarField | None = None,
                   phi: ScalarField | None = None,
                   k: Array | None = None) -> Callable[[Array], Array]:
    """Build x -> P(x) from either (g, f[, phi]) or (g, K[, phi as offset]).

    With K supplied the S-term is (K, M) regardless of any measure
    compatibility, which is how deliberately broken (non-Jacobi) structures
    are assembled for negative controls.
    """
    if (K is None) == (f is None):
        raise ConfigError("pass exactly one of K or f")
    kvec = np.zeros(3) if k is None else np.asarray(k, float)

    def P(x):
        M, gamma = unpack(x)
        gv = g(gamma)
        Kv = k_from_gf(g, f, gamma) if K is None else K(gamma)
        S = float(Kv @ M)
        if phi is not None:
            S += phi(gamma) / gv
        return _pgf_matrix(M, gamma, gv, S, kvec)

    return P


def assemble_P(sys: SphereSystem, x) -> Array:
    """The bracket matrix of a reduced-spec system at a state."""
    spec = sys.s_spec
    if not isinstance(spec, ReducedS):
        raise ConfigError("bracket assembly needs a reduced S-spec (g, f, Phi)")
    M, gamma = unpack(x)
    gv = spec.g(gamma)
    if gv <= 0.0:
        raise DomainError(f"g(gamma) = {gv:.3e} is not positive")
    return _pgf_matrix(M, gamma, gv, s_value(sys, x), sys.k)


def conformal_residual(sys: SphereSystem, x) -> float:
    """Sup-norm of rhs(x) - (1/g) P(x) grad H(x); zero for admissible systems."""
    spec = sys.s_spec
    if not isinstance(spec, ReducedS):
        raise ConfigError("conformal residual needs a reduced S-spec")
    M, gamma = unpack(x)
    gradH = pack(sys.dH_dM(M, gamma), sys.dH_dgamma(M, gamma))
    lhs = rhs(sys, x)
    rhs_bracket = assemble_P(sys, x) @ gradH / spec.g(gamma)
    return float(np.max(np.abs(lhs - rhs_bracket)))


def gradient_consistency(sys: SphereSystem, x, step: float | None = None) -> float:
    """Worst deviation of the analytic H-gradients from central differences."""
    from .core import fd_gradient

    M, gamma = unpack(x)
    gm = fd_gradient(lambda m: sys.hamiltonian(m, gamma), M, step)
    gg = fd_gradient(lambda g: sys.hamiltonian(M, g), gamma, step)
    err_m = np.max(np.abs(gm - sys.dH_dM(M, gamma)))
    err_g = np.max(np.abs(gg - sys.dH_dgamma(M, gamma)))
    return float(max(err_m, err_g))
