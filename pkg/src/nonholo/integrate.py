"""Trajectory generation and invariant-drift monitoring.

Integration uses the adaptive Dormand-Prince 5(4) pair (scipy's RK45) with
samples taken from the solver's dense output.  No projection or
renormalization is applied to gamma; the drift of the known first integrals
is the advertised measure of integration quality.

The time-rescaled run integrates, in the new time tau,

    dx/dtau = rho(gamma) * rhs(x),      dt/dtau = rho(gamma),

with the multiplier rho = 1/g, so that t = integral of rho dtau recovers the
physical clock and the mapped trajectory coincides with direct integration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .core import DomainError, StiffnessError, pack, unpack
from .sphere import ReducedS, SphereSystem, integrals, rhs

Array = np.ndarray


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    horizon: float = 100.0
    samples: int = 1001
    max_step: float = np.inf

    def __post_init__(self):
        if self.rtol <= 0.0 or self.atol <= 0.0:
            raise DomainError("tolerances must be positive")
        if self.horizon <= 0.0:
            raise DomainError("horizon must be positive")


@dataclass(frozen=True)
class Trajectory:
    t: Array                      # (N,), strictly increasing
    states: Array                 # (N, dim)
    integrals: dict[str, Array]   # per-sample values of named first integrals
    nfev: int

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0.0):
            raise DomainError("sample times must be strictly increasing")


def integrate(fn: Callable[[Array], Array], state0, cfg: IntegratorConfig,
              integral_fns: dict[str, Callable[[Array], float]] | None = None) -> Trajectory:
    """Integrate dx/dt = fn(x) over [0, horizon] with dense sampling."""
    x0 = np.asarray(state0, float)
    if not np.all(np.isfinite(x0)):
        raise DomainError("initial state is not finite")
    t_eval = np.linspace(0.0, cfg.horizon, cfg.samples)
    sol = solve_ivp(lambda t, y: fn(y), (0.0, cfg.horizon), x0, method="RK45",
                    rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step,
                    t_eval=t_eval)
    if not sol.success:
        raise StiffnessError(f"integration stalled: {sol.message}",
                             last_t=float(sol.t[-1]) if sol.t.size else 0.0,
                             last_state=sol.y[:, -1] if sol.t.size else x0)
    states = sol.y.T
    tracked = {}
    if integral_fns:
        for name, f in integral_fns.items():
            tracked[name] = np.array([f(s) for s in states])
    return Trajectory(t=sol.t, states=states, integrals=tracked, nfev=int(sol.nfev))


def _sphere_integral_fns(sys: SphereSystem) -> dict[str, Callable[[Array], float]]:
    fns: dict[str, Callable[[Array], float]] = {
        "H": lambda x: integrals(sys, x).F3,
        "F1": lambda x: integrals(sys, x).F1,
        "F2": lambda x: integrals(sys, x).F2,
    }
    for name, f in sys.extra_integrals:
        fns[name] = (lambda fn: lambda x: float(fn(*unpack(x))))(f)
    return fns


def integrate_sphere(sys: SphereSystem, state0, cfg: IntegratorConfig) -> Trajectory:
    """Trajectory of a sphere system with its registered integrals tracked."""
    return integrate(lambda x: rhs(sys, x), state0, cfg, _sphere_integral_fns(sys))


def integrate_reparametrized(sys: SphereSystem, state0, cfg: IntegratorConfig,
                             g_floor: float = 1e-10) -> tuple[Trajectory, Array]:
    """Integrate in the rescaled time tau until the physical clock reaches
    the horizon.  Returns the tau-trajectory (states only, sampled in tau)
    and the physical times t(tau) of the samples.

    The time map is obtained by co-integrating t as a seventh state
    component, so it inherits the solver's error control.
    """
    spec = sys.s_spec
    if not isinstance(spec, ReducedS):
        raise DomainError("time rescaling needs a reduced S-spec (rho = 1/g)")
    x0 = np.asarray(state0, float)

    def rho_of(x):
        g = spec.g(unpack(x)[1])
        if g <= g_floor:
            raise DomainError(f"conformal factor hit g = {g:.3e} <= {g_floor:.1e}")
        return 1.0 / g

    def z_rhs(t, z):
        x = z[:-1]
        r = rho_of(x)
        return np.append(r * rhs(sys, x), r)

    def reached(t, z):
        return z[-1] - cfg.horizon
    reached.terminal = True
    reached.direction = 1.0

    # rho > 0 is bounded on the sphere, so the horizon in tau is finite;
    # estimate it from the initial multiplier with a generous margin.
    tau_max = 4.0 * cfg.horizon / rho_of(x0) + 1.0
    tau_eval = np.linspace(0.0, tau_max, max(4 * cfg.samples, 8))
    sol = solve_ivp(z_rhs, (0.0, tau_max), np.append(x0, 0.0), method="RK45",
                    rtol=cfg.rtol, atol=cfg.atol, t_eval=tau_eval, events=reached)
    if not sol.success:
        raise StiffnessError(f"rescaled integration stalled: {sol.message}")
    if sol.status != 1:
        raise DomainError("rescaled run never reached the requested horizon; "
                          "raise the tau budget")
    keep = sol.y[-1] < cfg.horizon
    tau = np.append(sol.t[keep], sol.t_events[0][0])
    z = np.concatenate([sol.y[:, keep], sol.y_events[0].T], axis=1)
    traj = Trajectory(t=tau, states=z[:-1].T, integrals={}, nfev=int(sol.nfev))
    return traj, z[-1]


def map_to_physical_time(traj_tau: Trajectory, t_phys: Array, t_query: Array) -> Array:
    """Cubic interpolation of a tau-sampled trajectory onto physical times."""
    t_query = np.asarray(t_query, float)
    if t_query.max() > t_phys.max() or t_query.min() < t_phys.min():
        raise DomainError("queried times fall outside the rescaled run")
    spline = CubicSpline(t_phys, traj_tau.states, axis=0)
    return spline(t_query)


def drift_report(traj: Trajectory, names: Sequence[str] | None = None) -> dict[str, float]:
    """Per-integral sup of |F(t) - F(0)| / max(1, |F(0)|) over the samples."""
    names = list(traj.integrals.keys()) if names is None else list(names)
    out = {}
    for name in names:
        vals = traj.integrals[name]
        out[name] = float(np.max(np.abs(vals - vals[0])) / max(1.0, abs(vals[0])))
    return out


def trajectory_csv(traj: Trajectory, path) -> None:
    """Write a sphere trajectory as CSV, full double precision.

    Columns: t, M1..M3, g1..g3, then the tracked integrals in the order
    H, F1, F2, extras.
    """
    order = ["H", "F1", "F2"] + [n for n in traj.integrals if n not in ("H", "F1", "F2")]
    header = "t,M1,M2,M3,g1,g2,g3," + ",".join(order)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i, t in enumerate(traj.t):
            row = [t, *traj.states[i], *(traj.integrals[n][i] for n in order)]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
