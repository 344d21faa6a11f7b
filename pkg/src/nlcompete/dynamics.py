"""Time integration of the full competition system.

Explicit Euler with a certified step bound: because the dispersal
operators are bounded matrices (not differential operators), a cheap
worst-case bound on the diagonal plus the reaction slopes guarantees that
every per-node update coefficient 1 + dt*(...) stays nonnegative.  Under
that bound the scheme preserves positivity, the invariant box [0, M]^2,
and the competitive order, which is exactly what the structural test
suite checks.

Convergence detection uses the instantaneous right-hand-side norm rather
than state differences, so the step size does not bias termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import Field, StatePair, competitive_leq, require_same_grid
from .kernels import DispersalOperator
from .reaction import ReactionModel
from . import steady

__all__ = [
    "SimConfig",
    "Outcome",
    "References",
    "SimResult",
    "OUTCOME_KINDS",
    "dt_bound",
    "default_config",
    "step",
    "simulate",
    "order_preservation_check",
    "random_positive_pair",
]

OUTCOME_KINDS = (
    "coexistence",
    "u_excludes_v",
    "v_excludes_u",
    "extinction",
    "undecided",
)


@dataclass(frozen=True)
class SimConfig:
    dt: float
    t_max: float = 2000.0
    convergence_eps: float = 1e-9
    snapshot_stride: int = 50


@dataclass(frozen=True)
class Outcome:
    kind: str
    terminal: StatePair
    time_to_converge: float


@dataclass(frozen=True)
class References:
    """Semi-trivial profiles the outcome detector compares winners against."""

    theta: Field
    eta: Field


@dataclass(frozen=True)
class SimResult:
    outcome: Outcome
    rows: list  # (t, max|u|, max|v|, min u, min v, rhs norm)
    steps: int
    t_end: float
    converged: bool


def dt_bound(
    dOp: DispersalOperator,
    DOp: DispersalOperator,
    model: ReactionModel,
    samples: int = 33,
    safety: float = 0.9,
) -> float:
    """Largest certified step: safety / (d kappa_d + D kappa_D + Lambda).

    kappa is the largest diagonal magnitude of each dispersal matrix per
    unit rate; Lambda bounds |f| + M |f_u| and |g| + M |g_v| over the box
    [0, M]^2, sampled on a lattice.
    """
    kappa_d = float(np.max(np.abs(np.diag(dOp.matrix)))) / dOp.rate
    kappa_D = float(np.max(np.abs(np.diag(DOp.matrix)))) / DOp.rate
    x = dOp.grid.nodes[:, None, None]
    u = np.linspace(0.0, model.M, samples)[None, :, None]
    v = np.linspace(0.0, model.M, samples)[None, None, :]
    lam_f = np.max(np.abs(model.f(x, u, v)) + model.M * np.abs(model.f_u(x, u, v)))
    lam_g = np.max(np.abs(model.g(x, u, v)) + model.M * np.abs(model.g_v(x, u, v)))
    lam = float(max(lam_f, lam_g))
    return safety / (dOp.rate * kappa_d + DOp.rate * kappa_D + lam)


def default_config(
    dOp: DispersalOperator,
    DOp: DispersalOperator,
    model: ReactionModel,
    **overrides,
) -> SimConfig:
    return SimConfig(dt=dt_bound(dOp, DOp, model), **overrides)


def _advance(u, v, x, Ad, AD, model, dt):
    du = Ad @ u + u * model.f(x, u, v)
    dv = AD @ v + v * model.g(x, u, v)
    return u + dt * du, v + dt * dv, du, dv


def _checked(values, dt, label):
    if np.any(np.isnan(values)):
        raise FloatingPointError(f"NaN in {label} after a step of dt={dt}")
    low = float(values.min())
    if low < -1e-14:
        raise FloatingPointError(
            f"{label} went negative by {-low:.3e} (> 1e-14); the step bound "
            "was violated or the model fails its audits"
        )
    return np.maximum(values, 0.0) if low < 0.0 else values


def step(
    state: StatePair,
    dOp: DispersalOperator,
    DOp: DispersalOperator,
    model: ReactionModel,
    dt: float,
    dt_max: Optional[float] = None,
) -> StatePair:
    """One forward update of both species; validates the step bound."""
    require_same_grid(state.u, state.v)
    if dt_max is None:
        dt_max = dt_bound(dOp, DOp, model)
    if dt > dt_max:
        raise ValueError(f"dt={dt} exceeds the certified bound {dt_max:.6g}")
    if not state.is_nonnegative() or max(state.u.max(), state.v.max()) > model.M:
        raise ValueError("state must start inside the box [0, M]^2")
    x = state.grid.nodes
    u, v, _, _ = _advance(
        state.u.values, state.v.values, x, dOp.matrix, DOp.matrix, model, dt
    )
    return StatePair(
        Field(state.grid, _checked(u, dt, "u")),
        Field(state.grid, _checked(v, dt, "v")),
    )


def _classify(
    u, v, theta, eta, model, floor_factor, profile_tol, converged
) -> str:
    if not converged:
        return "undecided"
    floor = floor_factor * model.M
    u_alive = float(u.min()) > floor
    v_alive = float(v.min()) > floor
    u_dead = float(u.max()) < floor
    v_dead = float(v.max()) < floor
    if u_alive and v_alive:
        return "coexistence"
    if u_dead and v_dead:
        return "extinction"
    if v_dead and float(np.max(np.abs(u - theta))) <= profile_tol:
        return "u_excludes_v"
    if u_dead and float(np.max(np.abs(v - eta))) <= profile_tol:
        return "v_excludes_u"
    return "undecided"


def simulate(
    initial: StatePair,
    dOp: DispersalOperator,
    DOp: DispersalOperator,
    model: ReactionModel,
    config: SimConfig,
    references: Optional[References] = None,
    floor_factor: float = 1e-8,
    profile_tol: float = 1e-5,
) -> SimResult:
    """Integrate until the right-hand side stalls, then name the outcome.

    Outcomes are matched against the semi-trivial profiles (computed here
    when not supplied); hitting t_max without convergence reports
    undecided rather than guessing.
    """
    grid = initial.grid
    if not initial.is_nonnegative():
        raise ValueError("initial state must be nonnegative")
    dt_cap = dt_bound(dOp, DOp, model)
    if config.dt > dt_cap:
        raise ValueError(f"config.dt={config.dt} exceeds the certified bound {dt_cap:.6g}")

    if references is None:
        x = grid.nodes
        zeros = np.zeros(grid.n)
        theta = steady.solve_single(
            dOp, steady.growth_f_at(model, x, zeros), model.M
        ).state
        eta = steady.solve_single(
            DOp, steady.growth_g_at(model, x, zeros), model.M
        ).state
        references = References(theta=theta, eta=eta)

    x = grid.nodes
    Ad, AD = dOp.matrix, DOp.matrix
    u = initial.u.values.copy()
    v = initial.v.values.copy()
    dt = config.dt
    blow_limit = model.M + max(1.0, 0.1 * model.M)
    n_steps = int(np.ceil(config.t_max / dt))
    rows = []
    converged = False
    t = 0.0
    k = 0
    for k in range(n_steps + 1):
        t = k * dt
        du = Ad @ u + u * model.f(x, u, v)
        dv = AD @ v + v * model.g(x, u, v)
        rhs_norm = float(np.max(np.abs(du))) + float(np.max(np.abs(dv)))
        if k % config.snapshot_stride == 0:
            rows.append(
                (t, float(np.max(np.abs(u))), float(np.max(np.abs(v))),
                 float(u.min()), float(v.min()), rhs_norm)
            )
        if rhs_norm <= config.convergence_eps:
            converged = True
            break
        if k == n_steps:
            break
        u = _checked(u + dt * du, dt, "u")
        v = _checked(v + dt * dv, dt, "v")
        if float(u.max()) > blow_limit or float(v.max()) > blow_limit:
            raise FloatingPointError(
                "trajectory left the invariant box; the model fails its audits"
            )
    if rows[-1][0] != t:
        rows.append(
            (t, float(np.max(np.abs(u))), float(np.max(np.abs(v))),
             float(u.min()), float(v.min()), rhs_norm)
        )

    kind = _classify(
        u, v, references.theta.values, references.eta.values, model,
        floor_factor, profile_tol, converged,
    )
    terminal = StatePair(Field(grid, u), Field(grid, v))
    return SimResult(
        outcome=Outcome(kind=kind, terminal=terminal,
                        time_to_converge=t if converged else float("inf")),
        rows=rows,
        steps=k,
        t_end=t,
        converged=converged,
    )


def order_preservation_check(
    s1: StatePair,
    s2: StatePair,
    dOp: DispersalOperator,
    DOp: DispersalOperator,
    model: ReactionModel,
    dt: float,
    steps: int,
) -> bool:
    """Step two order-related states together and watch the order.

    Returns False as soon as the competitive order (or finiteness) breaks;
    used both as a positive check at the certified step size and as a
    negative control at oversized steps.
    """
    if not competitive_leq(s1, s2):
        raise ValueError("inputs must satisfy the competitive order s1 <= s2")
    x = s1.grid.nodes
    Ad, AD = dOp.matrix, DOp.matrix
    u1, v1 = s1.u.values.copy(), s1.v.values.copy()
    u2, v2 = s2.u.values.copy(), s2.v.values.copy()
    for _ in range(steps):
        u1, v1, _, _ = _advance(u1, v1, x, Ad, AD, model, dt)
        u2, v2, _, _ = _advance(u2, v2, x, Ad, AD, model, dt)
        u1, v1 = np.maximum(u1, 0.0), np.maximum(v1, 0.0)
        u2, v2 = np.maximum(u2, 0.0), np.maximum(v2, 0.0)
        if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))
                and np.all(np.isfinite(v1)) and np.all(np.isfinite(v2))):
            return False
        if np.any(u1 > u2) or np.any(v1 < v2):
            return False
    return True


def random_positive_pair(grid, M: float, rng: np.random.Generator) -> StatePair:
    """Strictly positive random state, uniform per node in [0.05 M, 0.95 M]."""
    u = rng.uniform(0.05 * M, 0.95 * M, size=grid.n)
    v = rng.uniform(0.05 * M, 0.95 * M, size=grid.n)
    return StatePair(Field(grid, u), Field(grid, v))
