"""Reaction terms for the two-species competition system.

A ReactionModel bundles the per-capita growth rates f(x, u, v), g(x, u, v)
with their four partial derivatives and a box bound M beyond which both
rates are negative.  The module also provides the root map u = F(x, v)
of f(x, u, v) = 0 (with its nonnegative clamp F_plus), runtime audits of
the structural assumptions the solvers rely on, and the composed rate
g(x, F_plus(x, v), v) that drives the limiting system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .grid import Field, Grid

__all__ = [
    "ReactionModel",
    "LotkaVolterraParams",
    "AuditReport",
    "NonBracketingError",
    "lv_model",
    "solve_F",
    "F_plus",
    "g_composite",
    "composite_decrement",
    "audit_assumptions",
]


class NonBracketingError(RuntimeError):
    """f(x, ., v) does not change sign on [-M, M]; the root map is undefined."""


@dataclass(frozen=True, eq=False)
class ReactionModel:
    """Growth-rate evaluators and partials, all vectorized over (x, u, v).

    Required structure (audited, not assumed): f_u, g_v < 0 and f_v, g_u < 0
    on the working box, f(x, M, v) < 0 and g(x, u, M) < 0, and the weak
    interaction inequality f_v * g_u < f_u * g_v.
    """

    f: Callable
    g: Callable
    f_u: Callable
    f_v: Callable
    g_u: Callable
    g_v: Callable
    M: float
    F_exact: Optional[Callable] = None  # fast path: closed-form root of f = 0
    label: str = ""
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class LotkaVolterraParams:
    """f = m(x) - u - c v, g = m(x) - b u - v.

    m may be a number, a callable of x, or a Field (interpolated off-node).
    Weak competition corresponds to b*c < 1.
    """

    m: object
    b: float
    c: float


def _resource_callable(m) -> Callable:
    if isinstance(m, Field):
        nodes, values = m.grid.nodes, m.values
        return lambda x: np.interp(x, nodes, values)
    if callable(m):
        return m
    m_const = float(m)
    return lambda x: np.full_like(np.asarray(x, dtype=float), m_const)


def lv_model(
    params: LotkaVolterraParams,
    grid: Grid | None = None,
    require_weak_competition: bool = True,
    samples: int = 2048,
) -> ReactionModel:
    """Wire a Lotka-Volterra instance into a ReactionModel.

    The box bound is M = max(m) + 1, with max(m) taken over a dense sample
    of the domain (grid nodes plus endpoints when a grid is given).
    """
    b, c = float(params.b), float(params.c)
    if b <= 0 or c <= 0:
        raise ValueError(f"competition coefficients must be positive, got b={b}, c={c}")
    if require_weak_competition and b * c >= 1.0:
        raise ValueError(
            f"weak competition requires b*c < 1, got b*c = {b * c}; "
            "pass require_weak_competition=False to build the model anyway"
        )
    m_fn = _resource_callable(params.m)
    if grid is not None:
        xs = np.concatenate(([grid.a], grid.nodes, [grid.b]))
    else:
        xs = np.linspace(0.0, 1.0, samples)
    m_max = float(np.max(m_fn(xs)))
    M = m_max + 1.0

    ones = lambda x, u, v: np.ones(np.broadcast(x, u, v).shape)

    return ReactionModel(
        f=lambda x, u, v: m_fn(x) - u - c * v,
        g=lambda x, u, v: m_fn(x) - b * u - v,
        f_u=lambda x, u, v: -ones(x, u, v),
        f_v=lambda x, u, v: -c * ones(x, u, v),
        g_u=lambda x, u, v: -b * ones(x, u, v),
        g_v=lambda x, u, v: -ones(x, u, v),
        M=M,
        F_exact=lambda x, v: m_fn(x) - c * v,
        label="lotka-volterra",
        params={"b": b, "c": c},
    )


def solve_F(model: ReactionModel, x, v, tol: float = 1e-12):
    """The root u = F(x, v) of f(x, u, v) = 0, possibly negative.

    Uses the model's closed form when available, else bisection on
    [-M, M]; f must be strictly decreasing in u there, so the bracket
    f(x, -M, v) > 0 > f(x, M, v) pins the unique root.
    """
    scalar = np.isscalar(x) and np.isscalar(v)
    x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    if model.F_exact is not None:
        out = np.asarray(model.F_exact(x, v), dtype=float)
        return float(out) if scalar else out

    M = model.M
    lo = np.full(x.shape, -M)
    hi = np.full(x.shape, M)
    f_lo = model.f(x, lo, v)
    f_hi = model.f(x, hi, v)
    if np.any(f_lo <= 0.0) or np.any(f_hi >= 0.0):
        raise NonBracketingError(
            "f(x, -M, v) and f(x, M, v) do not straddle zero; "
            "the root map is undefined for this model on the working box"
        )
    n_steps = int(np.ceil(np.log2(2.0 * M / tol))) + 1
    for _ in range(n_steps):
        mid = 0.5 * (lo + hi)
        above = model.f(x, mid, v) > 0.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    out = 0.5 * (lo + hi)
    return float(out) if scalar else out


def F_plus(model: ReactionModel, x, v, tol: float = 1e-12):
    """Nonnegative clamp max(0, F(x, v))."""
    return np.maximum(0.0, solve_F(model, x, v, tol=tol))


def g_composite(model: ReactionModel, x, v):
    """g evaluated on the u-nullcline clamp: g(x, F_plus(x, v), v)."""
    x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    return model.g(x, F_plus(model, x, v), v)


def composite_decrement(
    model: ReactionModel,
    grid: Grid,
    v_max: float | None = None,
    samples: int = 129,
) -> float:
    """Fitted uniform decrement rate of v -> g(x, F_plus(x, v), v).

    Scans a v-lattice on [0, v_max] at every node and returns the smallest
    observed -dg/dv.  A positive return certifies the strict decrease the
    comparison and uniqueness arguments need.
    """
    v_hi = model.M if v_max is None else float(v_max)
    vs = np.linspace(0.0, v_hi, samples)
    x = grid.nodes[:, None]
    vals = g_composite(model, x, vs[None, :])
    slopes = np.diff(vals, axis=1) / np.diff(vs)[None, :]
    return float(-np.max(slopes))


@dataclass(frozen=True)
class AuditReport:
    """Worst margins of the structural inequalities on a sampled lattice.

    Margins are oriented so that positive means the assumption holds with
    that much room; continuity of the evaluators is attested by
    construction and carries no margin.
    """

    margins: dict
    passed: dict
    all_passed: bool
    samples: int
    M: float

    def rows(self):
        notes = {
            "A1": "continuity attested by construction",
            "A2": "min of (-f_u, -g_v) over the lattice",
            "A3": "min of (-f_v, -g_u) over the lattice",
            "A4": "min of (-f(x,M,v), -g(x,u,M)) over the lattice",
            "A5": "min of (f_u*g_v - f_v*g_u) over the lattice",
        }
        out = []
        for name in ("A1", "A2", "A3", "A4", "A5"):
            margin = self.margins.get(name, float("nan"))
            out.append((name, margin, self.passed[name], notes[name]))
        return out


def audit_assumptions(model: ReactionModel, grid: Grid, samples: int = 32) -> AuditReport:
    """Evaluate the assumption inequalities on a lattice over the closed box.

    Samples x over the closed domain (endpoints included) and u, v over
    [0, M+1].  Violations are reported with negative margins, never thrown.
    """
    if samples < 1:
        raise ValueError("audit needs at least one sample per axis")
    xs = np.linspace(grid.a, grid.b, samples)[:, None, None]
    us = np.linspace(0.0, model.M + 1.0, samples)[None, :, None]
    vs = np.linspace(0.0, model.M + 1.0, samples)[None, None, :]

    f_u = model.f_u(xs, us, vs)
    f_v = model.f_v(xs, us, vs)
    g_u = model.g_u(xs, us, vs)
    g_v = model.g_v(xs, us, vs)

    margins = {
        "A1": float("inf"),
        "A2": float(min(np.min(-f_u), np.min(-g_v))),
        "A3": float(min(np.min(-f_v), np.min(-g_u))),
        "A4": float(
            min(
                np.min(-model.f(xs, np.full_like(us, model.M), vs)),
                np.min(-model.g(xs, us, np.full_like(vs, model.M))),
            )
        ),
        "A5": float(np.min(f_u * g_v - f_v * g_u)),
    }
    passed = {name: bool(margin > 0.0) for name, margin in margins.items()}
    return AuditReport(
        margins=margins,
        passed=passed,
        all_passed=all(passed.values()),
        samples=samples,
        M=model.M,
    )
