"""Steady states via order-preserving iteration.

All stationary problems here have the form  A s + s * G(x, s) = 0  with a
Metzler dispersal matrix A and a growth rate G strictly decreasing in s.
The workhorse rewrites the equation as the fixed point

    s = (sigma I - A)^{-1} [ s (sigma + G(x, s)) ]

with sigma large enough that (sigma I - A) is an M-matrix (nonnegative
inverse) and s -> s (sigma + G) is nondecreasing on the working interval.
The map is then order preserving: started from a lower solution it climbs,
from an upper solution it descends, and the two limits bracket every
solution in between.  A short damped-Newton polish drives the final
residual to solver precision; pseudo-time stepping is kept as a fallback
for stalls.

On top of the scalar solver sit the two-species routines: the chained
iteration for the zero-rate limit system, sandwich certificates measuring
how fast steady states approach their limit profiles, the comparison
verdict for lower/upper pairs, and the alternating corner scheme that
brackets positive steady states of the full system from both ends of the
competitive order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import Field, Grid, StatePair
from .kernels import DispersalOperator, KernelSpec, assemble
from .reaction import F_plus, ReactionModel, solve_F
from .spectral import principal_eigenpair

__all__ = [
    "Growth",
    "SteadyResult",
    "SandwichCertificate",
    "LimitSystemResult",
    "PairResult",
    "AsymptoticCertificate",
    "SteadySolveError",
    "growth_f_at",
    "growth_g_at",
    "growth_chain",
    "growth_composite",
    "stationary_residual",
    "solve_single",
    "monotone_bracket",
    "theta_sandwich",
    "monotone_iterate_V",
    "check_comparison",
    "solve_pair",
    "asymptotic_sandwich",
]


class SteadySolveError(RuntimeError):
    """A stationary solve stalled or lost its ordering invariants."""


@dataclass(frozen=True)
class Growth:
    """Per-node growth rate s -> G(x, s) together with its s-derivative."""

    value: Callable
    slope: Callable


def growth_f_at(model: ReactionModel, x: np.ndarray, v_values) -> Growth:
    """u-equation growth f(x, u, v) at frozen competitor profile v."""
    v = np.asarray(v_values, dtype=float)
    return Growth(
        value=lambda s: model.f(x, s, v),
        slope=lambda s: model.f_u(x, s, v),
    )


def growth_g_at(model: ReactionModel, x: np.ndarray, u_values) -> Growth:
    """v-equation growth g(x, u, v) at frozen competitor profile u."""
    u = np.asarray(u_values, dtype=float)
    return Growth(
        value=lambda s: model.g(x, u, s),
        slope=lambda s: model.g_v(x, u, s),
    )


def growth_chain(model: ReactionModel, x: np.ndarray, v_prev) -> Growth:
    """v-equation growth with u frozen on the nullcline of the previous iterate."""
    u = F_plus(model, x, np.asarray(v_prev, dtype=float))
    return growth_g_at(model, x, u)


def growth_composite(model: ReactionModel, x: np.ndarray) -> Growth:
    """Fully reduced growth g(x, F_plus(x, s), s) for the limit system.

    The slope uses the implicit-function derivative of the root map where
    the clamp is inactive and drops it where F < 0.
    """

    def value(s):
        return model.g(x, F_plus(model, x, s), s)

    def slope(s):
        root = solve_F(model, x, s)
        u = np.maximum(0.0, root)
        dF = np.where(root > 0.0, -model.f_v(x, u, s) / model.f_u(x, u, s), 0.0)
        return model.g_u(x, u, s) * dF + model.g_v(x, u, s)

    return Growth(value=value, slope=slope)


def stationary_residual(op: DispersalOperator, growth: Growth, s_values) -> np.ndarray:
    """Pointwise residual of A s + s G(x, s)."""
    s = np.asarray(s_values, dtype=float)
    return op.matrix @ s + s * growth.value(s)


@dataclass(frozen=True)
class SteadyResult:
    state: Field
    residual: float
    iterations: int
    bracket: Optional[tuple] = None  # (lower Field, upper Field)
    positive: bool = True
    precondition: float = float("nan")  # principal bound gating existence
    bracket_gap: float = float("nan")
    note: str = ""


# ---------------------------------------------------------------------------
# scalar monotone solver


def _growth_envelope(growth: Growth, n: int, upper_const: float, levels: int = 65):
    """Sampled bounds: max of -(G + s G') and max |G'| over constant levels."""
    worst_h = 0.0
    worst_lip = 0.0
    for level in np.linspace(0.0, upper_const, levels):
        s = np.full(n, level)
        g = growth.value(s)
        gs = growth.slope(s)
        worst_h = max(worst_h, float(np.max(-(g + s * gs))))
        worst_lip = max(worst_lip, float(np.max(np.abs(gs))))
    return worst_h, worst_lip


def _sweep_context(A: np.ndarray, growth: Growth, upper_const: float):
    n = A.shape[0]
    worst_h, lip = _growth_envelope(growth, n, upper_const)
    sigma = float(np.max(np.sum(np.abs(A), axis=1))) + 1.1 * max(worst_h, 0.0) + 1.0
    Minv = np.linalg.inv(sigma * np.eye(n) - A)
    return sigma, Minv, lip


def _sweep(Minv, sigma, growth, start, direction, stop_tol, max_sweeps, relax, mono_tol):
    """One-sided monotone fixed-point sweep; direction +1 climbs, -1 descends."""
    s = start.copy()
    for k in range(1, max_sweeps + 1):
        s_new = Minv @ (s * (sigma + growth.value(s)))
        if relax != 1.0:
            s_new = relax * s_new + (1.0 - relax) * s
        drift = s_new - s
        slack = mono_tol * (1.0 + float(np.max(np.abs(s))))
        if direction > 0 and float(drift.min()) < -slack:
            raise SteadySolveError(
                f"climbing sweep lost monotonicity by {-drift.min():.3e} "
                "(audit failure or invalid seed)"
            )
        if direction < 0 and float(drift.max()) > slack:
            raise SteadySolveError(
                f"descending sweep lost monotonicity by {drift.max():.3e} "
                "(audit failure or invalid seed)"
            )
        s = s_new
        if float(np.max(np.abs(drift))) <= stop_tol:
            return s, k, True
    return s, max_sweeps, False


def _pseudo_time(A, growth, s0, tol, upper_const, max_steps=500_000):
    """Explicit relaxation toward the steady state; slow but unconditionally safe."""
    n = A.shape[0]
    worst_h, lip = _growth_envelope(growth, n, upper_const)
    tau = 0.9 / (float(np.max(np.abs(np.diag(A)))) + worst_h + lip + 1.0)
    s = s0.copy()
    for k in range(max_steps):
        r = A @ s + s * growth.value(s)
        if float(np.max(np.abs(r))) <= tol:
            return s, k, True
        s = np.maximum(s + tau * r, 0.0)
    return s, max_steps, False


def _newton_polish(A, growth, s0, tol, max_iter=12):
    s = s0.copy()
    best_res = float(np.max(np.abs(A @ s + s * growth.value(s))))
    for _ in range(max_iter):
        if best_res <= tol:
            break
        r = A @ s + s * growth.value(s)
        J = A + np.diag(growth.value(s) + s * growth.slope(s))
        try:
            delta = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        improved = False
        for _ in range(40):
            s_try = s + t * delta
            if float(s_try.min()) > 0.0:
                res_try = float(np.max(np.abs(A @ s_try + s_try * growth.value(s_try))))
                if res_try < best_res:
                    s, best_res, improved = s_try, res_try, True
                    break
            t *= 0.5
        if not improved:
            break
    return s, best_res


def _upper_constant(A, growth, M, n, factor_limit=8):
    cand = float(M)
    for _ in range(factor_limit):
        level = np.full(n, cand)
        if float(np.max(A @ level + level * growth.value(level))) <= 0.0:
            return cand
        cand *= 2.0
    raise SteadySolveError(
        f"no constant upper solution found up to {cand / 2:.3g}; "
        "the growth term does not dominate dispersal at large density"
    )


def solve_single(
    op: DispersalOperator,
    growth: Growth,
    M: float,
    tol: float = 1e-10,
    relaxation: float = 1.0,
    max_sweeps: int = 20_000,
    sweep_tol: float = 1e-7,
) -> SteadyResult:
    """Positive steady state of  op[s] + s G(x, s) = 0,  or the zero state.

    Existence is gated by the principal bound of the linearization at zero:
    when it is nonpositive the zero state is returned flagged.  Otherwise a
    small positive lower solution seeds the climbing sweep and a constant
    upper solution seeds the descending one; the midpoint of the bracket is
    polished by damped Newton, which carries the residual from the sweeps'
    coarse stopping point (sweep_tol, relative) down to solver precision.
    """
    grid = op.grid
    A = op.matrix
    n = grid.n
    zeros = np.zeros(n)

    # cheap one-sided gates from the constant test function; the eigensolve
    # is only needed when the sign of the principal bound is ambiguous
    L_diag_free = A @ np.ones(n) + growth.value(zeros)
    if float(L_diag_free.max()) < 0.0:
        return SteadyResult(
            state=Field(grid, zeros),
            residual=0.0,
            iterations=0,
            bracket=None,
            positive=False,
            precondition=float(L_diag_free.max()),
            note="principal bound of the zero linearization is nonpositive",
        )
    if float(L_diag_free.min()) > 0.0:
        lam, phi1 = float(L_diag_free.min()), np.ones(n)
    else:
        L = A + np.diag(growth.value(zeros))
        lam, phi1, *_ = principal_eigenpair(
            L, tol=1e-8, max_iter=2_000, fallback="dense"
        )
        if lam <= 0.0:
            return SteadyResult(
                state=Field(grid, zeros),
                residual=0.0,
                iterations=0,
                bracket=None,
                positive=False,
                precondition=lam,
                note="principal bound of the zero linearization is nonpositive",
            )

    upper_const = _upper_constant(A, growth, M, n)
    sigma, Minv, lip = _sweep_context(A, growth, upper_const)

    # shrink the seed until it is a genuine lower solution
    phi1 = phi1 / phi1.max()
    eps = min(0.5 * upper_const, lam / (2.0 * lip + 1e-300))
    seed = None
    for _ in range(200):
        cand = eps * phi1
        if float(np.min(A @ cand + cand * growth.value(cand))) >= 0.0:
            seed = cand
            break
        eps *= 0.5
    if seed is None:
        raise SteadySolveError("could not seed a lower solution from the eigenfunction")

    stop_tol = max(tol / (4.0 * sigma), min(sweep_tol * (1.0 + upper_const), 1.0))
    low, it_low, ok_low = _sweep(
        Minv, sigma, growth, seed, +1, stop_tol, max_sweeps, relaxation, 1e-9
    )
    up, it_up, ok_up = _sweep(
        Minv, sigma, growth, np.full(n, upper_const), -1, stop_tol, max_sweeps,
        relaxation, 1e-9,
    )
    iterations = it_low + it_up
    if not (ok_low and ok_up):
        mid, extra, ok = _pseudo_time(A, growth, 0.5 * (low + up), tol, upper_const)
        iterations += extra
        if not ok:
            raise SteadySolveError(
                "stationary solve stalled; last bracket gap "
                f"{float(np.max(np.abs(up - low))):.3e}"
            )
        low = up = mid

    bracket_gap = float(np.max(np.abs(up - low)))
    state, residual = _newton_polish(A, growth, 0.5 * (low + up), min(tol, 1e-13))
    if residual > tol:
        state, extra, ok = _pseudo_time(A, growth, state, tol, upper_const)
        iterations += extra
        if not ok:
            raise SteadySolveError(f"residual stuck at {residual:.3e} > tol {tol:.1e}")
        residual = float(np.max(np.abs(A @ state + state * growth.value(state))))

    return SteadyResult(
        state=Field(grid, state),
        residual=residual,
        iterations=iterations,
        bracket=(Field(grid, low), Field(grid, up)),
        positive=bool(state.min() > 0.0),
        precondition=lam,
        bracket_gap=bracket_gap,
    )


def monotone_bracket(
    op: DispersalOperator,
    growth: Growth,
    lower: Field,
    upper: Field,
    tol: float = 1e-10,
    seed_tol: float = 1e-8,
    max_sweeps: int = 20_000,
):
    """Sweep a supplied lower/upper solution pair to its two limits.

    The seeds are validated against their one-sided residual requirements;
    the returned limits bracket every solution between the seeds, so their
    gap is a uniqueness probe.
    """
    r_low = stationary_residual(op, growth, lower.values)
    r_up = stationary_residual(op, growth, upper.values)
    if float(r_low.min()) < -seed_tol:
        raise ValueError(
            f"lower seed violates its residual sign by {-r_low.min():.3e}"
        )
    if float(r_up.max()) > seed_tol:
        raise ValueError(f"upper seed violates its residual sign by {r_up.max():.3e}")
    if np.any(lower.values > upper.values + seed_tol):
        raise ValueError("seeds are not ordered (lower <= upper required)")

    A = op.matrix
    upper_const = max(float(upper.values.max()), 1e-12)
    sigma, Minv, _ = _sweep_context(A, growth, upper_const)
    stop_tol = max(tol / (4.0 * sigma), 1e-15)
    mono_tol = max(1e-9, 10.0 * seed_tol)
    low, _, ok_low = _sweep(
        Minv, sigma, growth, lower.values, +1, stop_tol, max_sweeps, 1.0, mono_tol
    )
    up, _, ok_up = _sweep(
        Minv, sigma, growth, upper.values, -1, stop_tol, max_sweeps, 1.0, mono_tol
    )
    if not (ok_low and ok_up):
        raise SteadySolveError("bracket sweep did not converge")
    gap = float(np.max(np.abs(up - low)))
    return Field(op.grid, low), Field(op.grid, up), gap


# ---------------------------------------------------------------------------
# sandwich certificates for the single-species state


@dataclass(frozen=True)
class SandwichCertificate:
    """Measured envelopes  (limit - C_low d)_+ < state < limit + C_up sqrt(d).

    gap_* are the raw one-sided deviations from the limit profile per rate;
    margins are the slack of the certified envelope at the fitted constants
    (zero at the binding rate, nonnegative everywhere by construction).
    """

    d_values: list
    lower_margin: list
    upper_margin: list
    fitted_constants: tuple  # (C_lower, C_upper)
    fitted_exponents: tuple  # (p_lower, p_upper) from log-log fits of the gaps
    gap_lower: list
    gap_upper: list


def _fit_exponent(d_values, gaps, floor: float = 1e-13) -> float:
    d = np.asarray(d_values, dtype=float)
    g = np.asarray(gaps, dtype=float)
    mask = g > floor
    if int(mask.sum()) < 2:
        return float("nan")
    return float(np.polyfit(np.log(d[mask]), np.log(g[mask]), 1)[0])


def theta_sandwich(
    kernel: KernelSpec,
    mode: str,
    grid: Grid,
    model: ReactionModel,
    d_list,
    tol: float = 1e-10,
) -> SandwichCertificate:
    """Squeeze the single-species state between clamped nullcline envelopes."""
    d_list = [float(d) for d in d_list]
    if any(not 0.0 < d < 1.0 for d in d_list):
        raise ValueError("rates must lie in (0, 1)")
    x = grid.nodes
    limit = F_plus(model, x, np.zeros(grid.n))
    gap_lower, gap_upper, states = [], [], []
    for d in d_list:
        op = assemble(kernel, grid, mode, d)
        res = solve_single(op, growth_f_at(model, x, np.zeros(grid.n)), model.M, tol)
        if not res.positive:
            raise SteadySolveError(f"no positive single-species state at d={d}")
        theta = res.state.values
        states.append(theta)
        gap_upper.append(max(float(np.max(theta - limit)), 0.0))
        gap_lower.append(max(float(np.max(limit - theta)), 0.0))

    # inflate the binding ratio by a relative hair so the envelopes hold
    # strictly; margins within solver precision of zero are snapped to zero
    c_upper = max((g / np.sqrt(d) for g, d in zip(gap_upper, d_list)), default=0.0)
    c_lower = max((g / d for g, d in zip(gap_lower, d_list)), default=0.0)
    c_upper *= 1.0 + 1e-9
    c_lower *= 1.0 + 1e-9
    snap = lambda m: max(m, 0.0) if m > -1e-12 else m
    lower_margin = [
        snap(float(np.min(theta - np.maximum(limit - c_lower * d, 0.0))))
        for theta, d in zip(states, d_list)
    ]
    upper_margin = [
        snap(float(np.min(limit + c_upper * np.sqrt(d) - theta)))
        for theta, d in zip(states, d_list)
    ]
    return SandwichCertificate(
        d_values=d_list,
        lower_margin=lower_margin,
        upper_margin=upper_margin,
        fitted_constants=(float(c_lower), float(c_upper)),
        fitted_exponents=(
            _fit_exponent(d_list, gap_lower),
            _fit_exponent(d_list, gap_upper),
        ),
        gap_lower=gap_lower,
        gap_upper=gap_upper,
    )


# ---------------------------------------------------------------------------
# the zero-rate limit system


@dataclass(frozen=True)
class LimitSystemResult:
    """Limit profiles (U0, V0) with the chain that produced them.

    The chain freezes u on the nullcline of the previous v-iterate and
    solves the resulting single-species problem; it climbs monotonically
    and stays under the v-only state eta.  The two-sided probe re-solves
    the fully reduced equation from below (first chain iterate) and above
    (eta); its gap is the numerical uniqueness certificate.
    """

    V0: Field
    U0: Field
    chain: list
    eta: Field
    mu0: float
    nu0: float
    iterations: int
    residual: float
    probe_gap: float
    probe_lower: Optional[Field]
    probe_upper: Optional[Field]
    positive: bool
    note: str = ""


def monotone_iterate_V(
    DOp: DispersalOperator,
    model: ReactionModel,
    tol: float = 1e-10,
    max_chain: int = 500,
) -> LimitSystemResult:
    grid = DOp.grid
    x = grid.nodes
    zeros = np.zeros(grid.n)

    gamma0 = model.g(x, F_plus(model, x, zeros), zeros)
    mu0, *_ = principal_eigenpair(
        DOp.matrix + np.diag(gamma0), tol=1e-10, max_iter=20_000, fallback="dense"
    )

    eta_res = solve_single(DOp, growth_g_at(model, x, zeros), model.M, tol)
    eta = eta_res.state
    nu0 = float(np.max(model.f(x, zeros, eta.values))) if eta_res.positive else float("nan")

    if mu0 <= 0.0:
        return LimitSystemResult(
            V0=Field(grid, zeros),
            U0=Field(grid, F_plus(model, x, zeros)),
            chain=[],
            eta=eta,
            mu0=mu0,
            nu0=nu0,
            iterations=0,
            residual=0.0,
            probe_gap=float("nan"),
            probe_lower=None,
            probe_upper=None,
            positive=False,
            note="limit system has no positive v-state (mu0 <= 0)",
        )
    if not eta_res.positive:
        raise SteadySolveError("mu0 > 0 but the v-only state is missing; audit failure")

    chain_tol = max(1e-9, 10.0 * tol)
    chain: list[Field] = []
    v_prev = zeros
    iterations = 0
    for _ in range(max_chain):
        res = solve_single(DOp, growth_chain(model, x, v_prev), model.M, tol)
        if not res.positive:
            raise SteadySolveError("chain step lost positivity; audit failure")
        v_new = res.state.values
        iterations += 1
        if chain and float(np.min(v_new - v_prev)) < -chain_tol:
            raise SteadySolveError(
                f"chain is not nondecreasing (dip {float(np.min(v_new - v_prev)):.3e})"
            )
        if float(np.max(v_new - eta.values)) > chain_tol:
            raise SteadySolveError(
                f"chain exceeded eta by {float(np.max(v_new - eta.values)):.3e}"
            )
        chain.append(Field(grid, v_new))
        if chain and float(np.max(np.abs(v_new - v_prev))) <= tol:
            v_prev = v_new
            break
        v_prev = v_new
    else:
        raise SteadySolveError(f"chain did not settle within {max_chain} steps")

    composite = growth_composite(model, x)
    V0_values, residual = _newton_polish(DOp.matrix, composite, v_prev, min(tol, 1e-12))
    V0 = Field(grid, V0_values)
    U0 = Field(grid, F_plus(model, x, V0_values))

    probe_lower, probe_upper, probe_gap = monotone_bracket(
        DOp, composite, chain[0], eta, tol=tol, seed_tol=max(1e-8, 100.0 * tol)
    )

    return LimitSystemResult(
        V0=V0,
        U0=U0,
        chain=chain,
        eta=eta,
        mu0=mu0,
        nu0=nu0,
        iterations=iterations,
        residual=residual,
        probe_gap=probe_gap,
        probe_lower=probe_lower,
        probe_upper=probe_upper,
        positive=True,
    )


def check_comparison(
    DOp: DispersalOperator,
    model: ReactionModel,
    sub: Field,
    super_: Field,
    tol: float = 1e-8,
) -> str:
    """Order verdict for a lower/upper solution pair of the limit equation.

    Returns "strictly-below", "equal", or "violation"; the inputs must
    satisfy their one-sided residual requirements or they are rejected.
    """
    x = DOp.grid.nodes
    composite = growth_composite(model, x)
    r_sub = stationary_residual(DOp, composite, sub.values)
    r_sup = stationary_residual(DOp, composite, super_.values)
    if float(r_sub.min()) < -tol:
        raise ValueError(f"sub fails its lower-solution check by {-r_sub.min():.3e}")
    if float(r_sup.max()) > tol:
        raise ValueError(f"super fails its upper-solution check by {r_sup.max():.3e}")
    diff = super_.values - sub.values
    if float(np.max(np.abs(diff))) <= tol:
        return "equal"
    if float(diff.min()) > tol:
        return "strictly-below"
    return "violation"


# ---------------------------------------------------------------------------
# positive pairs of the full stationary system


@dataclass(frozen=True)
class PairResult:
    """Bracketing limits for positive steady pairs of the full system.

    `upper` descends (in the competitive order) from the u-only corner,
    `lower` climbs from the v-only corner.  When both limits agree and are
    strictly positive, `pair` holds the common state; two distinct strictly
    positive limits witness multiplicity; a semi-trivial limit on either
    side excludes positive pairs.
    """

    pair: Optional[StatePair]
    lower: StatePair
    upper: StatePair
    agree: bool
    gap: float
    positive: bool
    lower_positive: bool
    upper_positive: bool
    iterations: int
    residual: float
    theta: Field
    eta: Field


def _pair_residual(dOp, DOp, model, u, v):
    x = dOp.grid.nodes
    ru = dOp.matrix @ u + u * model.f(x, u, v)
    rv = DOp.matrix @ v + v * model.g(x, u, v)
    return max(float(np.max(np.abs(ru))), float(np.max(np.abs(rv))))


def _pair_newton(dOp, DOp, model, u0, v0, tol, max_iter=10):
    x = dOp.grid.nodes
    n = dOp.grid.n
    u, v = u0.copy(), v0.copy()
    best = _pair_residual(dOp, DOp, model, u, v)
    for _ in range(max_iter):
        if best <= tol:
            break
        ru = dOp.matrix @ u + u * model.f(x, u, v)
        rv = DOp.matrix @ v + v * model.g(x, u, v)
        J = np.block(
            [
                [
                    dOp.matrix + np.diag(model.f(x, u, v) + u * model.f_u(x, u, v)),
                    np.diag(u * model.f_v(x, u, v)),
                ],
                [
                    np.diag(v * model.g_u(x, u, v)),
                    DOp.matrix + np.diag(model.g(x, u, v) + v * model.g_v(x, u, v)),
                ],
            ]
        )
        try:
            delta = np.linalg.solve(J, -np.concatenate([ru, rv]))
        except np.linalg.LinAlgError:
            break
        t, improved = 1.0, False
        for _ in range(40):
            u_try = u + t * delta[:n]
            v_try = v + t * delta[n:]
            if float(u_try.min()) > 0.0 and float(v_try.min()) > 0.0:
                res_try = _pair_residual(dOp, DOp, model, u_try, v_try)
                if res_try < best:
                    u, v, best, improved = u_try, v_try, res_try, True
                    break
            t *= 0.5
        if not improved:
            break
    return u, v, best


def solve_pair(
    dOp: DispersalOperator,
    DOp: DispersalOperator,
    model: ReactionModel,
    tol: float = 1e-10,
    max_outer: int = 200,
    agree_tol: Optional[float] = None,
) -> PairResult:
    """Alternating corner scheme for positive pairs of the full system.

    From (theta, 0): resolve v at frozen u, then u at frozen v, so the pair
    descends in the competitive order.  From (0, eta) the mirrored order of
    updates climbs.  Each inner resolve is a full single-species solve, so
    a vanishing inner state signals collapse to a semi-trivial corner.
    """
    if agree_tol is None:
        agree_tol = max(10.0 * tol, 1e-9)
    grid = dOp.grid
    x = grid.nodes
    zeros = np.zeros(grid.n)

    theta_res = solve_single(dOp, growth_f_at(model, x, zeros), model.M, tol)
    eta_res = solve_single(DOp, growth_g_at(model, x, zeros), model.M, tol)
    if not theta_res.positive or not eta_res.positive:
        raise ValueError(
            "both semi-trivial states must exist before bracketing positive pairs"
        )
    theta, eta = theta_res.state, eta_res.state

    def solve_u(v_frozen):
        return solve_single(dOp, growth_f_at(model, x, v_frozen), model.M, tol).state.values

    def solve_v(u_frozen):
        return solve_single(DOp, growth_g_at(model, x, u_frozen), model.M, tol).state.values

    u_hi, v_hi = theta.values.copy(), zeros.copy()
    u_lo, v_lo = zeros.copy(), eta.values.copy()
    mono_tol = max(1e-9, 10.0 * tol)
    iterations = 0
    for _ in range(max_outer):
        v_hi_new = solve_v(u_hi)
        u_hi_new = solve_u(v_hi_new)
        u_lo_new = solve_u(v_lo)
        v_lo_new = solve_v(u_lo_new)
        iterations += 1

        if float(np.max(u_hi_new - u_hi)) > mono_tol or float(np.min(v_hi_new - v_hi)) < -mono_tol:
            raise SteadySolveError("descending corner sequence lost its ordering")
        if float(np.min(u_lo_new - u_lo)) < -mono_tol or float(np.max(v_lo_new - v_lo)) > mono_tol:
            raise SteadySolveError("climbing corner sequence lost its ordering")
        if float(np.min(u_hi_new - u_lo_new)) < -mono_tol or float(np.max(v_hi_new - v_lo_new)) > mono_tol:
            raise SteadySolveError("corner sequences crossed in the competitive order")

        change = max(
            float(np.max(np.abs(u_hi_new - u_hi))),
            float(np.max(np.abs(v_hi_new - v_hi))),
            float(np.max(np.abs(u_lo_new - u_lo))),
            float(np.max(np.abs(v_lo_new - v_lo))),
        )
        u_hi, v_hi, u_lo, v_lo = u_hi_new, v_hi_new, u_lo_new, v_lo_new
        if change <= 0.1 * tol:
            break
    else:
        raise SteadySolveError(f"corner scheme did not settle within {max_outer} rounds")

    gap = max(float(np.max(np.abs(u_hi - u_lo))), float(np.max(np.abs(v_hi - v_lo))))
    agree = bool(gap <= agree_tol)
    upper_positive = bool(u_hi.min() > 0.0 and v_hi.min() > 0.0)
    lower_positive = bool(u_lo.min() > 0.0 and v_lo.min() > 0.0)
    positive = bool(agree and upper_positive and lower_positive)

    pair = None
    residual = _pair_residual(dOp, DOp, model, u_hi, v_hi)
    if positive:
        u_fin, v_fin, residual = _pair_newton(
            dOp, DOp, model, 0.5 * (u_hi + u_lo), 0.5 * (v_hi + v_lo), min(tol, 1e-12)
        )
        pair = StatePair(Field(grid, u_fin), Field(grid, v_fin))

    return PairResult(
        pair=pair,
        lower=StatePair(Field(grid, u_lo), Field(grid, v_lo)),
        upper=StatePair(Field(grid, u_hi), Field(grid, v_hi)),
        agree=agree,
        gap=gap,
        positive=positive,
        lower_positive=lower_positive,
        upper_positive=upper_positive,
        iterations=iterations,
        residual=residual,
        theta=theta,
        eta=eta,
    )


# ---------------------------------------------------------------------------
# sandwich certificate for the full pair against the limit profiles


@dataclass(frozen=True)
class AsymptoticCertificate:
    """Deviation of positive pairs from the limit profiles along shrinking rates.

    Split rates per component: the u-deviation below its limit decays like
    the rate, above like its square root; for v the roles swap.  The
    nullcline series tracks how tightly u rides F_plus(x, v) itself.
    """

    d_values: list
    u_gap_upper: list
    u_gap_lower: list
    v_gap_upper: list
    v_gap_lower: list
    u_vs_nullcline: list
    u_norm: list
    v_norm: list
    vacuous: list
    fitted_constants: dict
    fitted_exponents: dict


def asymptotic_sandwich(
    kernel_u: KernelSpec,
    mode_u: str,
    kernel_v: KernelSpec,
    mode_v: str,
    grid: Grid,
    model: ReactionModel,
    D: float,
    d_list,
    tol: float = 1e-10,
) -> AsymptoticCertificate:
    d_list = [float(d) for d in d_list]
    DOp = assemble(kernel_v, grid, mode_v, D)
    limit = monotone_iterate_V(DOp, model, tol=tol)
    if not limit.positive:
        raise ValueError("limit system has no positive state; certificate is vacuous")
    U0, V0 = limit.U0.values, limit.V0.values
    x = grid.nodes

    rows = {k: [] for k in (
        "u_up", "u_low", "v_up", "v_low", "null", "u_norm", "v_norm", "vacuous"
    )}
    for d in d_list:
        dOp = assemble(kernel_u, grid, mode_u, d)
        pr = solve_pair(dOp, DOp, model, tol=tol)
        if not pr.positive:
            for k in ("u_up", "u_low", "v_up", "v_low", "null", "u_norm", "v_norm"):
                rows[k].append(float("nan"))
            rows["vacuous"].append(True)
            continue
        u, v = pr.pair.u.values, pr.pair.v.values
        rows["u_up"].append(max(float(np.max(u - U0)), 0.0))
        rows["u_low"].append(max(float(np.max(U0 - u)), 0.0))
        rows["v_up"].append(max(float(np.max(v - V0)), 0.0))
        rows["v_low"].append(max(float(np.max(V0 - v)), 0.0))
        rows["null"].append(float(np.max(np.abs(u - F_plus(model, x, v)))))
        rows["u_norm"].append(float(np.max(np.abs(u - U0))))
        rows["v_norm"].append(float(np.max(np.abs(v - V0))))
        rows["vacuous"].append(False)

    live = [(d, i) for i, d in enumerate(d_list) if not rows["vacuous"][i]]
    def _const(series, power):
        vals = [rows[series][i] / d ** power for d, i in live if np.isfinite(rows[series][i])]
        return max(vals, default=float("nan"))

    constants = {
        "C_u": max(_const("u_up", 0.5), _const("u_low", 1.0)),
        "C_v": max(_const("v_low", 0.5), _const("v_up", 1.0)),
        "C_nullcline": _const("null", 0.5),
    }
    exponents = {
        "u_upper": _fit_exponent(d_list, rows["u_up"]),
        "u_lower": _fit_exponent(d_list, rows["u_low"]),
        "v_upper": _fit_exponent(d_list, rows["v_up"]),
        "v_lower": _fit_exponent(d_list, rows["v_low"]),
        "u_vs_nullcline": _fit_exponent(d_list, rows["null"]),
    }
    return AsymptoticCertificate(
        d_values=d_list,
        u_gap_upper=rows["u_up"],
        u_gap_lower=rows["u_low"],
        v_gap_upper=rows["v_up"],
        v_gap_lower=rows["v_low"],
        u_vs_nullcline=rows["null"],
        u_norm=rows["u_norm"],
        v_norm=rows["v_norm"],
        vacuous=rows["vacuous"],
        fitted_constants=constants,
        fitted_exponents=exponents,
    )
