"""Phase classification of a competition scenario and its verification.

A scenario is classified purely from the signs of the small-rate invasion
indicators (plus the strict-positivity flag of the u-kernel on the closed
domain); simulations never feed back into the prediction:

    mu0 < 0                          -> u excludes v
    mu0 > 0, nu0 < 0                 -> v excludes u
    mu0 > 0, nu0 > 0, strict kernel  -> coexistence (unique positive state)

Indicators inside a configurable dead band map to "undecided": the
neutral boundary cases carry no dynamics prediction, so the classifier
refuses to guess.  Verification then integrates the system from random
strictly positive states plus the two perturbed semi-trivial corners and
compares every observed outcome against the prediction; coexistence
scenarios additionally get a two-sided bracket on the positive pair as a
uniqueness witness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .grid import Field, Grid, StatePair, build_grid
from .kernels import DispersalOperator, KernelSpec, assemble
from .reaction import (
    AuditReport,
    LotkaVolterraParams,
    ReactionModel,
    audit_assumptions,
    lv_model,
)
from .spectral import IndicatorSet, indicators
from . import dynamics, steady

__all__ = [
    "Scenario",
    "PreparedScenario",
    "Prediction",
    "RunRecord",
    "ClassificationReport",
    "SweepCell",
    "HypothesisError",
    "resource_profile",
    "prepare",
    "classify",
    "verify",
    "sweep",
]

PROFILES = ("constant", "linear", "sinusoidal")


class HypothesisError(RuntimeError):
    """The scenario violates a standing hypothesis (audit or existence)."""


def resource_profile(profile: str, m0: float, m1: float, freq: float = 1.0):
    """Resource distribution m(x) as a callable: constant, linear, or sinusoidal."""
    if profile == "constant":
        return lambda x: np.full_like(np.asarray(x, dtype=float), m0)
    if profile == "linear":
        return lambda x: m0 + m1 * np.asarray(x, dtype=float)
    if profile == "sinusoidal":
        return lambda x: m0 + m1 * np.sin(2.0 * np.pi * freq * np.asarray(x, dtype=float))
    raise ValueError(f"unknown resource profile {profile!r}; choose from {PROFILES}")


@dataclass(frozen=True)
class Scenario:
    """Complete parameterization of one classification run."""

    grid_a: float = 0.0
    grid_b: float = 1.0
    grid_n: int = 100
    kernel_u: KernelSpec = KernelSpec("gaussian", 0.1)
    mode_u: str = "N"
    kernel_v: KernelSpec = KernelSpec("gaussian", 0.1)
    mode_v: str = "N"
    profile: str = "constant"
    m0: float = 1.0
    m1: float = 0.0
    m_freq: float = 1.0
    b: float = 0.5
    c: float = 0.5
    d: float = 0.01
    D: float = 0.1
    seed: int = 0
    steady_tol: float = 1e-10
    spectral_tol: float = 1e-10
    dead_band: float = 1e-6
    convergence_eps: float = 1e-9
    t_max: float = 2000.0
    profile_tol: float = 1e-5
    snapshot_stride: int = 50
    audit_samples: int = 32

    def model(self, grid: Grid) -> ReactionModel:
        m_fn = resource_profile(self.profile, self.m0, self.m1, self.m_freq)
        return lv_model(
            LotkaVolterraParams(m=m_fn, b=self.b, c=self.c),
            grid=grid,
            require_weak_competition=False,
        )


@dataclass(frozen=True)
class PreparedScenario:
    scenario: Scenario
    grid: Grid
    model: ReactionModel
    dOp: DispersalOperator
    DOp: DispersalOperator
    audit: AuditReport
    theta: steady.SteadyResult
    eta: steady.SteadyResult
    indicators: IndicatorSet
    strict_kernel: bool
    dt: float


def prepare(scenario: Scenario) -> PreparedScenario:
    """Assemble a scenario and enforce its standing hypotheses.

    Raises HypothesisError when the assumption audit fails or either
    semi-trivial state is missing; both conditions map to CLI exit code 3.
    """
    grid = build_grid(scenario.grid_a, scenario.grid_b, scenario.grid_n)
    model = scenario.model(grid)
    audit = audit_assumptions(model, grid, samples=scenario.audit_samples)
    if not audit.all_passed:
        failed = [name for name, ok in audit.passed.items() if not ok]
        raise HypothesisError(
            f"assumption audit failed for {failed} "
            f"(margins: {({k: audit.margins[k] for k in failed})})"
        )
    dOp = assemble(scenario.kernel_u, grid, scenario.mode_u, scenario.d)
    DOp = assemble(scenario.kernel_v, grid, scenario.mode_v, scenario.D)

    x = grid.nodes
    zeros = np.zeros(grid.n)
    theta = steady.solve_single(
        dOp, steady.growth_f_at(model, x, zeros), model.M, scenario.steady_tol
    )
    eta = steady.solve_single(
        DOp, steady.growth_g_at(model, x, zeros), model.M, scenario.steady_tol
    )
    if not theta.positive or not eta.positive:
        missing = []
        if not theta.positive:
            missing.append("(theta_d, 0)")
        if not eta.positive:
            missing.append("(0, eta_D)")
        raise HypothesisError(f"semi-trivial state missing: {', '.join(missing)}")

    ind = indicators(
        dOp, DOp, model, theta.state, eta.state, tol=scenario.spectral_tol
    )
    return PreparedScenario(
        scenario=scenario,
        grid=grid,
        model=model,
        dOp=dOp,
        DOp=DOp,
        audit=audit,
        theta=theta,
        eta=eta,
        indicators=ind,
        strict_kernel=dOp.strict_positive,
        dt=dynamics.dt_bound(dOp, DOp, model),
    )


@dataclass(frozen=True)
class Prediction:
    kind: str
    warnings: tuple = ()
    reason: str = ""


def classify(prepared: PreparedScenario) -> Prediction:
    """Predicted long-run outcome from indicator signs alone."""
    db = prepared.scenario.dead_band
    mu0, nu0 = prepared.indicators.mu0, prepared.indicators.nu0
    if abs(mu0) <= db:
        return Prediction("undecided", reason=f"mu0={mu0:.3e} inside dead band {db:g}")
    if mu0 < 0.0:
        return Prediction("u_excludes_v")
    if abs(nu0) <= db:
        return Prediction("undecided", reason=f"nu0={nu0:.3e} inside dead band {db:g}")
    if nu0 < 0.0:
        return Prediction("v_excludes_u")
    warnings = ()
    if not prepared.strict_kernel:
        warnings = (
            "coexistence branch hypothesis unmet: the u-kernel is not strictly "
            "positive on the closed domain",
        )
    return Prediction("coexistence", warnings=warnings)


@dataclass(frozen=True)
class RunRecord:
    initial_kind: str
    outcome_kind: str
    time_to_converge: float
    terminal_min_u: float
    terminal_min_v: float


@dataclass(frozen=True)
class ClassificationReport:
    scenario: Scenario
    indicators: IndicatorSet
    strict_kernel: bool
    predicted: str
    predicted_warnings: tuple
    observed: str
    runs: tuple
    agreement: bool
    diagnostics: dict = field(default_factory=dict, compare=False)
    notes: tuple = ()


def verify(
    prepared: PreparedScenario,
    trials: int = 20,
    rng: Optional[np.random.Generator] = None,
    include_corners: bool = True,
) -> ClassificationReport:
    """Simulate from many strictly positive starts and compare with the prediction."""
    sc = prepared.scenario
    if rng is None:
        rng = np.random.default_rng(sc.seed)
    prediction = classify(prepared)

    config = dynamics.SimConfig(
        dt=prepared.dt,
        t_max=sc.t_max,
        convergence_eps=sc.convergence_eps,
        snapshot_stride=sc.snapshot_stride,
    )
    refs = dynamics.References(theta=prepared.theta.state, eta=prepared.eta.state)

    initials = [
        (f"random-{i}", dynamics.random_positive_pair(prepared.grid, prepared.model.M, rng))
        for i in range(trials)
    ]
    if include_corners:
        delta = 0.01 * prepared.model.M
        bump = Field(prepared.grid, np.full(prepared.grid.n, delta))
        initials.append(("corner-u", StatePair(prepared.theta.state, bump)))
        initials.append(("corner-v", StatePair(bump, prepared.eta.state)))

    runs = []
    for label, start in initials:
        sim = dynamics.simulate(
            start, prepared.dOp, prepared.DOp, prepared.model, config,
            references=refs, profile_tol=sc.profile_tol,
        )
        runs.append(
            RunRecord(
                initial_kind=label,
                outcome_kind=sim.outcome.kind,
                time_to_converge=sim.outcome.time_to_converge,
                terminal_min_u=sim.outcome.terminal.u.min(),
                terminal_min_v=sim.outcome.terminal.v.min(),
            )
        )

    kinds = {r.outcome_kind for r in runs}
    observed = kinds.pop() if len(kinds) == 1 else "mixed"
    agreement = bool(
        prediction.kind != "undecided"
        and all(r.outcome_kind == prediction.kind for r in runs)
    )

    notes = []
    diagnostics = {
        "theta_residual": prepared.theta.residual,
        "eta_residual": prepared.eta.residual,
    }
    if prediction.kind == "coexistence":
        pair = steady.solve_pair(
            prepared.dOp, prepared.DOp, prepared.model, tol=sc.steady_tol
        )
        limit = steady.monotone_iterate_V(
            prepared.DOp, prepared.model, tol=sc.steady_tol
        )
        diagnostics.update(
            {
                "pair_gap": pair.gap,
                "pair_positive": pair.positive,
                "pair_residual": pair.residual,
                "pair": pair,
                "limit_probe_gap": limit.probe_gap,
            }
        )
        uniqueness = bool(pair.positive and pair.gap <= 10.0 * sc.steady_tol)
        diagnostics["uniqueness_witness"] = uniqueness
        if not uniqueness:
            notes.append(
                "two-sided pair bracket did not collapse; possible multiplicity"
            )
    if not agreement:
        notes.append(
            f"observed outcomes disagree with the prediction at d={sc.d:g}; "
            "the classification is only certified for small d; rerun with a "
            "smaller rate or sweep d to locate the empirical threshold"
        )

    return ClassificationReport(
        scenario=sc,
        indicators=prepared.indicators,
        strict_kernel=prepared.strict_kernel,
        predicted=prediction.kind,
        predicted_warnings=prediction.warnings,
        observed=observed,
        runs=tuple(runs),
        agreement=agreement,
        diagnostics=diagnostics,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class SweepCell:
    b: float
    c: float
    d: float
    D: float
    mu0: float = float("nan")
    nu0: float = float("nan")
    predicted: str = ""
    observed: str = ""
    agreement: Optional[bool] = None
    error: str = ""
    warnings: tuple = ()


_SWEEP_FIELDS = {"b": "b", "c": "c", "d": "d", "D": "D"}


def sweep(
    base: Scenario,
    axes: dict,
    verify_trials: Optional[int] = None,
) -> list[SweepCell]:
    """Cartesian product of classifications over parameter axes.

    axes maps a subset of {"b", "c", "d", "D"} to value lists.  Per-cell
    failures are recorded in the row and the sweep continues.
    """
    if not axes:
        raise ValueError("sweep needs at least one nonempty axis")
    for key, values in axes.items():
        if key not in _SWEEP_FIELDS:
            raise ValueError(f"unknown sweep axis {key!r}; choose from {sorted(_SWEEP_FIELDS)}")
        if len(values) == 0:
            raise ValueError(f"axis {key!r} is empty")

    keys = sorted(axes.keys())
    cells = []
    for combo in itertools.product(*(axes[k] for k in keys)):
        overrides = dict(zip(keys, (float(x) for x in combo)))
        scenario = replace(base, **overrides)
        row = dict(b=scenario.b, c=scenario.c, d=scenario.d, D=scenario.D)
        try:
            prepared = prepare(scenario)
            prediction = classify(prepared)
            row.update(
                mu0=prepared.indicators.mu0,
                nu0=prepared.indicators.nu0,
                predicted=prediction.kind,
                warnings=prediction.warnings,
            )
            if verify_trials is not None:
                report = verify(prepared, trials=verify_trials)
                row.update(observed=report.observed, agreement=report.agreement)
        except HypothesisError as exc:
            row.update(error=f"hypothesis: {exc}")
        except Exception as exc:  # per-cell isolation: record, keep sweeping
            row.update(error=f"{type(exc).__name__}: {exc}")
        cells.append(SweepCell(**row))
    return cells
