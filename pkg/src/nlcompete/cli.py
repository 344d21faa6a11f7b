"""Command-line interface.

Subcommands: audit, spectral, steady, limit, simulate, classify, verify,
sweep.  Every run writes CSV tables plus a plain-text summary into the
output directory, and (unless --no-plots) renders matplotlib figures next
to them.

Exit codes: 0 = success / agreement on all verified cells, 2 = a
disagreement between prediction and simulation was found, 3 = a standing
hypothesis is violated (audit failure or missing semi-trivial state).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from . import dynamics, steady
from .classify import HypothesisError, classify, prepare, sweep, verify
from .grid import Field, StatePair, build_grid
from .reaction import audit_assumptions
from .report import fmt, write_csv, write_summary
from .spectral import small_d_limit_check

EXIT_OK = 0
EXIT_DISAGREEMENT = 2
EXIT_HYPOTHESIS = 3


def _parse_d_list(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _load_scenario(args):
    scenario = cfg.load_scenario(args.config) if args.config else cfg.default_scenario()
    scenario = cfg.apply_overrides(scenario, args.set or [])
    if args.seed is not None:
        from dataclasses import replace

        scenario = replace(scenario, seed=args.seed)
    return scenario


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _plots_enabled(args) -> bool:
    return not args.no_plots


# ---------------------------------------------------------------------------


def cmd_audit(args) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)
    grid = build_grid(scenario.grid_a, scenario.grid_b, scenario.grid_n)
    model = scenario.model(grid)
    audit = audit_assumptions(model, grid, samples=scenario.audit_samples)
    write_csv(
        out / "audit.csv",
        ["assumption", "margin", "passed", "note"],
        audit.rows(),
    )
    write_summary(
        out / "summary.txt",
        [
            f"assumption audit over {audit.samples}^3 lattice, box bound M = {fmt(audit.M)}",
            *(f"{name}: margin {fmt(margin)} ({'pass' if ok else 'FAIL'})"
              for name, margin, ok, _ in audit.rows()),
            f"all passed: {audit.all_passed}",
        ],
    )
    if _plots_enabled(args):
        from . import plots

        plots.save_audit_margins(out / "audit_margins.png", audit)
    return EXIT_OK if audit.all_passed else EXIT_HYPOTHESIS


def cmd_spectral(args) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)
    grid = build_grid(scenario.grid_a, scenario.grid_b, scenario.grid_n)
    gamma = Field.from_function(
        grid,
        lambda x: args.gamma_base
        + args.gamma_sin * np.sin(2.0 * np.pi * x)
        + args.gamma_cos * np.cos(4.0 * np.pi * x),
    )
    d_list = _parse_d_list(args.d_list)
    rows = small_d_limit_check(
        scenario.kernel_u, gamma, d_list, mode=scenario.mode_u,
        tol=scenario.spectral_tol,
    )
    write_csv(
        out / "spectral.csv",
        ["d", "lambda1", "lower", "upper", "iterations", "gap", "bound_2d",
         "within_bound", "method"],
        [(r.d, r.lambda1, r.lower, r.upper, r.iterations, r.gap, r.bound,
          r.within_bound, r.method) for r in rows],
    )
    write_summary(
        out / "summary.txt",
        [
            f"kernel {scenario.kernel_u.family} scale {fmt(scenario.kernel_u.scale)} "
            f"drift {fmt(scenario.kernel_u.drift)} mode {scenario.mode_u}",
            f"max gamma = {fmt(gamma.max())}",
            *(f"d={fmt(r.d)}  lambda1={fmt(r.lambda1)}  gap={fmt(r.gap)}  "
              f"within 2d: {r.within_bound}  ({r.method})" for r in rows),
        ],
    )
    if _plots_enabled(args):
        from . import plots

        plots.save_spectral_rows(out / "spectral.png", rows, gamma.max())
    return EXIT_OK


def cmd_steady(args) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)
    try:
        prepared = prepare(scenario)
    except HypothesisError as exc:
        write_summary(out / "summary.txt", [f"hypothesis violation: {exc}"])
        return EXIT_HYPOTHESIS
    theta, eta = prepared.theta, prepared.eta
    write_csv(
        out / "steady_profiles.csv",
        ["node", "x", "theta", "eta"],
        [
            (i, x, theta.state.values[i], eta.state.values[i])
            for i, x in enumerate(prepared.grid.nodes)
        ],
    )
    lines = [
        f"theta residual {fmt(theta.residual)} (iterations {theta.iterations})",
        f"eta residual {fmt(eta.residual)} (iterations {eta.iterations})",
    ]
    if args.sandwich:
        cert = steady.theta_sandwich(
            scenario.kernel_u, scenario.mode_u, prepared.grid, prepared.model,
            _parse_d_list(args.sandwich), tol=scenario.steady_tol,
        )
        write_csv(
            out / "theta_sandwich.csv",
            ["d", "gap_lower", "gap_upper", "margin_lower", "margin_upper"],
            zip(cert.d_values, cert.gap_lower, cert.gap_upper,
                cert.lower_margin, cert.upper_margin),
        )
        lines += [
            f"sandwich constants (C_lower, C_upper) = "
            f"({fmt(cert.fitted_constants[0])}, {fmt(cert.fitted_constants[1])})",
            f"sandwich exponents (p_lower, p_upper) = "
            f"({fmt(cert.fitted_exponents[0])}, {fmt(cert.fitted_exponents[1])})",
        ]
        if _plots_enabled(args):
            from . import plots

            plots.save_loglog_decay(
                out / "theta_sandwich.png", cert.d_values,
                {"gap above limit": cert.gap_upper, "gap below limit": cert.gap_lower},
                "single-species state vs its zero-rate limit",
            )
    write_summary(out / "summary.txt", lines)
    if _plots_enabled(args):
        from . import plots

        plots.save_profiles(
            out / "steady_profiles.png", prepared.grid,
            {"theta (u alone)": theta.state.values, "eta (v alone)": eta.state.values},
            "semi-trivial steady states",
        )
    return EXIT_OK


def cmd_limit(args) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)
    grid = build_grid(scenario.grid_a, scenario.grid_b, scenario.grid_n)
    model = scenario.model(grid)
    from .kernels import assemble

    DOp = assemble(scenario.kernel_v, grid, scenario.mode_v, scenario.D)
    limit = steady.monotone_iterate_V(DOp, model, tol=scenario.steady_tol)
    header = ["node", "x"]
    columns = []
    for k, field in enumerate(limit.chain, start=1):
        header.append(f"V{k}")
        columns.append(field.values)
    header += ["V0", "U0", "eta"]
    columns += [limit.V0.values, limit.U0.values, limit.eta.values]
    write_csv(
        out / "limit_chain.csv",
        header,
        [
            (i, x, *(col[i] for col in columns))
            for i, x in enumerate(grid.nodes)
        ],
    )
    lines = [
        f"mu0 = {fmt(limit.mu0)}, nu0 = {fmt(limit.nu0)}",
        f"positive v-state: {limit.positive}"
        + (f" ({limit.note})" if limit.note else ""),
        f"chain length {limit.iterations}, composite residual {fmt(limit.residual)}",
        f"two-sided probe gap {fmt(limit.probe_gap)}",
    ]
    if args.d_list:
        cert = steady.asymptotic_sandwich(
            scenario.kernel_u, scenario.mode_u, scenario.kernel_v, scenario.mode_v,
            grid, model, scenario.D, _parse_d_list(args.d_list),
            tol=scenario.steady_tol,
        )
        write_csv(
            out / "asymptotic.csv",
            ["d", "u_gap_upper", "u_gap_lower", "v_gap_upper", "v_gap_lower",
             "u_vs_nullcline", "u_norm", "v_norm", "vacuous"],
            zip(cert.d_values, cert.u_gap_upper, cert.u_gap_lower,
                cert.v_gap_upper, cert.v_gap_lower, cert.u_vs_nullcline,
                cert.u_norm, cert.v_norm, cert.vacuous),
        )
        lines += [
            f"asymptotic constants: { {k: float(v) for k, v in cert.fitted_constants.items()} }",
            f"asymptotic exponents: { {k: float(v) for k, v in cert.fitted_exponents.items()} }",
        ]
        if _plots_enabled(args):
            from . import plots

            plots.save_loglog_decay(
                out / "asymptotic.png", cert.d_values,
                {"||u - U0||": cert.u_norm, "||v - V0||": cert.v_norm,
                 "||u - F+(x, v)||": cert.u_vs_nullcline},
                "pair deviation from the limit profiles",
            )
    write_summary(out / "summary.txt", lines)
    if _plots_enabled(args):
        from . import plots

        named = {f"V{k}": f.values for k, f in enumerate(limit.chain, start=1)}
        named["V0"] = limit.V0.values
        named["U0"] = limit.U0.values
        plots.save_profiles(
            out / "limit_chain.png", grid, named, "limit-system chain"
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)
    try:
        prepared = prepare(scenario)
    except HypothesisError as exc:
        write_summary(out / "summary.txt", [f"hypothesis violation: {exc}"])
        return EXIT_HYPOTHESIS
    rng = np.random.default_rng(scenario.seed)
    M = prepared.model.M
    if args.initial == "random":
        start = dynamics.random_positive_pair(prepared.grid, M, rng)
    elif args.initial == "corner-u":
        bump = Field.constant(prepared.grid, 0.01 * M)
        start = StatePair(prepared.theta.state, bump)
    else:
        bump = Field.constant(prepared.grid, 0.01 * M)
        start = StatePair(bump, prepared.eta.state)
    config = dynamics.SimConfig(
        dt=prepared.dt, t_max=scenario.t_max,
        convergence_eps=scenario.convergence_eps,
        snapshot_stride=scenario.snapshot_stride,
    )
    sim = dynamics.simulate(
        start, prepared.dOp, prepared.DOp, prepared.model, config,
        references=dynamics.References(prepared.theta.state, prepared.eta.state),
        profile_tol=scenario.profile_tol,
    )
    write_csv(
        out / "timeseries.csv",
        ["t", "max_u", "max_v", "min_u", "min_v", "rhs_norm"],
        sim.rows,
    )
    write_csv(
        out / "terminal.csv",
        ["node", "x", "u", "v"],
        [
            (i, x, sim.outcome.terminal.u.values[i], sim.outcome.terminal.v.values[i])
            for i, x in enumerate(prepared.grid.nodes)
        ],
    )
    write_summary(
        out / "summary.txt",
        [
            f"initial: {args.initial} (seed {scenario.seed})",
            f"outcome: {sim.outcome.kind}",
            f"converged: {sim.converged} at t = {fmt(sim.t_end)} ({sim.steps} steps, dt = {fmt(config.dt)})",
        ],
    )
    if _plots_enabled(args):
        from . import plots

        plots.save_timeseries(out / "timeseries.png", sim.rows,
                              f"outcome: {sim.outcome.kind}")
        plots.save_profiles(
            out / "terminal.png", prepared.grid,
            {"u": sim.outcome.terminal.u.values, "v": sim.outcome.terminal.v.values},
            "terminal profiles",
        )
    return EXIT_OK


def _classification_rows(scenario, prepared, prediction):
    ind = prepared.indicators
    return (
        ["b", "c", "d", "D", "mu_theta", "nu_eta", "mu0", "nu0",
         "strict_kernel", "predicted", "warnings"],
        [(scenario.b, scenario.c, scenario.d, scenario.D,
          ind.mu_theta, ind.nu_eta, ind.mu0, ind.nu0,
          prepared.strict_kernel, prediction.kind, "; ".join(prediction.warnings))],
    )


def cmd_classify(args) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)
    try:
        prepared = prepare(scenario)
    except HypothesisError as exc:
        write_summary(out / "summary.txt", [f"hypothesis violation: {exc}"])
        return EXIT_HYPOTHESIS
    prediction = classify(prepared)
    header, rows = _classification_rows(scenario, prepared, prediction)
    write_csv(out / "classification.csv", header, rows)
    lines = [
        f"mu0 = {fmt(prepared.indicators.mu0)}, nu0 = {fmt(prepared.indicators.nu0)}",
        f"strict kernel on closure: {prepared.strict_kernel}",
        f"predicted: {prediction.kind}"
        + (f" ({prediction.reason})" if prediction.reason else ""),
        *(f"warning: {w}" for w in prediction.warnings),
    ]
    write_summary(out / "summary.txt", lines)
    if _plots_enabled(args):
        from . import plots

        plots.save_profiles(
            out / "semi_trivial.png", prepared.grid,
            {"theta": prepared.theta.state.values, "eta": prepared.eta.state.values},
            f"semi-trivial states (predicted: {prediction.kind})",
        )
    return EXIT_OK


def cmd_verify(args) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)
    try:
        prepared = prepare(scenario)
    except HypothesisError as exc:
        write_summary(out / "summary.txt", [f"hypothesis violation: {exc}"])
        return EXIT_HYPOTHESIS
    report = verify(prepared, trials=args.trials)
    header, rows = _classification_rows(scenario, prepared, classify(prepared))
    header += ["observed", "agreement"]
    rows = [rows[0] + (report.observed, report.agreement)]
    write_csv(out / "report.csv", header, rows)
    write_csv(
        out / "verification.csv",
        ["initial", "outcome", "time_to_converge", "terminal_min_u", "terminal_min_v"],
        [(r.initial_kind, r.outcome_kind, r.time_to_converge,
          r.terminal_min_u, r.terminal_min_v) for r in report.runs],
    )
    lines = [
        f"predicted: {report.predicted}",
        f"observed: {report.observed} over {len(report.runs)} runs",
        f"agreement: {report.agreement}",
        *(f"warning: {w}" for w in report.predicted_warnings),
        *(f"note: {n}" for n in report.notes),
    ]
    for key in ("pair_gap", "limit_probe_gap", "uniqueness_witness"):
        if key in report.diagnostics:
            lines.append(f"{key}: {fmt(report.diagnostics[key])}")
    write_summary(out / "summary.txt", lines)
    if _plots_enabled(args):
        from . import plots

        plots.save_profiles(
            out / "semi_trivial.png", prepared.grid,
            {"theta": prepared.theta.state.values, "eta": prepared.eta.state.values},
            f"predicted {report.predicted} / observed {report.observed}",
        )
    return EXIT_OK if report.agreement else EXIT_DISAGREEMENT


def cmd_sweep(args) -> int:
    scenario = _load_scenario(args)
    out = _out_dir(args)
    axes = {}
    for name in ("b", "c", "d", "D"):
        raw = getattr(args, f"axis_{name}")
        if raw:
            axes[name] = _parse_d_list(raw)
    cells = sweep(scenario, axes, verify_trials=args.verify_trials)
    write_csv(
        out / "sweep.csv",
        ["b", "c", "d", "D", "mu0", "nu0", "predicted", "observed",
         "agreement", "error", "warnings"],
        [(c.b, c.c, c.d, c.D, c.mu0, c.nu0, c.predicted, c.observed,
          "" if c.agreement is None else c.agreement, c.error,
          "; ".join(c.warnings)) for c in cells],
    )
    errors = [c for c in cells if c.error]
    disagreements = [c for c in cells if c.agreement is False]
    lines = [
        f"cells: {len(cells)}, errors: {len(errors)}, disagreements: {len(disagreements)}",
    ]
    if args.verify_trials is not None and "d" in axes and len(axes["d"]) > 1:
        agreeing = [c.d for c in cells if c.agreement]
        lines.append(
            "largest d with full agreement: "
            + (fmt(max(agreeing)) if agreeing else "none")
        )
    write_summary(out / "summary.txt", lines)
    if _plots_enabled(args) and len(axes) >= 2:
        from . import plots

        x_axis, y_axis = sorted(axes.keys())[:2]
        plots.save_phase_map(out / "phase_map.png", cells, x_axis, y_axis)
    if disagreements:
        return EXIT_DISAGREEMENT
    # per-cell hypothesis errors are recorded in-row; only a sweep with no
    # classifiable cell at all is a wholesale hypothesis failure
    if cells and all(c.error.startswith("hypothesis") for c in cells):
        return EXIT_HYPOTHESIS
    return EXIT_OK


# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("-c", "--config", help="scenario config file (INI)")
    sub.add_argument("-o", "--out", default="out", help="output directory")
    sub.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    sub.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                     help="override a single config value")
    sub.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlcompete",
        description="competition with nonlocal dispersal: classify, verify, sweep",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("audit", help="run the assumption audit")
    _add_common(p)
    p.set_defaults(fn=cmd_audit)

    p = subs.add_parser("spectral", help="principal bound along shrinking rates")
    _add_common(p)
    p.add_argument("--d-list", default="1e-1,1e-2,1e-3,1e-4")
    p.add_argument("--gamma-base", type=float, default=0.0)
    p.add_argument("--gamma-sin", type=float, default=1.0,
                   help="coefficient of sin(2 pi x)")
    p.add_argument("--gamma-cos", type=float, default=0.7,
                   help="coefficient of cos(4 pi x)")
    p.set_defaults(fn=cmd_spectral)

    p = subs.add_parser("steady", help="semi-trivial states and sandwich certificate")
    _add_common(p)
    p.add_argument("--sandwich", metavar="D_LIST",
                   help="also certify theta against its limit over these rates")
    p.set_defaults(fn=cmd_steady)

    p = subs.add_parser("limit", help="zero-rate limit system via the monotone chain")
    _add_common(p)
    p.add_argument("--d-list", metavar="D_LIST",
                   help="also certify positive pairs against the limit profiles")
    p.set_defaults(fn=cmd_limit)

    p = subs.add_parser("simulate", help="integrate one trajectory")
    _add_common(p)
    p.add_argument("--initial", choices=("random", "corner-u", "corner-v"),
                   default="random")
    p.set_defaults(fn=cmd_simulate)

    p = subs.add_parser("classify", help="predict the outcome from indicator signs")
    _add_common(p)
    p.set_defaults(fn=cmd_classify)

    p = subs.add_parser("verify", help="classify, then check against simulations")
    _add_common(p)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(fn=cmd_verify)

    p = subs.add_parser("sweep", help="classification over a parameter product")
    _add_common(p)
    p.add_argument("--b", dest="axis_b", metavar="LIST", help="values for b")
    p.add_argument("--c", dest="axis_c", metavar="LIST", help="values for c")
    p.add_argument("--d", dest="axis_d", metavar="LIST", help="values for d")
    p.add_argument("--D", dest="axis_D", metavar="LIST", help="values for D")
    p.add_argument("--verify-trials", type=int, default=None,
                   help="also simulate each cell this many times")
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.fn(args)
    except HypothesisError as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    return code


if __name__ == "__main__":
    sys.exit(main())
