import numpy as np
import pytest

from nlcompete.grid import Field, build_grid
from nlcompete.kernels import KernelSpec, assemble
from nlcompete.reaction import LotkaVolterraParams, lv_model
from nlcompete import steady
from nlcompete.steady import (
    check_comparison,
    growth_composite,
    growth_f_at,
    monotone_bracket,
    monotone_iterate_V,
    solve_pair,
    solve_single,
    stationary_residual,
    theta_sandwich,
)

GAUSS = KernelSpec("gaussian", 0.1)
GRID = build_grid(0, 1, 100)


def lv(m=1.0, b=0.5, c=0.5, grid=GRID):
    return lv_model(LotkaVolterraParams(m=m, b=b, c=c), grid=grid,
                    require_weak_competition=False)


def sin_profile(x):
    return 1.0 + 0.5 * np.sin(2 * np.pi * x)


@pytest.mark.parametrize("d", [0.01, 0.1, 0.5])
def test_single_species_constant_resource(d):
    # symmetric no-flux kernel and m = 1: the state is identically one
    model = lv()
    op = assemble(GAUSS, GRID, "N", d)
    res = solve_single(op, growth_f_at(model, GRID.nodes, np.zeros(GRID.n)), model.M)
    assert res.positive
    assert np.max(np.abs(res.state.values - 1.0)) <= 1e-11
    assert res.residual <= 1e-10


def test_single_species_negative_resource_returns_flagged_zero():
    model = lv(m=-0.5)
    op = assemble(GAUSS, GRID, "N", 0.1)
    res = solve_single(op, growth_f_at(model, GRID.nodes, np.zeros(GRID.n)), model.M)
    assert not res.positive
    assert np.all(res.state.values == 0.0)
    assert res.precondition <= 0.0
    assert "nonpositive" in res.note


def test_single_species_bracket_invariants():
    model = lv(m=sin_profile)
    op = assemble(GAUSS, GRID, "D", 0.05)
    res = solve_single(op, growth_f_at(model, GRID.nodes, np.zeros(GRID.n)), model.M)
    assert res.positive
    assert res.residual <= 1e-10
    low, up = res.bracket
    assert low.min() > 0.0  # seeded strictly inside the positive cone
    assert np.all(low.values <= res.state.values + 1e-7)
    assert np.all(res.state.values <= up.values + 1e-7)


def test_theta_sandwich_heterogeneous_lethal():
    model = lv(m=sin_profile)
    cert = theta_sandwich(GAUSS, "D", GRID, model, [1e-1, 1e-2, 1e-3])
    assert all(m >= 0.0 for m in cert.lower_margin)
    assert all(m >= 0.0 for m in cert.upper_margin)
    assert 0.4 <= cert.fitted_exponents[1] <= 1.1
    # strict at every node once the rate is small
    assert cert.gap_upper[-1] < cert.gap_upper[0]


def test_theta_sandwich_constant_control_is_tight():
    cert = theta_sandwich(GAUSS, "N", GRID, lv(), [1e-1, 1e-2, 1e-3])
    assert max(cert.gap_upper) <= 1e-11
    assert max(cert.gap_lower) <= 1e-11


def test_theta_sandwich_rejects_rates_outside_unit_interval():
    with pytest.raises(ValueError):
        theta_sandwich(GAUSS, "N", GRID, lv(), [1e-1, 2.0])


def test_chain_constant_coefficients():
    # closed-form recursion: V_k = (1-b) m (1 + bc + ... + (bc)^(k-1))
    model = lv()
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    limit = monotone_iterate_V(DOp, model, tol=1e-10)
    assert limit.positive
    assert np.max(np.abs(limit.chain[0].values - 0.5)) <= 1e-10
    assert np.max(np.abs(limit.chain[1].values - 0.625)) <= 1e-10
    assert np.max(np.abs(limit.V0.values - 2.0 / 3.0)) <= 1e-8
    assert np.max(np.abs(limit.U0.values - 2.0 / 3.0)) <= 1e-8
    assert limit.residual <= 1e-10
    # componentwise nondecreasing, bounded by eta
    prev = np.zeros(GRID.n)
    for field in limit.chain:
        assert np.all(field.values >= prev - 1e-9)
        assert np.all(field.values <= limit.eta.values + 1e-9)
        prev = field.values
    assert limit.probe_gap <= 1e-9  # ten times the solve tolerance


def test_chain_collapses_to_eta_when_u_vanishes():
    # c = 1.5 kills the u-component of the limit system: V0 = eta, U0 = 0
    model = lv(c=1.5)
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    limit = monotone_iterate_V(DOp, model, tol=1e-10)
    assert limit.positive
    assert limit.nu0 == pytest.approx(-0.5, abs=1e-9)
    assert np.max(np.abs(limit.V0.values - limit.eta.values)) <= 1e-8
    assert np.max(np.abs(limit.U0.values)) == 0.0


def test_chain_flagged_zero_when_mu0_negative():
    model = lv(b=1.5)
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    limit = monotone_iterate_V(DOp, model, tol=1e-10)
    assert not limit.positive
    assert limit.mu0 == pytest.approx(-0.5, abs=1e-9)
    assert np.all(limit.V0.values == 0.0)
    assert limit.chain == []


def test_two_sided_probe_custom_seeds():
    model = lv()
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    limit = monotone_iterate_V(DOp, model, tol=1e-10)
    low, up, gap = monotone_bracket(
        DOp, growth_composite(model, GRID.nodes), limit.chain[0], limit.eta,
        tol=1e-10,
    )
    assert gap <= 1e-8
    assert np.max(np.abs(low.values - 2.0 / 3.0)) <= 1e-7
    assert np.all(low.values <= up.values + 1e-12)


def test_monotone_bracket_rejects_bad_seeds():
    model = lv()
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    comp = growth_composite(model, GRID.nodes)
    too_low = Field.constant(GRID, 0.9)   # above the solution: not a lower solution
    upper = Field.constant(GRID, 2.0)
    with pytest.raises(ValueError):
        monotone_bracket(DOp, comp, too_low, upper)
    with pytest.raises(ValueError):
        monotone_bracket(DOp, comp, Field.constant(GRID, 0.1),
                         Field.constant(GRID, 0.2))  # not an upper solution


def test_comparison_verdicts():
    model = lv()
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    limit = monotone_iterate_V(DOp, model, tol=1e-10)
    V0 = limit.V0
    scaled_down = Field(GRID, 0.9 * V0.values)
    assert check_comparison(DOp, model, scaled_down, V0) == "strictly-below"
    assert check_comparison(DOp, model, V0, V0) == "equal"
    assert check_comparison(DOp, model, limit.chain[0], limit.eta) == "strictly-below"
    # a pair that passes its one-sided residual checks at tol but is
    # (slightly) wrongly ordered must be reported, not silently accepted
    nudged = Field(GRID, V0.values * (1.0 + 2e-8))
    assert check_comparison(DOp, model, nudged, V0, tol=1e-8) == "violation"


def test_comparison_rejects_invalid_inputs():
    model = lv()
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    limit = monotone_iterate_V(DOp, model, tol=1e-10)
    with pytest.raises(ValueError):
        check_comparison(DOp, model, Field(GRID, 1.3 * limit.V0.values), limit.V0)
    with pytest.raises(ValueError):
        check_comparison(DOp, model, limit.V0, Field(GRID, 0.7 * limit.V0.values))


def test_scaled_up_state_is_a_strict_upper_solution():
    model = lv()
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    limit = monotone_iterate_V(DOp, model, tol=1e-10)
    comp = growth_composite(model, GRID.nodes)
    r = stationary_residual(DOp, comp, 1.3 * limit.V0.values)
    assert r.min() < 0.0


def test_pair_constant_coexistence():
    model = lv()
    dOp = assemble(GAUSS, GRID, "N", 0.1)
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    res = solve_pair(dOp, DOp, model, tol=1e-10)
    assert res.positive and res.agree
    assert res.gap <= 1e-8
    assert np.max(np.abs(res.pair.u.values - 2.0 / 3.0)) <= 1e-8
    assert np.max(np.abs(res.pair.v.values - 2.0 / 3.0)) <= 1e-8
    assert res.residual <= 1e-10
    # bracket ordering in the competitive order
    assert np.all(res.upper.u.values >= res.lower.u.values - 1e-9)
    assert np.all(res.upper.v.values <= res.lower.v.values + 1e-9)


def test_pair_exclusion_has_no_positive_pair():
    model = lv(b=1.5)
    dOp = assemble(GAUSS, GRID, "N", 0.01)
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    res = solve_pair(dOp, DOp, model, tol=1e-10)
    assert not res.positive
    assert res.pair is None
    # both corner sequences settle on the u-only state
    assert np.max(res.upper.v.values) == 0.0
    assert np.max(np.abs(res.upper.u.values - res.theta.values)) <= 1e-8
    assert np.max(res.lower.v.values) <= 1e-6


def test_pair_requires_semitrivial_states():
    model = lv(m=-1.0)
    dOp = assemble(GAUSS, GRID, "N", 0.01)
    DOp = assemble(GAUSS, GRID, "N", 0.1)
    with pytest.raises(ValueError):
        solve_pair(dOp, DOp, model)


def test_asymptotic_sandwich_smoke():
    model = lv(m=sin_profile)
    cert = steady.asymptotic_sandwich(
        GAUSS, "N", GAUSS, "N", GRID, model, 0.1, [1e-2, 1e-3], tol=1e-10
    )
    assert not any(cert.vacuous)
    assert cert.v_norm[1] < cert.v_norm[0]
    assert all(np.isfinite(v) for v in cert.u_vs_nullcline)
    assert cert.u_vs_nullcline[1] <= cert.fitted_constants["C_nullcline"] * np.sqrt(1e-3)


def test_asymptotic_sandwich_vacuous_when_no_limit_state():
    model = lv(b=1.5)
    with pytest.raises(ValueError):
        steady.asymptotic_sandwich(
            GAUSS, "N", GAUSS, "N", GRID, model, 0.1, [1e-2]
        )
