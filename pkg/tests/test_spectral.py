import numpy as np
import pytest

from nlcompete.grid import Field, build_grid
from nlcompete.kernels import KernelSpec, assemble
from nlcompete.reaction import LotkaVolterraParams, lv_model
from nlcompete.spectral import (
    SpectralConvergenceError,
    cw_bounds,
    indicators,
    small_d_limit_check,
    spectral_bound,
)
from nlcompete.steady import growth_f_at, growth_g_at, solve_single

GAUSS = KernelSpec("gaussian", 0.1)


def random_draw(rng):
    n = int(rng.integers(24, 65))
    g = build_grid(0, 1, n)
    family = rng.choice(["gaussian", "tent", "nonsymmetric-shifted-gaussian"])
    scale = rng.uniform(0.15, 0.5)
    drift = rng.uniform(-0.15, 0.15) if family == "nonsymmetric-shifted-gaussian" else 0.0
    op = assemble(KernelSpec(family, scale, drift), g, rng.choice(["D", "N"]),
                  rng.uniform(0.3, 1.2))
    coef = rng.uniform(-1, 1, 3)
    ph = rng.uniform(0, 2 * np.pi, 2)
    gamma = Field.from_function(
        g,
        lambda x: coef[0] + coef[1] * np.sin(2 * np.pi * x + ph[0])
        + coef[2] * np.cos(4 * np.pi * x + ph[1]),
    )
    return op, gamma


def dense_rightmost(op, gamma):
    A = op.matrix + np.diag(gamma.values)
    return float(np.max(np.linalg.eigvals(A).real))


def test_constant_potential_noflux_symmetric():
    g = build_grid(0, 1, 60)
    op = assemble(GAUSS, g, "N", 0.25)
    res = spectral_bound(op, Field.constant(g, 0.8))
    assert res.lambda1 == pytest.approx(0.8, abs=1e-10)
    assert np.allclose(res.eigenfunction.values, 1.0, atol=1e-9)
    assert res.eigenfunction.min() > 0


def test_spectral_shift_invariance():
    g = build_grid(0, 1, 40)
    op = assemble(GAUSS, g, "D", 0.3)
    gamma = Field.from_function(g, lambda x: np.sin(2 * np.pi * x))
    base = spectral_bound(op, gamma).lambda1
    shifted = spectral_bound(op, Field(g, gamma.values + 0.37)).lambda1
    assert shifted - base == pytest.approx(0.37, abs=1e-9)


def test_lethal_zero_potential_matches_dense():
    g = build_grid(0, 1, 50)
    op = assemble(GAUSS, g, "D", 1.0)
    gamma = Field.constant(g, 0.0)
    res = spectral_bound(op, gamma)
    assert -1.0 < res.lambda1 < 0.0
    assert abs(res.lambda1 - dense_rightmost(op, gamma)) <= 1e-8


def test_oracle_equivalence_20_draws():
    rng = np.random.default_rng(42)
    for _ in range(20):
        op, gamma = random_draw(rng)
        res = spectral_bound(op, gamma, tol=1e-10)
        assert res.method == "power"
        assert abs(res.lambda1 - dense_rightmost(op, gamma)) <= 1e-8
        assert res.cw_upper - res.cw_lower <= 1e-9
        assert res.cw_lower - 1e-12 <= res.lambda1 <= res.cw_upper + 1e-12
        assert res.eigenfunction.min() > 0
        assert res.residual <= 1e-10


def test_cw_bounds_at_eigenfunction_and_constants():
    g = build_grid(0, 1, 40)
    op = assemble(GAUSS, g, "N", 0.2)
    gamma = Field.from_function(g, lambda x: 0.3 + 0.2 * np.cos(2 * np.pi * x))
    res = spectral_bound(op, gamma)
    lo, hi = cw_bounds(op, gamma, res.eigenfunction)
    assert hi - lo <= 10 * max(res.residual, 1e-12)
    # constant potential, symmetric no-flux kernel: ratios are exactly gamma
    lo_c, hi_c = cw_bounds(op, Field.constant(g, 0.6), Field.constant(g, 1.0))
    assert lo_c == pytest.approx(0.6, abs=1e-12)
    assert hi_c == pytest.approx(0.6, abs=1e-12)


def test_cw_bounds_bracket_dense_for_random_positive_phi():
    rng = np.random.default_rng(17)
    for _ in range(5):
        op, gamma = random_draw(rng)
        phi = Field(op.grid, rng.uniform(0.2, 2.0, op.grid.n))
        lo, hi = cw_bounds(op, gamma, phi)
        lam = dense_rightmost(op, gamma)
        assert lo - 1e-10 <= lam <= hi + 1e-10


def test_cw_bounds_rejects_nonpositive_phi():
    g = build_grid(0, 1, 10)
    op = assemble(GAUSS, g, "N", 0.1)
    phi = np.ones(g.n)
    phi[3] = 0.0
    with pytest.raises(ValueError):
        cw_bounds(op, Field.constant(g, 0.0), Field(g, phi))


def test_monotonicity_in_potential():
    rng = np.random.default_rng(23)
    for _ in range(5):
        op, gamma = random_draw(rng)
        bump = Field(op.grid, gamma.values + rng.uniform(0.0, 0.5, op.grid.n))
        lam1 = spectral_bound(op, gamma, fallback="dense", max_iter=5000).lambda1
        lam2 = spectral_bound(op, bump, fallback="dense", max_iter=5000).lambda1
        assert lam2 >= lam1 - 1e-9


def test_nonconvergence_raises_then_dense_fallback_works():
    # two exactly tied potential maxima at a tiny rate: power iteration
    # cannot separate the near-degenerate pair
    g = build_grid(0, 1, 64)
    op = assemble(GAUSS, g, "D", 1e-5)
    gamma = Field.from_function(g, lambda x: np.sin(2 * np.pi * x) + 0.7 * np.cos(4 * np.pi * x))
    with pytest.raises(SpectralConvergenceError):
        spectral_bound(op, gamma, tol=1e-12, max_iter=200)
    res = spectral_bound(op, gamma, tol=1e-12, max_iter=200, fallback="dense")
    assert res.method == "dense"
    assert abs(res.lambda1 - dense_rightmost(op, gamma)) <= 1e-10
    assert res.eigenfunction.min() > 0
    assert res.cw_lower - 1e-10 <= res.lambda1 <= res.cw_upper + 1e-10


def test_small_d_limit_envelope():
    g = build_grid(0, 1, 100)
    gamma = Field.from_function(
        g, lambda x: np.sin(2 * np.pi * x) + 0.7 * np.cos(4 * np.pi * x)
    )
    rows = small_d_limit_check(GAUSS, gamma, [1e-1, 1e-2, 1e-3], mode="D")
    assert all(r.within_bound for r in rows)
    gaps = [r.gap for r in rows]
    assert all(g2 <= g1 + 1e-14 for g1, g2 in zip(gaps, gaps[1:]))


def test_small_d_constant_potential_control():
    g = build_grid(0, 1, 60)
    gamma = Field.constant(g, 0.7)
    rows = small_d_limit_check(GAUSS, gamma, [1e-1, 1e-2], mode="N")
    for r in rows:
        assert r.gap <= 1e-10


def test_small_d_rejects_bad_rate_lists():
    g = build_grid(0, 1, 30)
    gamma = Field.constant(g, 0.5)
    with pytest.raises(ValueError):
        small_d_limit_check(GAUSS, gamma, [1e-2, 1e-1])
    with pytest.raises(ValueError):
        small_d_limit_check(GAUSS, gamma, [1e-1, -1e-2])


def _linearized_growth_rate(matrix, gamma_values, t_final=60.0):
    """Explicit Euler on psi' = (matrix + diag(gamma)) psi from a positive seed.

    Measures the asymptotic per-time log growth after a burn-in that lets
    the non-principal modes die off, and undoes the Euler bias by mapping
    the per-step factor back through log(1 + dt x)/dt.
    """
    B = matrix + np.diag(gamma_values)
    dt = 0.45 / (np.max(np.abs(np.diag(B))) + 1.0)
    psi = np.full(B.shape[0], 1e-3)
    steps = int(t_final / dt)
    log_scale = 0.0
    for k in range(steps):
        psi = psi + dt * (B @ psi)
        peak = np.max(np.abs(psi))
        if k >= steps // 2:
            log_scale += np.log(peak)
        psi = psi / peak
    per_step = log_scale / (steps - steps // 2)
    return float(np.expm1(per_step) / dt)


@pytest.mark.parametrize("b, sign", [(0.5, +1), (1.5, -1)])
def test_sign_of_indicator_predicts_linearized_growth(b, sign):
    # perturbing the u-only state with a small v: growth iff the indicator
    # is positive, decay iff negative
    g = build_grid(0, 1, 60)
    model = lv_model(LotkaVolterraParams(m=1.0, b=b, c=0.5), grid=g,
                     require_weak_competition=False)
    dOp = assemble(GAUSS, g, "N", 0.01)
    DOp = assemble(GAUSS, g, "N", 0.1)
    x = g.nodes
    zeros = np.zeros(g.n)
    theta = solve_single(dOp, growth_f_at(model, x, zeros), model.M).state
    eta = solve_single(DOp, growth_g_at(model, x, zeros), model.M).state
    ind = indicators(dOp, DOp, model, theta, eta)
    assert abs(ind.mu_theta) >= 1e-3
    assert np.sign(ind.mu_theta) == sign
    rate = _linearized_growth_rate(DOp.matrix, model.g(x, theta.values, zeros))
    assert np.sign(rate) == sign
    assert rate == pytest.approx(ind.mu_theta, abs=0.02)


def test_indicators_constant_coefficients():
    # eta = 1 and F_plus(x, 0) = 1, so mu0 = 1 - b and nu0 = 1 - c
    g = build_grid(0, 1, 80)
    dOp = assemble(GAUSS, g, "N", 0.01)
    DOp = assemble(GAUSS, g, "N", 0.1)
    x = g.nodes
    zeros = np.zeros(g.n)
    for b, c in [(0.5, 0.5), (1.5, 0.5), (0.5, 1.5)]:
        model = lv_model(LotkaVolterraParams(m=1.0, b=b, c=c), grid=g,
                         require_weak_competition=False)
        theta = solve_single(dOp, growth_f_at(model, x, zeros), model.M).state
        eta = solve_single(DOp, growth_g_at(model, x, zeros), model.M).state
        ind = indicators(dOp, DOp, model, theta, eta)
        assert ind.mu0 == pytest.approx(1.0 - b, abs=1e-8)
        assert ind.nu0 == pytest.approx(1.0 - c, abs=1e-8)
        assert ind.mu_theta == pytest.approx(1.0 - b, abs=1e-8)
        assert ind.nu_eta == pytest.approx(1.0 - c, abs=1e-8)
