import numpy as np
import pytest

from nlcompete.grid import build_grid
from nlcompete.reaction import (
    LotkaVolterraParams,
    NonBracketingError,
    ReactionModel,
    F_plus,
    audit_assumptions,
    composite_decrement,
    g_composite,
    lv_model,
    solve_F,
)

GRID = build_grid(0, 1, 50)


def lv(m=1.0, b=0.5, c=0.5, **kw):
    return lv_model(LotkaVolterraParams(m=m, b=b, c=c), grid=GRID, **kw)


def cubic_model(m=1.0, b=0.5, c=0.5, eps=0.1):
    """A non-affine audited model: LV plus odd cubic self-limitation."""
    return ReactionModel(
        f=lambda x, u, v: m - u - c * v - eps * u**3,
        g=lambda x, u, v: m - b * u - v - eps * v**3,
        f_u=lambda x, u, v: -1.0 - 3 * eps * u**2 + 0.0 * (x + v),
        f_v=lambda x, u, v: -c * np.ones(np.broadcast(x, u, v).shape),
        g_u=lambda x, u, v: -b * np.ones(np.broadcast(x, u, v).shape),
        g_v=lambda x, u, v: -1.0 - 3 * eps * v**2 + 0.0 * (x + u),
        M=m + 1.0,
        label="cubic",
    )


def test_lv_coexistence_root():
    # hand oracle: u + 0.5 v = 1, 0.5 u + v = 1 has solution (2/3, 2/3)
    model = lv()
    assert model.f(0.3, 2.0 / 3.0, 2.0 / 3.0) == pytest.approx(0.0, abs=1e-15)
    assert model.g(0.3, 2.0 / 3.0, 2.0 / 3.0) == pytest.approx(0.0, abs=1e-15)


def test_lv_partials_are_affine_constants():
    model = lv(b=0.7, c=0.3)
    x = GRID.nodes
    u = np.linspace(0, 2, GRID.n)
    v = np.linspace(2, 0, GRID.n)
    assert np.all(model.f_u(x, u, v) == -1.0)
    assert np.all(model.g_v(x, u, v) == -1.0)
    assert np.all(model.f_v(x, u, v) == -0.3)
    assert np.all(model.g_u(x, u, v) == -0.7)


def test_lv_weak_competition_gate():
    with pytest.raises(ValueError):
        lv(b=2.0, c=2.0)
    model = lv(b=2.0, c=2.0, require_weak_competition=False)
    assert model.M == 2.0
    with pytest.raises(ValueError):
        lv(b=-1.0, c=0.5)


def test_solve_F_affine_fast_path():
    model = lv(c=0.5)
    assert solve_F(model, 0.2, 0.0) == pytest.approx(1.0)
    x = GRID.nodes
    v = np.full(GRID.n, 0.8)
    assert np.allclose(solve_F(model, x, v), 1.0 - 0.5 * 0.8)


def test_solve_F_bisection_defining_property():
    model = cubic_model()
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 1, 200)
    v = rng.uniform(0, model.M, 200)
    root = solve_F(model, x, v)
    assert np.max(np.abs(model.f(x, root, v))) <= 1e-10


def test_solve_F_non_bracketing():
    # f stays negative on [-M, M]: no root to find
    flat = ReactionModel(
        f=lambda x, u, v: -1.0 - u / 4.0,
        g=lambda x, u, v: -1.0 - v / 4.0,
        f_u=lambda x, u, v: np.full(np.broadcast(x, u, v).shape, -0.25),
        f_v=lambda x, u, v: np.zeros(np.broadcast(x, u, v).shape),
        g_u=lambda x, u, v: np.zeros(np.broadcast(x, u, v).shape),
        g_v=lambda x, u, v: np.full(np.broadcast(x, u, v).shape, -0.25),
        M=2.0,
    )
    with pytest.raises(NonBracketingError):
        solve_F(flat, 0.5, 0.0)


def test_F_plus_clamps():
    model = lv(m=0.2, c=0.5)
    assert solve_F(model, 0.1, 1.0) == pytest.approx(-0.3)
    assert F_plus(model, 0.1, 1.0) == 0.0
    assert F_plus(lv(m=1.0), 0.1, 0.0) == pytest.approx(1.0)


def test_implicit_derivative_identity():
    # central difference of F in v matches -f_v/f_u at the root
    model = cubic_model()
    rng = np.random.default_rng(9)
    x = rng.uniform(0, 1, 100)
    v = rng.uniform(0.05, model.M - 0.1, 100)
    h = 1e-6
    fd = (solve_F(model, x, v + h) - solve_F(model, x, v - h)) / (2 * h)
    root = solve_F(model, x, v)
    exact = -model.f_v(x, root, v) / model.f_u(x, root, v)
    assert np.max(np.abs(fd - exact) / np.abs(exact)) <= 1e-6


def test_F_plus_nonincreasing_in_v():
    model = cubic_model()
    vs = np.linspace(0, 2.5, 200)
    for x in (0.0, 0.37, 1.0):
        vals = F_plus(model, np.full_like(vs, x), vs)
        assert np.all(np.diff(vals) <= 1e-12)


def test_F_plus_continuity_across_clamp():
    model = lv(m=0.5, c=0.5)
    vs = np.linspace(0.9, 1.1, 401)  # F crosses zero at v = 1
    vals = F_plus(model, np.full_like(vs, 0.5), vs)
    assert np.max(np.abs(np.diff(vals))) <= 0.5 * (vs[1] - vs[0]) + 1e-12


def test_audit_passes_weak_competition():
    report = audit_assumptions(lv(), GRID)
    assert report.all_passed
    assert report.margins["A5"] == pytest.approx(0.75)
    assert report.margins["A2"] == pytest.approx(1.0)


def test_audit_flags_strong_competition():
    report = audit_assumptions(lv(b=2.0, c=2.0, require_weak_competition=False), GRID)
    assert not report.passed["A5"]
    assert report.margins["A5"] == pytest.approx(-3.0)
    assert not report.all_passed


def test_audit_box_bound():
    # f(x, M, v) = 1 - 2 - c v <= -1 at M = 2
    report = audit_assumptions(lv(m=1.0), GRID)
    assert report.passed["A4"]
    assert report.margins["A4"] == pytest.approx(1.0)


def test_g_composite_values():
    model = lv()
    assert g_composite(model, 0.5, 0.0) == pytest.approx(0.5)
    # coexistence oracle: g(x, 2/3, 2/3) = 0
    assert g_composite(model, 0.5, 2.0 / 3.0) == pytest.approx(0.0, abs=1e-14)


def test_composite_decrement_positive():
    for model in (lv(), lv(b=0.8, c=0.9), cubic_model()):
        sigma1 = composite_decrement(model, GRID)
        assert sigma1 > 0.0
    # LV slope of g(F+(v), v) in v is bc - 1 on the unclamped region
    assert composite_decrement(lv(), GRID, v_max=1.0) == pytest.approx(0.75, rel=1e-6)
