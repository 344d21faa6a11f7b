import pytest

from nlcompete import config as cfg
from nlcompete.classify import Scenario
from nlcompete.kernels import KernelSpec


def test_default_roundtrip():
    sc = cfg.default_scenario()
    text = cfg.scenario_to_text(sc)
    assert cfg.scenario_from_text(text) == sc


def test_roundtrip_nontrivial_scenario():
    sc = Scenario(
        grid_n=64,
        kernel_u=KernelSpec("nonsymmetric-shifted-gaussian", 0.12, drift=0.03),
        mode_u="D",
        profile="sinusoidal",
        m1=0.5,
        b=1.5,
        c=0.25,
        d=0.004,
        D=0.2,
        seed=99,
        t_max=500.0,
    )
    assert cfg.scenario_from_text(cfg.scenario_to_text(sc)) == sc


def test_partial_config_uses_defaults():
    sc = cfg.scenario_from_text("[model]\nb = 1.5\n")
    assert sc.b == 1.5
    assert sc.c == cfg.default_scenario().c
    assert sc.grid_n == cfg.default_scenario().grid_n


def test_rates_keep_case():
    sc = cfg.scenario_from_text("[rates]\nd = 0.004\nD = 0.3\n")
    assert sc.d == 0.004
    assert sc.D == 0.3


def test_unknown_section_and_key_rejected():
    with pytest.raises(ValueError, match="section"):
        cfg.scenario_from_text("[mystery]\nx = 1\n")
    with pytest.raises(ValueError, match="unknown key"):
        cfg.scenario_from_text("[model]\nq = 1\n")


def test_schema_version_enforced():
    with pytest.raises(ValueError, match="schema"):
        cfg.scenario_from_text("[scenario]\nschema = 2\n")


def test_overrides():
    sc = cfg.apply_overrides(cfg.default_scenario(), ["rates.d=0.5", "model.b=1.5"])
    assert sc.d == 0.5
    assert sc.b == 1.5
    with pytest.raises(ValueError):
        cfg.apply_overrides(cfg.default_scenario(), ["nodots"])
    with pytest.raises(ValueError):
        cfg.apply_overrides(cfg.default_scenario(), ["nope.d=1"])


def test_load_scenario_from_file(tmp_path):
    path = tmp_path / "scenario.ini"
    path.write_text(cfg.scenario_to_text(Scenario(seed=7, b=0.8)), encoding="utf-8")
    assert cfg.load_scenario(path) == Scenario(seed=7, b=0.8)
