"""Scenario configuration: flat key = value sections, versioned schema.

Every tolerance and seed is explicit in the file so a report can be
reproduced bit for bit from the config alone.  Unknown sections or keys
are rejected rather than silently ignored.
"""

from __future__ import annotations

import configparser
from dataclasses import replace

from .classify import Scenario
from .kernels import KernelSpec

__all__ = ["SCHEMA_VERSION", "default_scenario", "scenario_to_text",
           "scenario_from_text", "load_scenario", "apply_overrides"]

SCHEMA_VERSION = 1

_KERNEL_KEYS = ("family", "scale", "drift", "mode")

_SCHEMA = {
    "scenario": {"schema": int, "seed": int},
    "grid": {"a": float, "b": float, "n": int},
    "kernel_u": {"family": str, "scale": float, "drift": float, "mode": str},
    "kernel_v": {"family": str, "scale": float, "drift": float, "mode": str},
    "model": {"profile": str, "m0": float, "m1": float, "m_freq": float,
              "b": float, "c": float},
    "rates": {"d": float, "D": float},
    "tolerances": {
        "steady_tol": float, "spectral_tol": float, "dead_band": float,
        "convergence_eps": float, "t_max": float, "profile_tol": float,
        "snapshot_stride": int, "audit_samples": int,
    },
}


def default_scenario() -> Scenario:
    return Scenario()


def scenario_to_text(sc: Scenario) -> str:
    """Serialize a scenario to the config format (round-trips losslessly)."""
    lines = [
        "[scenario]",
        f"schema = {SCHEMA_VERSION}",
        f"seed = {sc.seed}",
        "",
        "[grid]",
        f"a = {sc.grid_a!r}",
        f"b = {sc.grid_b!r}",
        f"n = {sc.grid_n}",
        "",
        "[kernel_u]",
        f"family = {sc.kernel_u.family}",
        f"scale = {sc.kernel_u.scale!r}",
        f"drift = {sc.kernel_u.drift!r}",
        f"mode = {sc.mode_u}",
        "",
        "[kernel_v]",
        f"family = {sc.kernel_v.family}",
        f"scale = {sc.kernel_v.scale!r}",
        f"drift = {sc.kernel_v.drift!r}",
        f"mode = {sc.mode_v}",
        "",
        "[model]",
        f"profile = {sc.profile}",
        f"m0 = {sc.m0!r}",
        f"m1 = {sc.m1!r}",
        f"m_freq = {sc.m_freq!r}",
        f"b = {sc.b!r}",
        f"c = {sc.c!r}",
        "",
        "[rates]",
        f"d = {sc.d!r}",
        f"D = {sc.D!r}",
        "",
        "[tolerances]",
        f"steady_tol = {sc.steady_tol!r}",
        f"spectral_tol = {sc.spectral_tol!r}",
        f"dead_band = {sc.dead_band!r}",
        f"convergence_eps = {sc.convergence_eps!r}",
        f"t_max = {sc.t_max!r}",
        f"profile_tol = {sc.profile_tol!r}",
        f"snapshot_stride = {sc.snapshot_stride}",
        f"audit_samples = {sc.audit_samples}",
        "",
    ]
    return "\n".join(lines)


def _new_parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # [rates] holds both d and D; keep key case
    return parser


def _parse_sections(text: str) -> dict:
    parser = _new_parser()
    parser.read_string(text)
    values: dict = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            values[(section, key)] = _SCHEMA[section][key](raw)
    schema = values.get(("scenario", "schema"), SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ValueError(f"unsupported config schema {schema}; this build reads {SCHEMA_VERSION}")
    return values


def scenario_from_text(text: str) -> Scenario:
    values = _parse_sections(text)
    sc = default_scenario()

    def get(section, key, fallback):
        return values.get((section, key), fallback)

    kernel_u = KernelSpec(
        family=get("kernel_u", "family", sc.kernel_u.family),
        scale=get("kernel_u", "scale", sc.kernel_u.scale),
        drift=get("kernel_u", "drift", sc.kernel_u.drift),
    )
    kernel_v = KernelSpec(
        family=get("kernel_v", "family", sc.kernel_v.family),
        scale=get("kernel_v", "scale", sc.kernel_v.scale),
        drift=get("kernel_v", "drift", sc.kernel_v.drift),
    )
    return replace(
        sc,
        seed=get("scenario", "seed", sc.seed),
        grid_a=get("grid", "a", sc.grid_a),
        grid_b=get("grid", "b", sc.grid_b),
        grid_n=get("grid", "n", sc.grid_n),
        kernel_u=kernel_u,
        mode_u=get("kernel_u", "mode", sc.mode_u),
        kernel_v=kernel_v,
        mode_v=get("kernel_v", "mode", sc.mode_v),
        profile=get("model", "profile", sc.profile),
        m0=get("model", "m0", sc.m0),
        m1=get("model", "m1", sc.m1),
        m_freq=get("model", "m_freq", sc.m_freq),
        b=get("model", "b", sc.b),
        c=get("model", "c", sc.c),
        d=get("rates", "d", sc.d),
        D=get("rates", "D", sc.D),
        steady_tol=get("tolerances", "steady_tol", sc.steady_tol),
        spectral_tol=get("tolerances", "spectral_tol", sc.spectral_tol),
        dead_band=get("tolerances", "dead_band", sc.dead_band),
        convergence_eps=get("tolerances", "convergence_eps", sc.convergence_eps),
        t_max=get("tolerances", "t_max", sc.t_max),
        profile_tol=get("tolerances", "profile_tol", sc.profile_tol),
        snapshot_stride=get("tolerances", "snapshot_stride", sc.snapshot_stride),
        audit_samples=get("tolerances", "audit_samples", sc.audit_samples),
    )


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_text(fh.read())


def apply_overrides(scenario: Scenario, overrides) -> Scenario:
    """Apply "section.key=value" strings on top of a scenario."""
    if not overrides:
        return scenario
    text = scenario_to_text(scenario)
    parser = _new_parser()
    parser.read_string(text)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ValueError(f"override must look like section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        section, key = dotted.strip().split(".", 1)
        if not parser.has_section(section):
            raise ValueError(f"unknown config section [{section}]")
        parser.set(section, key.strip(), value.strip())
    out = []
    for section in parser.sections():
        out.append(f"[{section}]")
        out.extend(f"{k} = {v}" for k, v in parser.items(section))
        out.append("")
    return scenario_from_text("\n".join(out))
