"""Run configuration: flat sectioned key-value files, with JSON round-trip.

The native format is INI-style sections of key = value pairs; the JSON
summary written by every run embeds the fully resolved configuration, and
that JSON can be fed back as a config file to reproduce the run.  Unknown
sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .curve import G2ppParams
from .mortality import AgeDomain, GompertzParams, QuadratureSpec
from .scans import BondPortfolio, PolicyPortfolio


class ConfigError(Exception):
    """Invalid or incomplete run configuration."""


# (section, key) -> value kind; "floats" is a comma-separated list
_SCHEMA = {
    "model": {
        "a1": "float", "a2": "float", "sigma1": "float", "sigma2": "float",
        "rho": "float", "chi1_0": "float", "chi2_0": "float",
        "phi1": "float", "phi2": "float",
    },
    "simulation": {"n_paths": "int", "n_steps": "int", "seed": "int"},
    "portfolio": {"kind": "str", "labels": "floats", "nominals": "floats", "basis": "floats"},
    "scan": {"start": "float", "stop": "float", "step": "float"},
    "mortality": {"a": "float", "b": "float", "x_min": "float", "x_max": "float"},
    "quadrature": {"dt": "float", "tail_eps": "float"},
    "hedge": {
        "strike": "float", "expiry": "float", "vol": "float", "x0": "float",
        "s1": "float", "s2": "float", "rho": "float", "x1_0": "float", "x2_0": "float",
        "rebalance_max": "int",
    },
    "output": {"csv": "str", "json": "str", "figure": "str"},
}

_DEFAULTS = {
    "model": {"chi1_0": 0.0, "chi2_0": 0.0, "phi1": 0.0, "phi2": 0.0},
    "quadrature": {"dt": 0.25, "tail_eps": 1e-8},
    "hedge": {
        "strike": 1.0, "expiry": 2.0, "vol": 0.2, "x0": 1.0,
        "s1": 0.2, "s2": 0.3, "rho": 0.5, "x1_0": 1.0, "x2_0": 1.0,
        "rebalance_max": 64,
    },
}


def _coerce(section: str, key: str, raw) -> object:
    kind = _SCHEMA[section][key]
    try:
        if kind == "int":
            if isinstance(raw, float) and raw != int(raw):
                raise ValueError(raw)
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return str(raw)
        if kind == "floats":
            if isinstance(raw, (list, tuple)):
                return [float(v) for v in raw]
            return [float(v) for v in str(raw).split(",") if v.strip()]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind}") from exc
    raise AssertionError(kind)


@dataclass
class RunConfig:
    """Validated configuration sections for one run."""

    sections: dict

    def require(self, *names: str) -> None:
        missing = [n for n in names if n not in self.sections]
        if missing:
            raise ConfigError(f"missing required section(s): {', '.join(missing)}")

    def has(self, name: str) -> bool:
        return name in self.sections

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)

    # ---- typed views -----------------------------------------------------

    def model_params(self) -> G2ppParams:
        m = self._section("model", required=("a1", "a2", "sigma1", "sigma2", "rho"))
        try:
            return G2ppParams(
                a1=m["a1"], a2=m["a2"], s1=m["sigma1"], s2=m["sigma2"], rho=m["rho"],
                chi10=m["chi1_0"], chi20=m["chi2_0"], phi1=m["phi1"], phi2=m["phi2"],
            )
        except ValueError as exc:
            raise ConfigError(f"[model] {exc}") from exc

    def simulation(self) -> tuple[int, int, int]:
        s = self._section("simulation", required=("n_paths", "n_steps", "seed"))
        if s["n_paths"] < 1 or s["n_steps"] < 1:
            raise ConfigError("[simulation] n_paths and n_steps must be >= 1")
        return s["n_paths"], s["n_steps"], s["seed"]

    def portfolio_kind(self) -> str:
        kind = self.get("portfolio", "kind")
        if kind not in ("bond", "policy"):
            raise ConfigError("[portfolio] kind must be 'bond' or 'policy'")
        return kind

    def _portfolio_pairs(self) -> list[tuple[float, float]]:
        p = self._section("portfolio", required=("kind", "labels", "nominals"))
        if len(p["labels"]) != len(p["nominals"]):
            raise ConfigError("[portfolio] labels and nominals differ in length")
        return list(zip(p["nominals"], p["labels"]))

    def bond_portfolio(self) -> BondPortfolio:
        if self.portfolio_kind() != "bond":
            raise ConfigError("[portfolio] kind must be 'bond' for this command")
        try:
            return BondPortfolio(self._portfolio_pairs())
        except ValueError as exc:
            raise ConfigError(f"[portfolio] {exc}") from exc

    def policy_portfolio(self) -> PolicyPortfolio:
        if self.portfolio_kind() != "policy":
            raise ConfigError("[portfolio] kind must be 'policy' for this command")
        try:
            port = PolicyPortfolio(self._portfolio_pairs())
        except ValueError as exc:
            raise ConfigError(f"[portfolio] {exc}") from exc
        dom = self.age_domain()
        if np.any(port.ages < dom.x_min) or np.any(port.ages > dom.x_max):
            raise ConfigError("[portfolio] ages fall outside the mortality age domain")
        return port

    def basis(self) -> list[float]:
        basis = self.get("portfolio", "basis")
        if not basis:
            raise ConfigError("[portfolio] basis maturities are required for quad-fit")
        return basis

    def scan_grid(self) -> np.ndarray:
        s = self._section("scan", required=("start", "stop", "step"))
        if s["step"] <= 0.0 or s["stop"] < s["start"]:
            raise ConfigError("[scan] need step > 0 and stop >= start")
        n = int(round((s["stop"] - s["start"]) / s["step"]))
        return np.round(s["start"] + s["step"] * np.arange(n + 1), 12)

    def gompertz(self) -> GompertzParams:
        m = self._section("mortality", required=("a", "b"))
        try:
            return GompertzParams(a=m["a"], b=m["b"])
        except ValueError as exc:
            raise ConfigError(f"[mortality] {exc}") from exc

    def age_domain(self) -> AgeDomain:
        m = self._section("mortality", required=("a", "b", "x_min", "x_max"))
        try:
            return AgeDomain(x_min=m["x_min"], x_max=m["x_max"])
        except ValueError as exc:
            raise ConfigError(f"[mortality] {exc}") from exc

    def quadrature(self) -> QuadratureSpec:
        q = self._section("quadrature", required=())
        try:
            return QuadratureSpec(dt=q["dt"], tail_eps=q["tail_eps"])
        except ValueError as exc:
            raise ConfigError(f"[quadrature] {exc}") from exc

    def output_name(self, kind: str, subcommand: str) -> str:
        ext = {"csv": ".csv", "json": ".json", "figure": ".png"}[kind]
        return self.get("output", kind) or subcommand.replace("-", "_") + ext

    def _section(self, name: str, required: tuple) -> dict:
        if name not in self.sections and name in _DEFAULTS and not required:
            return dict(_DEFAULTS[name])
        if name not in self.sections:
            raise ConfigError(f"missing required section [{name}]")
        out = dict(_DEFAULTS.get(name, {}))
        out.update(self.sections[name])
        missing = [k for k in required if k not in out]
        if missing:
            raise ConfigError(f"[{name}] missing key(s): {', '.join(missing)}")
        return out

    def hedge_section(self) -> dict:
        return self._section("hedge", required=())

    # ---- resolution ------------------------------------------------------

    def with_overrides(self, seed=None, n_paths=None, n_steps=None) -> "RunConfig":
        sections = {k: dict(v) for k, v in self.sections.items()}
        sim = sections.setdefault("simulation", {})
        if seed is not None:
            sim["seed"] = int(seed)
        if n_paths is not None:
            sim["n_paths"] = int(n_paths)
        if n_steps is not None:
            sim["n_steps"] = int(n_steps)
        return RunConfig(sections)

    def resolved(self) -> dict:
        """Effective configuration with defaults materialized, for the JSON summary."""
        out = {}
        for name, body in self.sections.items():
            merged = dict(_DEFAULTS.get(name, {}))
            merged.update(body)
            out[name] = merged
        for name in ("quadrature",):
            if name not in out:
                out[name] = dict(_DEFAULTS[name])
        return out


def _validate_tree(tree: dict) -> dict:
    sections = {}
    for name, body in tree.items():
        if name not in _SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        if not isinstance(body, dict):
            raise ConfigError(f"section [{name}] must hold key = value pairs")
        parsed = {}
        for key, raw in body.items():
            if key not in _SCHEMA[name]:
                raise ConfigError(f"unknown key '{key}' in section [{name}]")
            parsed[key] = _coerce(name, key, raw)
        sections[name] = parsed
    return sections


def load_config(path: str | Path) -> RunConfig:
    """Load an INI-style config file, or a JSON summary's resolved config."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    if text.lstrip().startswith("{"):
        try:
            tree = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
        if "config" in tree and isinstance(tree["config"], dict):
            tree = tree["config"]  # accept a whole run summary
        return RunConfig(_validate_tree(tree))
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    tree = {name: dict(parser.items(name)) for name in parser.sections()}
    return RunConfig(_validate_tree(tree))
