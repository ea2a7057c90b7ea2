"""Command-line experiment runner.

Subcommands: bond-scan, life-scan, quad-fit, hedge-demo, validate.  Every
run writes a JSON summary (resolved config, seed, scan rows, minimizer,
validation results) and a CSV of (label, mean, std_error); scan-type runs
also render a figure next to the delimited output.  Identical config and
seed produce byte-identical CSV and JSON, whatever the worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import quadform, validation
from .config import ConfigError, RunConfig, load_config
from .engine import RandomPlan, make_time_grid, simulate
from .scans import BondPortfolio, bond_risk_scan, life_risk_scan
from .toyhedge import (
    LognormalAsset,
    TwoAssetParams,
    ZeroRateClaim,
    delta_hedge_risk,
    residual_risk_closed,
    residual_risk_mc,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_OUT_DIR_ENV = "REPLISCAN_OUT_DIR"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repliscan",
        description="Monte-Carlo replication scans for bond and whole-life portfolios.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, doc in (
        ("bond-scan", "scan the single-bond replication risk over maturities"),
        ("life-scan", "scan the model-points risk over candidate ages"),
        ("quad-fit", "assemble and solve the fixed-basis quadratic program"),
        ("hedge-demo", "run the delta-hedging and correlated-assets fixtures"),
        ("validate", "run the martingale, variance-identity, mass and PDE suites"),
    ):
        p = sub.add_parser(name, help=doc)
        p.add_argument("--config", required=True, help="path to an INI config or a JSON summary")
        p.add_argument("--seed", type=int, default=None, help="override [simulation] seed")
        p.add_argument("--paths", type=int, default=None, help="override [simulation] n_paths")
        p.add_argument("--steps", type=int, default=None, help="override [simulation] n_steps")
        p.add_argument("--out-dir", default=None, help=f"output directory (default ${_OUT_DIR_ENV} or '.')")
        p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    return parser


def _out_dir(args) -> Path:
    raw = args.out_dir or os.environ.get(_OUT_DIR_ENV) or "."
    path = Path(raw)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, rows) -> None:
    def fmt(value) -> str:
        return value if isinstance(value, str) else repr(float(value))

    lines = ["label,mean,std_error"]
    lines += [f"{fmt(l)},{fmt(m)},{fmt(s)}" for l, m, s in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, summary: dict) -> None:
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def _summary(config: RunConfig, scan_rows, minimizer, validation_block) -> dict:
    return {
        "config": config.resolved(),
        "seed": config.simulation()[2],
        "scan": [
            {
                "label": l if isinstance(l, str) else float(l),
                "mean": float(m),
                "std_error": float(s),
            }
            for l, m, s in scan_rows
        ],
        "minimizer": minimizer,
        "validation": validation_block,
    }


def _simulate_from(config: RunConfig):
    params = config.model_params()
    n_paths, n_steps, seed = config.simulation()
    sim = simulate(params, make_time_grid(n_steps), RandomPlan(seed=seed, n_paths=n_paths))
    return params, sim


def _run_bond_scan(config: RunConfig, out: Path, workers: int) -> int:
    config.require("model", "simulation", "portfolio", "scan")
    params, sim = _simulate_from(config)
    portfolio = config.bond_portfolio()
    scan = bond_risk_scan(params, portfolio, config.scan_grid(), sim, workers=workers)
    rows = list(zip(scan.labels, scan.means, scan.std_errors))
    minimizer = {"label": scan.minimizer_label, "value": scan.minimizer_value}
    _write_csv(out / config.output_name("csv", "bond-scan"), rows)
    _write_json(out / config.output_name("json", "bond-scan"), _summary(config, rows, minimizer, None))
    from . import report

    report.render_scan_figure(
        scan.labels, scan.means, portfolio.maturities, portfolio.nominals,
        "maturity (years)", str(out / config.output_name("figure", "bond-scan")),
    )
    return EXIT_OK


def _run_life_scan(config: RunConfig, out: Path, workers: int) -> int:
    config.require("model", "simulation", "mortality", "portfolio", "scan")
    params, sim = _simulate_from(config)
    portfolio = config.policy_portfolio()
    gparams = config.gompertz()
    domain = config.age_domain()
    grid = config.scan_grid()
    if grid.min() < domain.x_min or grid.max() > domain.x_max:
        raise ConfigError("[scan] candidate ages fall outside the mortality age domain")
    scan = life_risk_scan(
        params, gparams, portfolio, grid, sim, quad=config.quadrature(), workers=workers
    )
    rows = list(zip(scan.labels, scan.means, scan.std_errors))
    minimizer = {"label": scan.minimizer_label, "value": scan.minimizer_value}
    _write_csv(out / config.output_name("csv", "life-scan"), rows)
    _write_json(out / config.output_name("json", "life-scan"), _summary(config, rows, minimizer, None))
    from . import report

    report.render_scan_figure(
        scan.labels, scan.means, portfolio.ages, portfolio.nominals,
        "age (years)", str(out / config.output_name("figure", "life-scan")), bar_ylabel="count",
    )
    return EXIT_OK


def _run_quad_fit(config: RunConfig, out: Path, workers: int) -> int:
    config.require("model", "simulation", "portfolio")
    params, sim = _simulate_from(config)
    exposure = config.bond_portfolio()
    form = quadform.assemble(params, exposure, config.basis(), sim)
    solution = quadform.solve(form)
    rows = list(zip(form.basis_labels, solution.beta, np.zeros_like(solution.beta)))
    summary = _summary(config, rows, None, None)
    summary["quad"] = {
        "A": form.A.tolist(),
        "B": form.B.tolist(),
        "C": form.C,
        "beta": solution.beta.tolist(),
        "value": solution.value,
        "condition_estimate": solution.condition_estimate,
        "regularized": solution.regularized,
    }
    _write_csv(out / config.output_name("csv", "quad-fit"), rows)
    _write_json(out / config.output_name("json", "quad-fit"), summary)
    from . import report

    report.render_basis_figure(
        form.basis_labels, solution.beta, str(out / config.output_name("figure", "quad-fit"))
    )
    return EXIT_OK


def _run_hedge_demo(config: RunConfig, out: Path, workers: int) -> int:
    config.require("simulation")
    h = config.hedge_section()
    n_paths, n_steps, seed = config.simulation()
    claim = ZeroRateClaim(strike=h["strike"], expiry=h["expiry"], vol=h["vol"])
    asset = LognormalAsset(x0=h["x0"], vol=h["vol"])

    levels = [1]
    while 2 * levels[-1] <= h["rebalance_max"]:
        levels.append(2 * levels[-1])
    ladder_grid = 4 * levels[-1]  # divisible by every ladder level
    ladder = []
    for steps in levels:
        est = delta_hedge_risk(claim, asset, steps, n_paths, n_steps=ladder_grid, seed=seed)
        ladder.append((float(steps), est.mean, est.std_error))

    residuals = {}
    for mode in ("constant-vol", "lognormal"):
        two = TwoAssetParams(
            s1=h["s1"], s2=h["s2"], rho=h["rho"], x10=h["x1_0"], x20=h["x2_0"], mode=mode
        )
        mc = residual_risk_mc(two, n_paths, n_steps, seed=seed)
        closed = residual_risk_closed(two)
        diff = abs(mc.mean - closed)
        z = diff / mc.std_error if mc.std_error > 0.0 else 0.0
        # roundoff allowance covers the zero-variance constant-vol mode
        passed = diff <= 3.0 * mc.std_error + 1e-12 * max(closed, 1.0)
        residuals[mode] = {
            "mc": mc.mean,
            "mc_std_error": mc.std_error,
            "closed": closed,
            "z": z,
            "passed": bool(passed),
        }

    minimizer = None
    summary = _summary(config, ladder, minimizer, {"residual_risk": residuals})
    _write_csv(out / config.output_name("csv", "hedge-demo"), ladder)
    _write_json(out / config.output_name("json", "hedge-demo"), summary)
    from . import report

    arr = np.array(ladder)
    report.render_ladder_figure(arr[:, 0], arr[:, 1], str(out / config.output_name("figure", "hedge-demo")))
    if not all(block["passed"] for block in residuals.values()):
        return EXIT_NUMERIC
    return EXIT_OK


def _run_validate(config: RunConfig, out: Path, workers: int) -> int:
    config.require("model", "simulation", "mortality")
    params, sim = _simulate_from(config)
    checks = {
        "martingale": validation.martingale_suite(params, sim),
        "kappa_mass": validation.kappa_mass_suite(config.gompertz(), config.age_domain()),
        "pde_residual": validation.pde_residual_suite(ZeroRateClaim(strike=1.0)),
    }
    if config.has("portfolio") and config.portfolio_kind() == "bond":
        portfolio = config.bond_portfolio()
    else:
        portfolio = BondPortfolio([(1.0, 2.0), (0.5, 5.0), (1.5, 8.0)])
    checks["variance_identity"] = validation.variance_identity_suite(params, portfolio, sim)

    rows = [
        (name, checks[name]["measured"], checks[name]["threshold"]) for name in sorted(checks)
    ]
    _write_csv(out / config.output_name("csv", "validate"), rows)
    _write_json(out / config.output_name("json", "validate"), _summary(config, rows, None, checks))
    for name in sorted(checks):
        status = "pass" if checks[name]["passed"] else "FAIL"
        print(f"{status}  {name}: measured={checks[name]['measured']:.6g} "
              f"threshold={checks[name]['threshold']:.6g}")
    if not all(c["passed"] for c in checks.values()):
        return EXIT_NUMERIC
    return EXIT_OK


_RUNNERS = {
    "bond-scan": _run_bond_scan,
    "life-scan": _run_life_scan,
    "quad-fit": _run_quad_fit,
    "hedge-demo": _run_hedge_demo,
    "validate": _run_validate,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config).with_overrides(
            seed=args.seed, n_paths=args.paths, n_steps=args.steps
        )
        out = _out_dir(args)
        workers = max(1, args.threads)
        return _RUNNERS[args.subcommand](config, out, workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ZeroDivisionError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
