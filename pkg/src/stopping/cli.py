"""Command-line front end.

Every subcommand takes the common flags ``--out --format --seed --n-paths
--dt --config``.  ``--format json`` output carries a ``config`` record that
can be fed back through ``--config`` to reproduce the run; values in a config
file override flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import analytic_rbm as ar
from . import diffusion_drawdown as dd
from . import laplace_inversion as li
from . import levy_scale as ls

SCHEMA_VERSION = 1
COMMON = ("out", "format", "seed", "n_paths", "dt", "workers")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for verification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class Param:
    name: str
    type: Callable
    default: Any
    help: str = ""
    choices: tuple | None = None
    multi: bool = False


def _floats(*names_defaults):
    return [Param(n, float, d) for n, d in names_defaults]


MODEL_PARAMS = [
    Param("model", str, "bm-drift", "Levy model", ("bm-drift", "cpp-exp", "caballero")),
    *_floats(("mu", 1.0), ("sigma", 1.0), ("c", 2.0), ("lam", 1.0), ("jump_mu", 1.0), ("beta", 1.5)),
]
DIFFUSION_PARAMS = [
    Param("model", str, "constant-gamma", "diffusion", ("constant-gamma", "bm-drift", "linear-phi")),
    *_floats(("gamma", 1.0), ("mu", 1.0), ("sigma", 1.0)),
]
RBM_PARAMS = _floats(("mu", 0.0), ("sigma", 1.0), ("x", 0.0), ("delta", 1.0))

PARAMS: dict[str, list[Param]] = {
    "rbm-lt": RBM_PARAMS + [Param("theta", float, [1.0], "transform argument(s)", multi=True)],
    "rbm-density": RBM_PARAMS + [
        *_floats(("t_min", 0.05), ("t_max", 5.0)),
        Param("n_t", int, 100),
        Param("method", str, "talbot", choices=("talbot", "gaver_stehfest")),
        Param("order", int, None, "inversion order (default: method specific)"),
    ],
    "rbm-mc": RBM_PARAMS + [
        Param("scheme", str, "reflect_abs", choices=("reflect_abs", "xi_sign")),
        Param("t_max", float, 1e3, "censoring horizon"),
        Param("bridge", str, "on", "Brownian-bridge barrier correction", ("on", "off")),
        Param("theta", float, [0.5, 1.0, 2.0], "summary transform argument(s)", multi=True),
    ],
    "lehoczky-curve": DIFFUSION_PARAMS + [*_floats(("delta", 1.0), ("xi_max", 5.0)), Param("n_xi", int, 51)],
    "lehoczky-rate": DIFFUSION_PARAMS + [*_floats(("delta", 1.0)), Param("xi", float, [0.0], multi=True)],
    "dde-solve": [
        Param("initial", str, "linear", "initial data on [-delta, 0]", ("linear", "exponential")),
        *_floats(("beta", 1.0), ("lam", 1.0), ("delta", 1.0), ("xi_max", 5.0)),
        Param("n_xi", int, 51),
    ],
    "levy-rate": MODEL_PARAMS + [Param("delta", float, [1.0], multi=True)],
    "levy-exit": MODEL_PARAMS + _floats(("x", 1.0), ("y", 1.0)),
    "levy-mc": [
        Param("model", str, "cpp-exp", "only the compound Poisson model is simulated", ("cpp-exp",)),
        *_floats(("c", 2.0), ("lam", 1.0), ("jump_mu", 1.0)),
        Param("experiment", str, "drawdown", choices=("drawdown", "exit")),
        *_floats(("delta", 1.0), ("x", 1.0), ("y", 1.0), ("t_max", 1e3)),
    ],
    "verify": [Param("suite", str, "analytic", choices=("analytic", "mc", "all"))],
}
RANDOMIZED = {"rbm-mc", "levy-mc"}


# ---------------------------------------------------------------- outputs


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    meta: dict


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render(table: Table, fmt: str, config: dict) -> str:
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": config,
            "meta": table.meta,
            "columns": table.columns,
            "rows": table.rows,
        }
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    buf = io.StringIO()
    for k, v in table.meta.items():
        if isinstance(v, (dict, list)):
            v = json.dumps(_jsonable(v), separators=(",", ":"))
        buf.write(f"# {k}={_num(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------- commands


def _rbm(p) -> ar.RbmParams:
    return ar.RbmParams(p["mu"], p["sigma"], p["x"], p["delta"])


def _levy(p):
    if p["model"] == "bm-drift":
        return ls.BmDrift(p["mu"], p["sigma"])
    if p["model"] == "cpp-exp":
        return ls.CppExp(p["c"], p["lam"], p["jump_mu"])
    return ls.CaballeroChaumont(p["beta"])


def _diffusion(p) -> dd.DiffusionSpec:
    if p["model"] == "constant-gamma":
        return dd.constant_gamma(p["gamma"])
    if p["model"] == "bm-drift":
        return dd.brownian_drift(p["mu"], p["sigma"])
    return dd.linear_phi_example()


def _sim_config(p, scheme, t_max=1e3, bridge=True):
    from .montecarlo import SimulationConfig

    if p["n_paths"] is None:
        raise ValueError("--n-paths is required")
    return SimulationConfig(n_paths=p["n_paths"], seed=p["seed"], dt=p["dt"] if p["dt"] is not None else 1e-3,
                            t_max=t_max, scheme=scheme, bridge=bridge, n_workers=p["workers"])


def cmd_rbm_lt(p):
    rp = _rbm(p)
    return Table(["theta", "laplace_transform"], [[th, ar.rbm_lt(rp, th)] for th in p["theta"]], {})


def cmd_rbm_density(p):
    rp = _rbm(p)
    if not 0 < p["t_min"] < p["t_max"]:
        raise ValueError("need 0 < t_min < t_max")
    if p["n_t"] < 2:
        raise ValueError("n_t must be >= 2")
    grid = np.linspace(p["t_min"], p["t_max"], p["n_t"])
    cfg = li.InversionConfig(p["method"], p["order"], tuple(grid))
    f = li.LtFunction(lambda th: ar.rbm_lt_complex(rp, th), "first passage of reflected BM")
    dens = li.invert_density(f, cfg)
    cdf = li.invert_cdf(f, cfg)
    rows = [[t, d, c] for (t, d), (_, c) in zip(dens, cdf)]
    return Table(["t", "density", "cdf"], rows, {"method": p["method"], "order": cfg.resolved_order})


def cmd_rbm_mc(p):
    from .montecarlo import empirical_lt, simulate_rbm_first_passage

    rp = _rbm(p)
    cfg = _sim_config(p, p["scheme"], p["t_max"], p["bridge"] == "on")
    s = simulate_rbm_first_passage(rp, cfg)
    summary = []
    for th in p["theta"]:
        est = empirical_lt(s, th)
        summary.append({"theta": th, "estimate": est.estimate, "std_error": est.std_error,
                        "analytic": ar.rbm_lt(rp, th)})
    meta = {"kind": s.kind, "n_paths": s.n, "n_censored": s.n_censored, "seed": cfg.seed, "dt": cfg.dt,
            "scheme": cfg.scheme, "bridge": cfg.bridge, "t_max": cfg.t_max, "summary": summary}
    return Table(["first_passage_time", "censored"], [[v, c] for v, c in zip(s.values, s.censored)], meta)


def cmd_lehoczky_curve(p):
    phi = dd.PhiFunction.from_gamma(_diffusion(p))
    if p["n_xi"] < 2 or not p["xi_max"] > 0:
        raise ValueError("need n_xi >= 2 and xi_max > 0")
    grid = np.linspace(0.0, p["xi_max"], p["n_xi"])
    curve = dd.drawdown_survival(phi, p["delta"], grid)
    diag = dd.exponentiality_diagnostic(curve)
    rows = [[x, l, math.exp(l), dd.hazard(phi, p["delta"], x)] for x, l in zip(grid, curve.log_survival)]
    meta = {"lambda_hat": diag.lambda_hat, "max_abs_residual": diag.max_abs_residual,
            "is_exponential": diag.is_exponential()}
    return Table(["xi", "log_survival", "survival", "hazard"], rows, meta)


def cmd_lehoczky_rate(p):
    spec = _diffusion(p)
    phi = dd.PhiFunction.from_gamma(spec)
    rows = [[x, dd.hazard(phi, p["delta"], x)] for x in p["xi"]]
    meta = {}
    if p["model"] != "linear-phi":
        g = spec.gamma(0.0)
        meta["constant_gamma_rate"] = 2 * g / math.expm1(2 * g * p["delta"])
    return Table(["xi", "hazard"], rows, meta)


def cmd_dde_solve(p):
    if p["initial"] == "linear":
        init = dd.PhiFunction.linear()
    else:
        init = dd.PhiFunction.exponential(-p["beta"] / 2)  # Phi = exp(beta xi)
    sol = dd.dde_solve(init, p["lam"], p["delta"], p["xi_max"])
    if p["n_xi"] < 2:
        raise ValueError("n_xi must be >= 2")
    rows = []
    for x in np.linspace(0.0, p["xi_max"], p["n_xi"]):
        rows.append([x, sol(x), sol.eval.derivative(x)])
    return Table(["xi", "phi", "phi_prime"], rows, {})


def cmd_levy_rate(p):
    m = _levy(p)
    cols = ["delta", "rate", "mean_max", "w", "w_prime"]
    if isinstance(m, ls.CppExp):
        cols.append("printed_rate")
    rows = []
    for d in p["delta"]:
        r = [d, ls.drawdown_rate(m, d), ls.mean_max_before_drawdown(m, d), ls.scale_w(m, d), ls.scale_w_prime(m, d)]
        if isinstance(m, ls.CppExp):
            r.append(ls.cpp_printed_rate(m, d))
        rows.append(r)
    return Table(cols, rows, {})


def cmd_levy_exit(p):
    m = _levy(p)
    return Table(["x", "y", "exit_up_probability"], [[p["x"], p["y"], ls.two_sided_exit(m, p["x"], p["y"])]], {})


def cmd_levy_mc(p):
    from .montecarlo import ks_exponential_test, simulate_cpp_drawdown, simulate_cpp_exit

    m = _levy(p)
    if p["dt"] is not None:
        raise ValueError("--dt does not apply: the compound Poisson paths are simulated exactly")
    cfg = _sim_config(dict(p, dt=None), "event_driven", p["t_max"])
    base = {"seed": cfg.seed, "n_paths": cfg.n_paths, "scheme": cfg.scheme, "t_max": cfg.t_max}
    if p["experiment"] == "exit":
        s = simulate_cpp_exit(m, p["x"], p["y"], cfg)
        meta = dict(base, kind="exit_up", frequency=s.frequency, std_error=s.std_error,
                    analytic=ls.two_sided_exit(m, p["x"], p["y"]), n_censored=int(s.censored.sum()))
        return Table(["exited_up", "censored"], [[u, c] for u, c in zip(s.exited_up, s.censored)], meta)
    s = simulate_cpp_drawdown(m, p["delta"], cfg)
    rate = ls.drawdown_rate(m, p["delta"])
    printed = ls.cpp_printed_rate(m, p["delta"])
    meta = dict(base, kind=s.kind, n_censored=s.n_censored, w_rate=rate, printed_rate=printed)
    if s.n >= 35 and s.n_censored == 0:
        meta["ks_p_value_w_rate"] = ks_exponential_test(s, rate).p_value
        meta["ks_p_value_printed_rate"] = ks_exponential_test(s, printed).p_value
    return Table(["drawdown_max", "censored"], [[v, c] for v, c in zip(s.values, s.censored)], meta)


def cmd_verify(p):
    from .verification import run_suite

    checks = run_suite(p["suite"], n_workers=p["workers"], echo=lambda line: print(line, file=sys.stderr))
    rows = [[c.number, c.name, "" if c.passed is None else c.passed, c.detail] for c in checks]
    table = Table(["criterion", "name", "passed", "detail"], rows, {"suite": p["suite"]})
    table.failed = any(c.passed is False for c in checks)
    return table


COMMANDS: dict[str, Callable[[dict], Table]] = {
    "rbm-lt": cmd_rbm_lt,
    "rbm-density": cmd_rbm_density,
    "rbm-mc": cmd_rbm_mc,
    "lehoczky-curve": cmd_lehoczky_curve,
    "lehoczky-rate": cmd_lehoczky_rate,
    "dde-solve": cmd_dde_solve,
    "levy-rate": cmd_levy_rate,
    "levy-exit": cmd_levy_exit,
    "levy-mc": cmd_levy_mc,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------- parsing


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", metavar="PATH", help="write results here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--seed", type=int, metavar="N", help="RNG seed, required for Monte Carlo commands")
    common.add_argument("--n-paths", type=int, metavar="N")
    common.add_argument("--dt", type=float, metavar="X", help="time step of grid schemes")
    common.add_argument("--workers", type=int, metavar="N", help="threads; never changes results")
    common.add_argument("--config", metavar="FILE", help="JSON config; its values override flags")

    parser = _Parser(prog="stopping", description="Drawdown and first-passage laws: evaluators and simulators.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, params in PARAMS.items():
        sp = sub.add_parser(name, parents=[common], help=(COMMANDS[name].__doc__ or name.replace("-", " ")))
        for prm in params:
            sp.add_argument("--" + prm.name.replace("_", "-"), type=prm.type, choices=prm.choices,
                            nargs="+" if prm.multi else None, help=prm.help or None)
    return parser


def _load_config(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    if isinstance(doc, dict) and "config" in doc and "command" not in doc:
        doc = doc["config"]  # a --format json result file
    if not isinstance(doc, dict):
        raise ValueError("config must be a JSON object")
    allowed = {"schema_version", "command", "params"}
    extra = set(doc) - allowed
    if extra:
        raise ValueError(f"unknown config fields: {sorted(extra)}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}, expected {SCHEMA_VERSION}")
    if doc.get("command", command) != command:
        raise ValueError(f"config is for {doc['command']!r}, not {command!r}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ValueError("params must be an object")
    known = {p.name for p in PARAMS[command]} | set(COMMON)
    unknown = set(params) - known
    if unknown:
        raise ValueError(f"unknown parameters for {command}: {sorted(unknown)}")
    return params


def _coerce(prm: Param, value):
    if prm.multi:
        if not isinstance(value, list):
            value = [value]
        return [prm.type(v) for v in value]
    if value is None:
        return None
    if prm.type is int and isinstance(value, float):
        if value != int(value):
            raise ValueError(f"{prm.name} must be an integer")
    out = prm.type(value)
    if prm.choices and out not in prm.choices:
        raise ValueError(f"{prm.name} must be one of {prm.choices}")
    return out


def resolve(ns: argparse.Namespace) -> dict:
    """Merge defaults, flags and config file into one parameter record."""
    command = ns.command
    common_params = [
        Param("out", str, None), Param("format", str, "csv", choices=("csv", "json")), Param("seed", int, None),
        Param("n_paths", int, None), Param("dt", float, None), Param("workers", int, 1),
    ]
    specs = {p.name: p for p in PARAMS[command] + common_params}
    values = {name: getattr(ns, name) for name in specs}
    if ns.config:
        values.update(_load_config(ns.config, command))
    out = {}
    for name, prm in specs.items():
        v = values[name]
        out[name] = _coerce(prm, prm.default if v is None else v)
    return out


def _validate(command: str, p: dict) -> None:
    if command in RANDOMIZED and p["seed"] is None:
        raise ValueError(f"{command} needs an explicit --seed")
    if p["seed"] is not None and not 0 <= p["seed"] < 2**64:
        raise ValueError("seed must fit in 64 unsigned bits")
    if p["workers"] < 1:
        raise ValueError("--workers must be >= 1")
    if command not in RANDOMIZED and command != "verify":
        for flag in ("n_paths", "dt", "seed"):
            if p[flag] is not None:
                raise ValueError(f"--{flag.replace('_', '-')} does not apply to {command}")
    for k, v in p.items():
        vals = v if isinstance(v, list) else [v]
        for x in vals:
            if isinstance(x, float) and math.isnan(x):
                raise ValueError(f"{k} is NaN")


def config_echo(command: str, p: dict) -> dict:
    # output location and worker count do not change results
    params = {k: v for k, v in p.items() if k not in ("out", "format", "workers")}
    return {"schema_version": SCHEMA_VERSION, "command": command, "params": params}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        p = resolve(ns)
        _validate(ns.command, p)
    except (UsageError, ValueError) as exc:
        print(f"stopping: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            table = COMMANDS[ns.command](p)
    except (ValueError, TypeError, li.IllConditionedError, ls.NonConvergentIntegral) as exc:
        print(f"stopping: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = render(table, p["format"], config_echo(ns.command, p))
    if p["out"]:
        with open(p["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_VERIFY if getattr(table, "failed", False) else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
