"""Acceptance checks shared by ``stopping verify`` and the test-suite.

Each check returns a :class:`Check`; ``passed`` is ``None`` for purely
informational reports.  Tolerances are the acceptance values and
are keyword arguments only so tests can state them explicitly.
"""

from __future__ import annotations

import io
import math
import time
from contextlib import redirect_stdout
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import analytic_rbm as ar
from . import diffusion_drawdown as dd
from . import laplace_inversion as li
from . import levy_scale as ls
from .montecarlo import (
    SimulationConfig,
    empirical_lt,
    empirical_survival,
    ks_exponential_test,
    simulate_cpp_drawdown,
    simulate_cpp_exit,
    simulate_diffusion_drawdown,
    simulate_rbm_first_passage,
)

ACCEPTANCE_SEED = 1


@dataclass
class Check:
    number: int
    name: str
    passed: bool | None
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        out.seconds = time.perf_counter() - t0
        return out

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


@_timed
def check_driftless_identity(tol=1e-12, max_seconds=1.0) -> Check:
    t0 = time.perf_counter()
    worst = 0.0
    for theta in (0.1, 0.5, 1, 2, 5, 10):
        for ratio in (0.5, 1, 2):
            for sigma in (0.5, 1.0, 2.0):
                p = ar.RbmParams(0.0, sigma, 0.0, ratio * sigma)
                exact = 1.0 / math.cosh(ratio * math.sqrt(2 * theta))
                worst = max(worst, abs(ar.rbm_lt(p, theta) - exact))
    took = time.perf_counter() - t0
    ok = worst < tol and took < max_seconds
    return Check(1, "driftless identity", ok, f"max abs diff {worst:.2e} (< {tol:g}), {took * 1e3:.1f} ms",
                 data={"max_diff": worst})


@_timed
def check_perry_discrimination(n_paths=10**6, dt=1e-4, bias=2e-3, min_sep_se=5.0, seed=ACCEPTANCE_SEED,
                               n_workers=1) -> Check:
    p = ar.RbmParams(0.0, 1.0, 0.0, 1.0)
    cfg = SimulationConfig(n_paths=n_paths, seed=seed, dt=dt, n_workers=n_workers)
    est = empirical_lt(simulate_rbm_first_passage(p, cfg), 1.0)
    target = ar.rbm_lt(p, 1.0)
    rival = ar.perry_lt_driftless(1.0, 1.0)
    dev = abs(est.estimate - target)
    sep = abs(est.estimate - rival) / est.std_error
    ok = dev <= 3 * est.std_error + bias and sep >= min_sep_se
    return Check(2, "Perry discrimination", ok,
                 f"estimate {est.estimate:.5f} +/- {est.std_error:.1e}; |est-{target:.4f}|={dev:.1e} "
                 f"(<= {3 * est.std_error + bias:.1e}); {sep:.0f} SE from rival {rival:.4f}",
                 data={"estimate": est.estimate, "se": est.std_error})


DRIFTED_CASES = ((1.0, 1.0, 0.0, 1.0), (1.0, 1.0, 0.5, 1.0), (0.5, 2.0, 0.0, 2.0))


@_timed
def check_drifted_rbm(n_paths=10**5, dt=1e-4, bias=2e-3, thetas=(0.5, 1.0, 2.0), seed=ACCEPTANCE_SEED,
                      n_workers=1) -> Check:
    rows = []
    ok = True
    for case in DRIFTED_CASES:
        p = ar.RbmParams(*case)
        sample = simulate_rbm_first_passage(p, SimulationConfig(n_paths=n_paths, seed=seed, dt=dt,
                                                                n_workers=n_workers))
        for th in thetas:
            est = empirical_lt(sample, th)
            exact = ar.rbm_lt(p, th)
            dev = abs(est.estimate - exact)
            good = dev <= 3 * est.std_error + bias
            ok &= good
            rows.append((case, th, est.estimate, exact, dev, est.std_error))
    worst = max(r[4] / (3 * r[5] + bias) for r in rows)
    return Check(3, "drifted RBM vs Monte Carlo", ok, f"worst deviation {worst:.2f} of allowance over {len(rows)} cases",
                 data={"rows": rows})


def _bm_hitting_density(t):
    return t**-1.5 / math.sqrt(2 * math.pi) * math.exp(-1 / (2 * t))


@_timed
def check_inversion(rel_tol=1e-6, mass_tol=1e-3) -> Check:
    F = li.LtFunction(lambda th: np.exp(-np.sqrt(2 * th)), "Brownian hitting time of level 1")
    cfg = li.InversionConfig("talbot", 32, (0.5, 1.0, 2.0))
    rel = max(abs(v / _bm_hitting_density(t) - 1) for t, v in li.invert_density(F, cfg))
    masses = []
    for case in ((0.0, 1.0, 0.0, 1.0), (1.0, 1.0, 0.0, 1.0)):
        p = ar.RbmParams(*case)
        grid = np.linspace(1e-3, 40.0, 40000)
        dens = np.array([v for _, v in li.invert_density(
            li.LtFunction(lambda th, p=p: ar.rbm_lt_complex(p, th)), li.InversionConfig("talbot", 32, grid))])
        masses.append(float(np.trapezoid(dens, grid)))
    mass_err = max(abs(m - 1) for m in masses)
    ok = rel < rel_tol and mass_err < mass_tol
    return Check(4, "Laplace inversion", ok,
                 f"Talbot rel err {rel:.1e} (< {rel_tol:g}); inverted RBM density mass {masses} (|m-1| < {mass_tol:g})")


@_timed
def check_lehoczky_constant_gamma(res_tol=1e-7, slope_tol=1e-6) -> Check:
    worst_res = worst_slope = 0.0
    xi = np.linspace(0.0, 5.0, 11)
    for c in (0.5, 1.0, 2.0):
        phi = dd.PhiFunction.from_gamma(dd.constant_gamma(c))
        for delta in (0.5, 1.0):
            diag = dd.exponentiality_diagnostic(dd.drawdown_survival(phi, delta, xi))
            expected = 2 * c / math.expm1(2 * c * delta)
            worst_res = max(worst_res, diag.max_abs_residual)
            worst_slope = max(worst_slope, abs(diag.lambda_hat - expected))
    ok = worst_res < res_tol and worst_slope < slope_tol
    return Check(5, "Lehoczky constant gamma", ok,
                 f"max residual {worst_res:.1e} (< {res_tol:g}), max slope error {worst_slope:.1e} (< {slope_tol:g})")


@_timed
def check_cross_route_rate(rel_tol=1e-10) -> Check:
    worst = 0.0
    for mu in (0.5, 1.0, 2.0):
        for sigma in (0.5, 1.0, 2.0):
            phi = dd.PhiFunction.from_gamma(dd.brownian_drift(mu, sigma))
            for delta in (0.5, 1.0, 2.0):
                h = dd.hazard(phi, delta, 0.5)
                r = ls.drawdown_rate(ls.BmDrift(mu, sigma), delta)
                worst = max(worst, abs(h - r) / r)
    return Check(6, "diffusion hazard == Levy drawdown rate", worst < rel_tol,
                 f"max rel diff {worst:.1e} over 27 cases (< {rel_tol:g})")


@_timed
def check_diffusion_drawdown_mc(n_paths=10**4, dt=1e-4, alpha=0.01, res_min=1e-3, n_se=3.0,
                                seed=ACCEPTANCE_SEED, n_workers=1) -> Check:
    cfg = SimulationConfig(n_paths=n_paths, seed=seed, dt=dt, n_workers=n_workers)
    rate = 2.0 / math.expm1(2.0)
    ks = ks_exponential_test(simulate_diffusion_drawdown(dd.brownian_drift(1.0, 1.0), 1.0, cfg), rate)

    spec = dd.linear_phi_example()
    phi = dd.PhiFunction.from_gamma(spec)
    curve = dd.drawdown_survival(phi, 1.0, np.linspace(0.0, 3.0, 13))
    resid = dd.exponentiality_diagnostic(curve).max_abs_residual
    points = (0.5, 1.0, 2.0)
    exact = np.exp(dd.drawdown_survival(phi, 1.0, points).log_survival)
    emp = empirical_survival(simulate_diffusion_drawdown(spec, 1.0, cfg), points)
    z = [abs(e.survival - q) / e.std_error for e, q in zip(emp, exact)]
    ok = ks.p_value >= alpha and resid > res_min and max(z) <= n_se
    return Check(7, "diffusion drawdown Monte Carlo", ok,
                 f"BM KS p={ks.p_value:.3f} (>= {alpha}); linear-Phi residual {resid:.3f} (> {res_min}); "
                 f"survival z-scores {', '.join(f'{v:.2f}' for v in z)} (<= {n_se:g})")


LEVY_MODELS = (ls.BmDrift(1.0, 1.0), ls.CppExp(2.0, 1.0, 1.0), ls.CaballeroChaumont(1.5))


@_timed
def check_scale_identity(rel_tol=1e-6) -> Check:
    worst = max(ls.scale_laplace_check(m, th).rel_err for m in LEVY_MODELS for th in (0.5, 1, 2, 5))
    return Check(8, "scale function Laplace identity", worst < rel_tol, f"max rel err {worst:.1e} (< {rel_tol:g})")


@_timed
def check_caballero(tol=1e-12) -> Check:
    m = ls.CaballeroChaumont(1.5)
    rate_err = abs(ls.drawdown_rate(m, 1.0) - 0.5 / math.expm1(1.0))
    mean_err = abs(ls.mean_max_before_drawdown(m, 1.0) - math.expm1(1.0) / 0.5)
    return Check(9, "Caballero-Chaumont closed forms", max(rate_err, mean_err) < tol,
                 f"rate err {rate_err:.1e}, mean err {mean_err:.1e} (< {tol:g})")


@_timed
def check_cpp_event_driven(n_exit=10**5, n_drawdown=10**4, alpha=0.01, n_se=3.0, seed=ACCEPTANCE_SEED,
                           n_workers=1) -> Check:
    m = ls.CppExp(2.0, 1.0, 1.0)
    exits = simulate_cpp_exit(m, 1.0, 1.0, SimulationConfig(n_paths=n_exit, seed=seed, scheme="event_driven",
                                                            n_workers=n_workers))
    target = ls.two_sided_exit(m, 1.0, 1.0)
    z = abs(exits.frequency - target) / exits.std_error
    rate = ls.drawdown_rate(m, 1.0)
    sample = simulate_cpp_drawdown(m, 1.0, SimulationConfig(n_paths=n_drawdown, seed=seed, scheme="event_driven",
                                                            n_workers=n_workers))
    ks = ks_exponential_test(sample, rate)
    printed = ls.cpp_printed_rate(m, 1.0)
    ks_printed = ks_exponential_test(sample, printed)
    ok = z <= n_se and ks.p_value >= alpha
    return Check(10, "compound Poisson event-driven", ok,
                 f"exit freq {exits.frequency:.4f} vs W(1)/W(2)={target:.4f} ({z:.2f} SE); "
                 f"KS p={ks.p_value:.3f} vs W'/W rate {rate:.5f}; printed rate {printed:.5f} KS p={ks_printed.p_value:.1e}",
                 data={"w_rate": rate, "printed_rate": printed})


@_timed
def check_dde(tol=1e-12) -> Check:
    sol = dd.dde_solve(dd.PhiFunction.linear(), 1.0, 1.0, 5.0)
    xs = np.linspace(0.0, 5.0, 2001)
    err = max(abs(sol(x) - 0.5 * (x + 2.0)) for x in xs)
    return Check(11, "DDE method of steps", err < tol, f"max |Phi - (xi+2)/2| on [0,5] = {err:.1e} (< {tol:g})")


@_timed
def check_determinism(n_paths=4000, dt=1e-3, seed=ACCEPTANCE_SEED) -> Check:
    from .cli import run

    def capture(argv):
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = run(argv)
        return code, buf.getvalue()

    commands = [
        ["rbm-mc", "--mu", "0.5", "--sigma", "1", "--delta", "1", "--n-paths", str(n_paths), "--dt", str(dt),
         "--seed", str(seed)],
        ["levy-mc", "--model", "cpp-exp", "--c", "2", "--lam", "1", "--jump-mu", "1", "--delta", "1",
         "--n-paths", str(n_paths), "--seed", str(seed)],
    ]
    ok = True
    for cmd in commands:
        outs = {capture(cmd + ["--workers", str(w)]) for w in (1, 1, 3)}
        ok &= len(outs) == 1 and next(iter(outs))[0] == 0
    return Check(12, "determinism across runs and workers", ok,
                 "bit-identical output for workers 1, 1, 3" if ok else "outputs differ")


ANALYTIC_SUITE: tuple[Callable[[], Check], ...] = (
    check_driftless_identity,
    check_inversion,
    check_lehoczky_constant_gamma,
    check_cross_route_rate,
    check_scale_identity,
    check_caballero,
    check_dde,
)
MC_SUITE: tuple[Callable[[], Check], ...] = (
    check_perry_discrimination,
    check_drifted_rbm,
    check_diffusion_drawdown_mc,
    check_cpp_event_driven,
    check_determinism,
)
SUITES = {"analytic": ANALYTIC_SUITE, "mc": MC_SUITE, "all": ANALYTIC_SUITE + MC_SUITE}


def run_suite(name: str, n_workers: int = 1, echo=print) -> list[Check]:
    results = []
    for fn in SUITES[name]:
        kwargs = {"n_workers": n_workers} if "n_workers" in fn.__code__.co_varnames else {}
        check = fn(**kwargs)
        if echo is not None:
            echo(check.line())
        results.append(check)
    return results
