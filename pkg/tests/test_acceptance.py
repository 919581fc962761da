"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records a one-line PASS/FAIL verdict; conftest prints them in the
terminal summary, and running this file directly prints them as well.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from _shared import GAMMAS, N_MAIN, euler_run
from preshock import burgers, charsolver, diagnostics, profilefit

VERDICTS: dict[int, str] = {}


def record(k: int, ok: bool, detail: str):
    VERDICTS[k] = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(VERDICTS[k])
    return ok


# {{{ 1: Burgers key example

def test_criterion_01_key_example_closed_form():
    t0 = time.perf_counter()
    worst = 0.0
    y = np.linspace(-2.0, 2.0, 100)
    for beta in (1.0, 2.0, 4.0):
        for C in (beta / (beta + 1.0), 1.0):
            d = burgers.key_example(beta, C)
            w = burgers.eval_at_blowup(d, y)
            worst = max(worst, float(np.max(np.abs(w - burgers.cusp_closed_form(y, beta, C)))))
    wall = time.perf_counter() - t0
    ok = worst <= 1e-10 and wall < 1.0
    record(1, ok, f"max |err| = {worst:.2e} (<= 1e-10), runtime {wall:.3f} s (< 1 s)")
    assert ok

# }}}


# {{{ 2: stable shock formation for Burgers

STABLE_E = {
    "constant": (burgers.Term("constant", {"c": 0.3}),),
    "line": (burgers.Term("line", {"c": 0.1, "s": 0.2}),),
    "sine": (burgers.Term("sine", {"a": 0.05, "k": 1.0, "phase": 0.3}),),
    "kink+sine": (burgers.Term("kink", {"d": 0.1, "e": 0.5}),
                  burgers.Term("sine", {"a": 0.03, "k": 2.0, "phase": 0.1})),
    "line+sine+kink": (burgers.Term("line", {"c": -0.2, "s": -0.3}),
                       burgers.Term("sine", {"a": 0.02, "k": 1.5, "phase": 0.5}),
                       burgers.Term("kink", {"d": 0.05, "e": 0.5})),
}


def test_criterion_02_stable_shock_formation():
    beta, C = 2.0, 2.0 / 3.0
    t0 = time.perf_counter()
    bad = []
    worst_T = worst_y = 0.0
    for name, terms in STABLE_E.items():
        r = burgers.stable_profile_check(beta, C, burgers.LinePerturbation(terms))
        T = 1.0 / (1.0 - r.dE0)
        eT, ey = abs(r.Tstar - T), abs(r.ystar - r.E0 * T)
        worst_T, worst_y = max(worst_T, eT), max(worst_y, ey)
        if not (r.hypotheses_ok and eT <= 1e-10 and ey <= 1e-8 and np.all(r.inside)):
            bad.append(name)
    wall = time.perf_counter() - t0
    ok = not bad and wall < 10.0
    record(2, ok, f"5 perturbations, |dT*| <= {worst_T:.1e}, |dy*| <= {worst_y:.1e}, "
                  f"b(y) inside interval; failures {bad or 'none'}; runtime {wall:.2f} s")
    assert ok

# }}}


# {{{ 3: finite-codimension experiment

def test_criterion_03_finite_codimension():
    ctrl0 = burgers.codim_experiment(0.5, 1.0 / 3.0, 0.0)
    ctrl = burgers.codim_experiment(0.5, 1.0 / 3.0, 1e-3)
    quad = burgers.codim_experiment(0.25, 0.2, 1e-3)
    ok = (abs(ctrl0.exponent - 1 / 3) <= 0.02 and abs(ctrl.exponent - 1 / 3) <= 0.02
          and quad.xstar_relerr <= 0.01 and abs(quad.exponent - 1 / 3) <= 0.02)
    record(3, ok, f"beta=1/2 exponents {ctrl0.exponent:.4f}, {ctrl.exponent:.4f}; "
                  f"beta=1/4 x* rel err {quad.xstar_relerr:.1e}, exponent {quad.exponent:.4f}")
    assert ok

# }}}


# {{{ 4: self-similar profiles

def test_criterion_04_similarity_profile():
    x = np.linspace(-50.0, 50.0, 1000)
    parts = []
    ok = True
    for beta in (1.0, 2.0):
        for C in (0.5, 1.0):
            sp = burgers.similarity_profile(beta, C)
            res = float(np.max(np.abs(sp.residual(x))))
            a = burgers.similarity_asymptotics_check(sp, 1e6)
            rdev = float(np.max(np.abs(a["ratio"][[0, -1]] - 1.0)))
            bound = 10.0 * C**2 * (1.0 + 1.0 / beta)
            near = float(np.max(a["near_scaled"]))
            good = res < 1e-10 and rdev <= 0.01 and near <= bound
            ok &= good
            parts.append(f"(b={beta:g},C={C:g}) res {res:.0e} ratio-1 {rdev:.4f}"
                         f"{'' if good else ' X'}")
    record(4, ok, "; ".join(parts))
    assert ok

# }}}


# {{{ 5: Burgers reduction of the Euler solver

def test_criterion_05_burgers_reduction():
    from _shared import make_data

    data, gas = make_data(3.0, 1.0, 0.0, 4096)
    sysm = charsolver.make_system(data, gas)
    x = data.grid.points
    w1 = data.w0(x, 1)
    worst = [0.0]

    def cb(st):
        if st.t <= 0.99:
            worst[0] = max(worst[0], float(np.max(np.abs(st.etax - (1.0 + st.t * w1)))))

    rep = charsolver.run_to_blowup(charsolver.init_state(data, gas), sysm, callback=cb)
    ok = worst[0] <= 1e-8 and abs(rep.Tstar - 1) <= 1e-4 and abs(rep.ystar - 1) <= 1e-4
    record(5, ok, f"max |eta_x - (1 + t w0')| = {worst[0]:.1e}, T* = {rep.Tstar:.10f}, "
                  f"y* = {rep.ystar:.10f}")
    assert ok

# }}}


# {{{ 6: blow-up time

def test_criterion_06_blowup_time():
    parts, ok = [], True
    slowest = 0.0
    for gamma in GAMMAS:
        for beta in (1.0, 2.0):
            for eps in (0.0, 1e-3):
                run = euler_run(gamma, beta, eps)
                T = 2.0 / (1.0 + run.gas.alpha)
                err = abs(run.report.Tstar - T)
                good = err <= 0.002 * T if eps == 0 else err <= 0.05
                good &= run.wall < 60.0
                slowest = max(slowest, run.wall)
                ok &= good
                if not good:
                    parts.append(f"g={gamma:.3g} b={beta:g} e={eps:g}: dT={err:.2e}")
    record(6, ok, f"16 runs at n={N_MAIN}; slowest {slowest:.1f} s; "
                  f"failures {parts or 'none'}")
    assert ok

# }}}


# {{{ 7: cusp profile

def _cusp_runs():
    for beta in (1.0, 2.0, 4.0):
        for gamma in GAMMAS:
            yield gamma, beta, 0.0
        yield 3.0, beta, 1e-3
    for gamma in GAMMAS[:3]:
        for beta in (1.0, 2.0):
            yield gamma, beta, 1e-3


def test_criterion_07_cusp_profile():
    parts, ok, count = [], True, 0
    worst = {"nu": 0.0, "a1": 0.0, "a2": 0.0}
    for gamma, beta, eps in _cusp_runs():
        run = euler_run(gamma, beta, eps)
        fit = profilefit.fit_cusp(profilefit.extract_profile(run.report, run.data.grid), beta)
        nu_t = beta / (beta + 1.0)
        a1_t = (1.0 + 1.0 / beta) ** nu_t
        rel = {"nu": abs(fit.nu - nu_t) / nu_t, "a1": abs(fit.a1 - a1_t) / a1_t,
               "a2": abs(fit.a2 - 1.0)}
        budget = {"nu": 0.02, "a1": 0.05, "a2": 0.05}
        widen = 100.0 * eps
        good = all(rel[k] <= budget[k] + widen for k in rel)
        for k in rel:
            worst[k] = max(worst[k], rel[k])
        count += 1
        ok &= good
        if not good:
            parts.append(f"g={gamma:.3g} b={beta:g} e={eps:g}")
    record(7, ok, f"{count} runs; worst rel dev nu {worst['nu']:.1e}, a1 {worst['a1']:.1e}, "
                  f"a2 {worst['a2']:.1e}; failures {parts or 'none'}")
    assert ok

# }}}


# {{{ 8: invariant monitors

def test_criterion_08_invariants():
    from _shared import make_data

    runs = [euler_run(g, b, e) for g in GAMMAS for b in (1.0, 2.0) for e in (0.0, 1e-3)]
    data, gas = make_data(3.0, 1.0, 0.0, 4096)
    sysm = charsolver.make_system(data, gas)
    rep5 = charsolver.run_to_blowup(charsolver.init_state(data, gas), sysm)
    logs = [r.report.monitors for r in runs] + [rep5.monitors]
    total = sum(m.total for m in logs)
    steps = sum(m.steps for m in logs)
    worst_r = max(m.worst["riemann"] for m in logs)
    ok = total == 0
    record(8, ok, f"{total} violations over {steps} accepted steps in {len(logs)} runs; "
                  f"max |W-Z-2Sigma| = {worst_r:.1e}")
    assert ok

# }}}


# {{{ 9: energy diagnostics

def test_criterion_09_energy():
    ok = True
    parts = []
    zero_worst = 0.0
    for gamma in GAMMAS:
        for beta in (1.0, 2.0):
            run = euler_run(gamma, beta, 0.0)
            for tr in run.energy.traces.values():
                zero_worst = max(zero_worst, max(tr.Ep))
    ok &= zero_worst <= 1e-12
    parts.append(f"eps=0 max E_p = {zero_worst:.1e}")
    spread = 0.0
    trend_ok = True
    for gamma, beta in [(g, b) for g in GAMMAS for b in (1.0, 2.0)]:
        fine = euler_run(gamma, beta, 1e-3)
        coarse = euler_run(gamma, beta, 1e-3, N_MAIN // 2)
        for p in (2, 4, 8):
            rf = diagnostics.energy_bound_check(fine.energy.traces[p], fine.data)["sup_ratio"]
            rc = diagnostics.energy_bound_check(coarse.energy.traces[p],
                                                coarse.data)["sup_ratio"]
            if not (math.isfinite(rf) and math.isfinite(rc)):
                ok = False
                continue
            spread = max(spread, abs(rf - rc) / rf)
        snap = fine.report.snapshot
        Bt = charsolver.rhs(snap.y, fine.sys)[charsolver.B]
        sw = diagnostics.p_sweep(snap, Bt, fine.gas, fine.data.grid, (2, 4, 8, 16))
        trend_ok &= sw["monotone"] and sw["below_sup"]
    ok &= spread <= 0.2 and trend_ok
    parts.append(f"grid-doubling spread {spread:.1%} (<= 20%)")
    parts.append(f"p-trend monotone toward sup: {trend_ok}")
    record(9, ok, "; ".join(parts))
    assert ok

# }}}


# {{{ 10: Hoelder suite

def test_criterion_10_holder():
    vals = {}
    for eps in (1e-3, 0.0):
        run = euler_run(3.0, 2.0, eps)
        snap = run.report.snapshot
        gap = run.report.Tstar - snap.t
        assert abs(gap - 0.01) < 1e-9
        rep = {h.quantity: h.value for h in diagnostics.holder_suite(snap, run.sys)}
        vals[eps] = (rep["z_y"], rep["k_y"])
    ok = max(vals[1e-3]) <= 100 * 1e-3 and max(vals[0.0]) <= 1e-8
    record(10, ok, f"eps=1e-3: [z_y]_1/3 = {vals[1e-3][0]:.2e}, [k_y]_1/3 = {vals[1e-3][1]:.2e} "
                   f"(<= 0.1); eps=0: {max(vals[0.0]):.1e} (<= 1e-8)")
    assert ok

# }}}


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
