import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _shared import make_data
from preshock import charsolver as cs
from preshock import diagnostics as dg
from preshock.gasmodel import make_grid


@settings(deadline=None, max_examples=25)
@given(st.floats(-5.0, 5.0), st.floats(-3.0, 3.0))
def test_holder_seminorm_of_affine_function(c, d):
    x = np.linspace(-1.0, 1.0, 200)
    assert dg.holder_seminorm(x, c * x + d, 1.0) == pytest.approx(abs(c), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("delta", [1.0 / 3.0, 0.5, 1.0])
def test_holder_seminorm_of_power(delta):
    # [|x|^delta]_delta = 1, attained by pairs through the origin
    x = np.linspace(-1.0, 1.0, 201)
    assert dg.holder_seminorm(x, np.abs(x) ** delta, delta) == pytest.approx(1.0, rel=1e-12)


def test_holder_seminorm_sampled_branch_is_seeded():
    x = np.sort(np.random.default_rng(1).uniform(-1, 1, 5000))
    f = np.abs(x) ** 0.5
    v1 = dg.holder_seminorm(x, f, 0.5, seed=3)
    assert v1 == dg.holder_seminorm(x, f, 0.5, seed=3)
    assert 0.9 < v1 <= 1.0 + 1e-12
    with pytest.raises(ValueError):
        dg.holder_seminorm(x, f, 1.5)


def test_weight_exponent():
    assert dg.weight_exponent(1.0) == 2.5
    assert dg.weight_exponent(0.2) == pytest.approx(10.5)


@settings(deadline=None, max_examples=25)
@given(st.floats(1.1, 30.0), st.floats(1e-3, 1e3))
def test_lp_norm_homogeneous(p, lam):
    g = make_grid(128)
    f = np.sin(g.points) + 0.3 * np.cos(3 * g.points)
    assert dg.lp_norm(lam * f, p, g) == pytest.approx(lam * dg.lp_norm(f, p, g), rel=1e-10)


def test_lp_norm_matches_direct_sum():
    g = make_grid(256)
    f = np.cos(g.points)
    assert dg.lp_norm(f, 2.0, g) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert dg.lp_norm(f, math.inf, g) == 1.0


def _perturbed_state(gamma=3.0, beta=2.0, n=512, t=0.5):
    data, gas = make_data(gamma, beta, 1e-3, n)
    sysm = cs.make_system(data, gas)
    st = cs.advance_to(cs.init_state(data, gas), t, sysm)
    return sysm, st, cs.rhs(st.y, sysm)[cs.B]


def test_energy_vanishes_without_subdominant_data():
    data, gas = make_data(3.0, 1.0, 0.0, 256)
    sysm = cs.make_system(data, gas)
    st = cs.advance_to(cs.init_state(data, gas), 0.5, sysm)
    Bt = cs.rhs(st.y, sysm)[cs.B]
    assert dg.energy_Ep(st, 2.0, Bt, gas, sysm.grid) == 0.0
    assert np.all(dg.initial_Zt(data, gas) == 0.0)


def test_energy_root_consistent_with_power():
    sysm, st, Bt = _perturbed_state()
    r = dg.energy_root(st, 4.0, Bt, sysm.gas, sysm.grid)
    assert dg.energy_Ep(st, 4.0, Bt, sysm.gas, sysm.grid) == pytest.approx(r**4, rel=1e-12)
    with pytest.raises(ValueError):
        dg.energy_root(st, 1.0, Bt, sysm.gas, sysm.grid)


def test_p_sweep_monotone_toward_sup():
    sysm, st, Bt = _perturbed_state()
    sw = dg.p_sweep(st, Bt, sysm.gas, sysm.grid, (2, 4, 8, 16, 32))
    assert sw["monotone"] and sw["below_sup"]
    assert sw["root"][-1] > 0.8 * sw["sup"]


def test_energy_monitor_and_bound_check():
    data, gas = make_data(3.0, 2.0, 1e-3, 512)
    sysm = cs.make_system(data, gas)
    mon = dg.EnergyMonitor(sysm, (2, 4), stride=5)
    cs.run_to_blowup(cs.init_state(data, gas), sysm, callback=mon)
    tr = mon.traces[2]
    assert len(tr.t) > 3 and np.all(np.diff(tr.t) > 0)
    chk = dg.energy_bound_check(tr, data)
    assert math.isfinite(chk["sup_ratio"]) and chk["sup_ratio"] > 0
    assert chk["bound_rhs"] == pytest.approx(dg.lp_budget(data, 2))
    with pytest.raises(ValueError):
        tr.add(tr.t[-1], 1.0)


def test_bound_check_zero_budget():
    tr = dg.EnergyTrace(2.0, 2.5, bound_rhs=0.0)
    tr.add(0.0, 0.0)
    assert dg.energy_bound_check(tr, None)["sup_ratio"] == 0.0
    tr.add(0.1, 1e-3)
    assert dg.energy_bound_check(tr, None)["sup_ratio"] == math.inf


def test_holder_suite_null_for_unperturbed_run():
    data, gas = make_data(3.0, 2.0, 0.0, 512)
    sysm = cs.make_system(data, gas)
    st = cs.advance_to(cs.init_state(data, gas), 0.8, sysm)
    reps = dg.holder_suite(st, sysm)
    assert {r.quantity for r in reps} >= {"z_y", "k_y", "Zdot", "Kdot"}
    assert all(r.passed and r.value <= 1e-8 for r in reps)


def test_holder_suite_small_for_perturbed_run():
    sysm, st, _ = _perturbed_state(t=0.8)
    reps = {r.quantity: r for r in dg.holder_suite(st, sysm)}
    assert 0 < reps["z_y"].value <= reps["z_y"].budget
    assert reps["z_y"].delta == pytest.approx(1.0 / 3.0)
    assert reps["Zdot"].delta == pytest.approx(0.5)
