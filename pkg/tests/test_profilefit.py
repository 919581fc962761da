import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _shared import make_data
from preshock import burgers
from preshock import charsolver as cs
from preshock import profilefit as pf


def _burgers_samples(beta, C, m=4001):
    d = burgers.key_example(beta, C)
    r = np.logspace(-9, 0, m // 2)
    x = np.concatenate([-r[::-1], [0.0], r])
    return pf.samples_from_function(x, lambda s: burgers.flow_map(d, s, 1.0), d.w0, 0.0, 0.0)


@settings(deadline=None, max_examples=12)
@given(st.sampled_from([1.0, 2.0, 4.0]), st.floats(0.4, 1.5))
def test_fit_recovers_exact_burgers_cusp(beta, C):
    fit = pf.fit_cusp(_burgers_samples(beta, C), beta)
    nu = beta / (beta + 1.0)
    assert fit.nu == pytest.approx(nu, rel=1e-4)
    assert fit.a1 == pytest.approx(C ** (-nu), rel=1e-3)
    assert fit.a2 == pytest.approx(1.0, abs=1e-3)
    assert abs(fit.ystar) < 1e-8 and not fit.fixed_nu


def test_label_inversion_roundtrip():
    s = _burgers_samples(2.0, 2.0 / 3.0)
    xs = np.linspace(-0.5, 0.5, 11)
    y = s._splines()[0](xs)
    assert np.allclose(s.label_of(y), xs, atol=1e-12)


def test_samples_validation():
    with pytest.raises(ValueError):
        pf.ProfileSamples(np.array([0.0, 0.0, 1.0]), np.zeros(3), np.zeros(3), 0, 0, 0)
    with pytest.raises(pf.ResolutionError):
        pf.ProfileSamples(np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0, 1.0]),
                          np.zeros(3), 0, 0, 0)


def test_narrow_window_is_rejected():
    s = _burgers_samples(2.0, 2.0 / 3.0)
    with pytest.raises(pf.ResolutionError):
        pf.fit_cusp(s, 2.0, r_in=1e-2, r_out=0.1)


def test_compare_theorem_clauses():
    data, _ = make_data(3.0, 2.0, 0.0, 64)
    nu = 2.0 / 3.0
    good = pf.CuspFit(1.0, nu, 1.5**nu, 1.0, 0.0, (1e-6, 0.3), 0.0)
    assert pf.compare_theorem(good, data)["pass"]
    bad = pf.CuspFit(1.0, 0.6, 1.5**nu, 1.0, 0.0, (1e-6, 0.3), 0.0)
    out = pf.compare_theorem(bad, data)
    assert not out["nu"]["pass"] and out["a1"]["pass"] and not out["pass"]


def test_extract_and_fit_solver_profile(tmp_path):
    data, gas = make_data(3.0, 1.0, 0.0, 2048)
    sysm = cs.make_system(data, gas)
    rep = cs.run_to_blowup(cs.init_state(data, gas), sysm)
    s = pf.extract_profile(rep, data.grid)
    fit = pf.fit_cusp(s, 1.0)
    cmp = pf.compare_theorem(fit, data)
    assert cmp["pass"], cmp
    pf.write_fit(tmp_path / "run", fit, s)
    saved = json.loads((tmp_path / "run_fit.json").read_text())
    assert saved["nu"] == pytest.approx(fit.nu)
    head = (tmp_path / "run_samples.csv").read_text().splitlines()[0]
    assert head == "x_label,y,w"
