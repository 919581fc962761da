import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from preshock.gasmodel import (DomainError, PerturbationRejected, PerturbSpec, build_base_profile,
                               build_initial_data, bump, make_gas, make_grid,
                               primitive_from_riemann, riemann_from_primitive, wave_speeds)

finite = st.floats(-1e3, 1e3, allow_nan=False)
gammas = st.floats(1.01, 5.0)
betas = st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0])


def test_make_gas_alpha():
    assert make_gas(3.0).alpha == 1.0
    assert make_gas(1.4).alpha == pytest.approx(0.2)
    with pytest.raises(DomainError):
        make_gas(1.0)


@given(finite, finite)
def test_riemann_roundtrip(u, s):
    w, z = riemann_from_primitive(u, s)
    u2, s2 = primitive_from_riemann(w, z)
    assert u2 == pytest.approx(u, abs=1e-9) and s2 == pytest.approx(s, abs=1e-9)


@given(finite, st.floats(1e-3, 1e3), gammas)
def test_wave_speeds_ordered(u, s, gamma):
    gas = make_gas(gamma)
    w, z = riemann_from_primitive(u, s)
    l1, l2, l3 = wave_speeds(w, z, gas)
    assert l1 < l2 < l3
    assert l3 - l2 == pytest.approx(gas.alpha * s, rel=1e-9, abs=1e-9)


def test_grid_basics():
    g = make_grid(64)
    assert g.points[g.origin] == 0.0
    assert g.integrate(np.ones(g.n)) == pytest.approx(2 * math.pi)
    with pytest.raises(DomainError):
        make_grid(15)


def test_graded_grid_clusters_at_origin():
    g = make_grid(256, grading=1e-3, beta=2.0)
    assert g.points[g.origin] == pytest.approx(0.0, abs=1e-14)
    assert np.all(np.diff(g.points) > 0)
    assert g.dx_min < 2 * math.pi / 256
    errs = [abs(make_grid(n, 1e-3, 2.0).integrate(np.ones(n)) - 2 * math.pi)
            for n in (256, 1024, 4096)]
    assert errs[0] < 1e-3 and errs[2] < errs[1] < errs[0]


@given(st.floats(-4.0, 4.0))
def test_bump_range(x):
    v = float(bump(np.array([x]), 1.0, 2.5)[0])
    assert 0.0 <= v <= 1.0
    if abs(x) <= 1.0:
        assert v == 1.0
    if abs(x) >= 2.5:
        assert v == 0.0


@settings(deadline=None, max_examples=25)
@given(betas, st.floats(-math.pi, math.pi))
def test_base_profile_odd_and_cusp(beta, x):
    p = build_base_profile(beta)
    xa = np.array([x])
    assert p(-xa)[0] == pytest.approx(-p(xa)[0], abs=1e-15)
    if abs(x) < 1:
        assert p(xa)[0] == pytest.approx(-x + p.C * x * abs(x) ** (1 / beta), abs=1e-14)


@pytest.mark.parametrize("beta", [1.0, 2.0, 4.0])
def test_base_profile_derivatives_match_differences(beta):
    p = build_base_profile(beta)
    x = np.linspace(-3.0, 3.0, 601) + 0.0013
    h = 1e-6
    fd1 = (p(x + h) - p(x - h)) / (2 * h)
    assert np.max(np.abs(fd1 - p(x, 1))) < 1e-7
    fd2 = (p(x + h, 1) - p(x - h, 1)) / (2 * h)
    far = np.abs(x) > 0.05
    assert np.max(np.abs(fd2 - p(x, 2))[far]) < 1e-5


def test_base_profile_minimum_slope_at_origin():
    p = build_base_profile(2.0)
    x = np.linspace(-math.pi, math.pi, 4001)
    d = p(x, 1)
    assert np.argmin(d) == 2000 and d[2000] == -1.0


@pytest.mark.parametrize("kind", ["sine", "cosine"])
def test_perturbation_derivatives(kind):
    ps = PerturbSpec(kind, 1e-3, 2)
    x = np.linspace(-3, 3, 101)
    h = 1e-6
    for f in "wzk":
        fd = (ps.evaluate(x + h, f, 1.0) - ps.evaluate(x - h, f, 1.0)) / (2 * h)
        assert np.max(np.abs(fd - ps.evaluate(x, f, 1.0, 1))) < 1e-9
        assert np.allclose(ps.evaluate(x, f, 1.0, 2), -4 * ps.evaluate(x, f, 1.0))


def test_kink_only_perturbs_w():
    ps = PerturbSpec("kink", 1e-4, fields="wzk")
    assert ps.targets() == "w"
    assert not np.any(ps.evaluate(np.linspace(-1, 1, 11), "z", 2.0))


def test_perturbation_dict_roundtrip():
    ps = PerturbSpec("sine", 2e-4, 3, fields="zk")
    assert PerturbSpec.from_dict(ps.to_dict()) == ps


def test_initial_data_unperturbed_family():
    gas = make_gas(1.4)
    d = build_initial_data(2.0, 0.0, gas, n=256)
    x = d.grid.points
    assert np.all(d.z0(x) == 0) and np.all(d.k0(x) == 0)
    assert d.isentropic
    assert np.min(d.w0(x, 1)) == -1.0
    assert np.allclose(d.sigma0(x), 0.5 * d.w0(x))


def test_initial_data_json_roundtrip():
    gas = make_gas(3.0)
    d = build_initial_data(1.0, 1e-3, gas, PerturbSpec("sine", 1e-4, 2), n=128)
    d2 = type(d).from_json(d.to_json())
    x = d.grid.points
    assert np.array_equal(d.w0(x), d2.w0(x)) and np.array_equal(d.k0(x), d2.k0(x))


def test_perturbation_budget_enforced():
    gas = make_gas(3.0)
    with pytest.raises(PerturbationRejected):
        build_initial_data(1.0, 1e-4, gas, PerturbSpec("sine", 1e-4, 3), n=128)
    with pytest.raises(DomainError):
        build_initial_data(0.5, 0.0, gas, n=128)
