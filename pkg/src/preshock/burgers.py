"""Exact Burgers shock formation by characteristics and root finding.

For ``w_t + w w_y = 0`` the flow map is ``eta(x, t) = x + t w0(x)`` and ``w``
is constant along it, so every pre-shock quantity reduces to one-dimensional
minimisation and inversion problems on the initial data.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .diagnostics import holder_seminorm
from .gasmodel import DomainError, bump


class NonMonotoneFlowError(RuntimeError):
    """The flow map at the requested time is not invertible."""

    def __init__(self, interval):
        lo, hi = interval
        super().__init__(f"flow map is multivalued over y in [{lo:.6g}, {hi:.6g}]")
        self.interval = interval


# {{{ data

@dataclass(frozen=True)
class BurgersData:
    w0: Callable
    dw0: Callable
    domain: str = "line"
    bounds: tuple = (-10.0, 10.0)

    def __post_init__(self):
        if self.domain not in ("line", "torus"):
            raise DomainError(f"unknown domain {self.domain!r}")


@dataclass(frozen=True)
class Term:
    """One additive perturbation term on the line.

    constant: c;  line: c + s*x;  sine: a*sin(k*x + phase);
    kink: d * x|x|**e * bump;  quadratic: (eps/2) x**2 * bump.
    Bumps are 1 on |x| <= R and vanish for |x| >= 2R.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __call__(self, x, order=0):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "constant":
            return np.full_like(x, p["c"]) if order == 0 else np.zeros_like(x)
        if self.kind == "line":
            return p.get("c", 0.0) + p["s"] * x if order == 0 else np.full_like(x, p["s"])
        if self.kind == "sine":
            arg = p["k"] * x + p.get("phase", 0.0)
            if order == 0:
                return p["a"] * np.sin(arg)
            return p["a"] * p["k"] * np.cos(arg)
        R = p.get("R", 10.0)
        b0 = bump(x, R, 2 * R)
        b1 = bump(x, R, 2 * R, 1)
        if self.kind == "kink":
            e = p["e"]
            r = np.abs(x)
            core0, core1 = x * r**e, (1 + e) * r**e
        elif self.kind == "quadratic":
            core0, core1 = 0.5 * p["eps"] * x**2, p["eps"] * x
        else:
            raise DomainError(f"unknown term kind {self.kind!r}")
        if order == 0:
            return p.get("d", 1.0) * core0 * b0
        return p.get("d", 1.0) * (core1 * b0 + core0 * b1)


@dataclass(frozen=True)
class LinePerturbation:
    terms: tuple = ()

    def __call__(self, x, order=0):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t in self.terms:
            out = out + t(x, order)
        return out

    def deriv(self, x):
        return self(x, 1)


def key_example(beta: float, C: float, E: LinePerturbation | None = None,
                bounds=(-10.0, 10.0)) -> BurgersData:
    """``w0 = -x + C x|x|**(1/beta) + E(x)`` on the line."""
    inv = 1.0 / beta
    E = E or LinePerturbation()

    def w0(x):
        x = np.asarray(x, dtype=float)
        return -x + C * x * np.abs(x) ** inv + E(x)

    def dw0(x):
        x = np.asarray(x, dtype=float)
        return -1.0 + (1.0 + inv) * C * np.abs(x) ** inv + E(x, 1)

    return BurgersData(w0, dw0, "line", tuple(bounds))

# }}}


# {{{ flow map and blow-up

def flow_map(d: BurgersData, x, t):
    x = np.asarray(x, dtype=float)
    return x + t * d.w0(x)


@dataclass(frozen=True)
class BurgersBlowup:
    Tstar: float
    xstar: float
    ystar: float
    dw0_min: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.Tstar)


def blowup(d: BurgersData, n: int = 8193) -> BurgersBlowup:
    """Locate the global minimiser of w0' by scan + golden-section refinement."""
    lo, hi = d.bounds
    n = max(int(n), 4097)
    xs = np.linspace(lo, hi, n)
    vals = d.dw0(xs)
    i = int(np.argmin(vals))
    xbest, vbest = float(xs[i]), float(vals[i])
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    if b > a:
        res = minimize_scalar(lambda s: float(d.dw0(np.array([s]))[0]), bounds=(a, b),
                              method="bounded", options={"xatol": 1e-14, "maxiter": 500})
        if res.fun < vbest:
            xbest, vbest = float(res.x), float(res.fun)
    if vbest >= 0:
        return BurgersBlowup(math.inf, xbest, math.nan, vbest)
    T = -1.0 / vbest
    y = xbest + T * float(d.w0(np.array([xbest]))[0])
    return BurgersBlowup(T, xbest, y, vbest)


def check_monotone(d: BurgersData, t: float, n: int = 4097):
    lo, hi = d.bounds
    xs = np.linspace(lo, hi, n)
    ys = flow_map(d, xs, t)
    dy = np.diff(ys)
    tol = -1e-12 * max(1.0, float(np.max(np.abs(ys))))
    bad = np.nonzero(dy < tol)[0]
    if bad.size:
        j0, j1 = bad[0], bad[-1] + 1
        raise NonMonotoneFlowError((float(np.min(ys[j0:j1 + 1])), float(np.max(ys[j0:j1 + 1]))))


def invert_flow(d: BurgersData, y, t: float, xstar: float = 0.0, ystar: float | None = None):
    """Solve ``y = x + t w0(x)`` for ``x`` by bracketing bisection + Newton polish."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if ystar is None:
        ystar = float(flow_map(d, np.array([xstar]), t)[0])
    right = y >= ystar
    lo = np.full_like(y, xstar)
    hi = np.full_like(y, xstar)
    step = np.maximum(1.0, np.abs(y - ystar))
    # expand outward from the blow-up label until the target is bracketed
    for _ in range(200):
        cand = np.where(right, xstar + step, xstar - step)
        f = flow_map(d, cand, t) - y
        done = np.where(right, f >= 0, f <= 0)
        hi = np.where(right & done & (hi == xstar), cand, hi)
        lo = np.where(~right & done & (lo == xstar), cand, lo)
        if np.all(done):
            break
        step = np.where(done, step, 2 * step)
    else:
        raise RuntimeError("could not bracket the flow-map root")
    hi = np.where(right, np.where(hi == xstar, xstar + step, hi), xstar)
    lo = np.where(right, xstar, np.where(lo == xstar, xstar - step, lo))
    tol = 1e-13 * np.maximum(1.0, np.abs(y))
    for _ in range(400):
        active = (hi - lo) > tol
        if not np.any(active):
            break
        mid = 0.5 * (lo + hi)
        below = flow_map(d, mid, t) < y
        lo = np.where(active & below, mid, lo)
        hi = np.where(active & ~below, mid, hi)
    x = 0.5 * (lo + hi)
    res = flow_map(d, x, t) - y
    for _ in range(5):
        slope = 1.0 + t * d.dw0(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - res / slope
        ok = np.isfinite(xn) & (xn >= lo) & (xn <= hi)
        rn = np.where(ok, flow_map(d, np.where(ok, xn, x), t) - y, res)
        better = ok & (np.abs(rn) < np.abs(res))
        x = np.where(better, xn, x)
        res = np.where(better, rn, res)
    return x


def eval_at_blowup(d: BurgersData, y, blow: BurgersBlowup | None = None, check: bool = True):
    """``w(y, T*)`` by inverting the flow map at the blow-up time."""
    blow = blow or blowup(d)
    if not blow.finite:
        raise DomainError("initial data does not blow up")
    if check:
        check_monotone(d, blow.Tstar)
    x = invert_flow(d, y, blow.Tstar, blow.xstar, blow.ystar)
    return d.w0(x)


def cusp_closed_form(y, beta, C):
    """``w(y, 1)`` for the unperturbed key example."""
    y = np.asarray(y, dtype=float)
    nu = beta / (beta + 1.0)
    return -np.sign(y) * C ** (-nu) * np.abs(y) ** nu + y

# }}}


# {{{ stability of the cusp for beta >= 1

@dataclass
class StableProfileReport:
    beta: float
    C: float
    Tstar: float
    ystar: float
    E0: float
    dE0: float
    seminorm: float
    lower: float
    upper: float
    y: np.ndarray
    b: np.ndarray
    hypotheses: dict
    inside: np.ndarray

    @property
    def hypotheses_ok(self) -> bool:
        return all(self.hypotheses.values())

    @property
    def ok(self) -> bool:
        return self.hypotheses_ok and bool(np.all(self.inside))

    def failures(self) -> list[str]:
        return [k for k, v in self.hypotheses.items() if not v]


def prop_interval(beta, C, dE0, seminorm):
    nu = beta / (beta + 1.0)
    num = (1.0 - dE0) ** ((2 * beta + 1) / (beta + 1))
    shift = nu * seminorm
    lower = num / (C + shift) ** nu
    upper = num / (C - shift) ** nu if C > shift else math.inf
    return lower, upper


def stable_profile_check(beta: float, C: float, E: LinePerturbation, y=None,
                         R: float = 10.0, rtol: float = 1e-9) -> StableProfileReport:
    """Measure ``b(y)`` in the pre-shock expansion and compare with its bounds.

    With a vanishing seminorm the interval degenerates to a point; samples
    must then agree with it to ``rtol``.
    """
    d = key_example(beta, C, E, bounds=(-R, R))
    zero = np.zeros(1)
    E0 = float(E(zero)[0])
    dE0 = float(E(zero, 1)[0])
    xs = np.linspace(-R, R, 2001)
    semi = holder_seminorm(xs, E(xs, 1), 1.0 / beta)
    hyp = {
        "beta>=1": beta >= 1,
        "E'(0)<1": dE0 < 1,
        "[E']<(1+1/beta)C": semi < (1 + 1 / beta) * C,
    }
    if not hyp["E'(0)<1"]:
        return StableProfileReport(beta, C, math.inf, math.nan, E0, dE0, semi, math.nan,
                                   math.nan, np.array([]), np.array([]), hyp, np.array([]))
    blow = blowup(d)
    if y is None:
        r = np.logspace(-6, 0, 50)
        y = blow.ystar + np.concatenate([-r[::-1], r])
    y = np.asarray(y, dtype=float)
    w = eval_at_blowup(d, y, blow)
    nu = beta / (beta + 1.0)
    dy = y - blow.ystar
    with np.errstate(divide="ignore", invalid="ignore"):
        b = (E0 + (1 - dE0) * dy - w) * np.sign(dy) * np.abs(dy) ** (-nu)
    lower, upper = prop_interval(beta, C, dE0, semi)
    if semi == 0.0:
        inside = np.abs(b - lower) <= rtol * abs(lower)
    else:
        inside = (b > lower) & (b < upper)
    return StableProfileReport(beta, C, blow.Tstar, blow.ystar, E0, dE0, semi, lower, upper,
                               y, b, hyp, inside)

# }}}


# {{{ finite-codimension experiment for beta < 1

@dataclass
class CodimReport:
    beta: float
    C: float
    eps: float
    xstar: float
    xstar_closed: float
    Tstar: float
    ystar: float
    exponent: float
    exponent_left: float
    exponent_right: float
    scale: float
    window: tuple

    @property
    def xstar_relerr(self) -> float:
        if self.xstar_closed == 0:
            return abs(self.xstar)
        return abs(self.xstar - self.xstar_closed) / abs(self.xstar_closed)


def codim_xstar(beta, C, eps):
    return -abs(eps * beta**2 / ((beta + 1) * C)) ** (beta / (1 - beta))


def _loglog_slope(d, q):
    ok = (d > 0) & (q > 0)
    return float(np.polyfit(np.log(d[ok]), np.log(q[ok]), 1)[0])


def codim_experiment(beta: float, C: float, eps: float, R: float = 10.0,
                     window=(1e-6, 1e-3), npts: int = 40) -> CodimReport:
    """Quadratic perturbation of the key example for 0 < beta < 1.

    The local exponent is the slope of ``log|w - w* - (y - y*)/T*|`` against
    ``log|y - y*|``; for Burgers that quantity equals ``|x - x*|/T*`` exactly.
    """
    if not 0 < beta < 1:
        raise DomainError(f"finite-codimension experiment needs 0 < beta < 1, got {beta}")
    E = LinePerturbation((Term("quadratic", {"eps": eps, "R": R}),)) if eps else LinePerturbation()
    d = key_example(beta, C, E, bounds=(-R, R))
    blow = blowup(d)
    xc = codim_xstar(beta, C, eps) if eps else 0.0
    if eps:
        probe = blow.xstar + 0.5 * abs(blow.xstar)
        scale = abs(float(flow_map(d, np.array([probe]), blow.Tstar)[0]) - blow.ystar)
    else:
        scale = 1.0
    r = np.logspace(math.log10(window[0]), math.log10(window[1]), npts) * scale
    wstar = float(d.w0(np.array([blow.xstar]))[0])
    slopes = []
    for sgn in (-1.0, 1.0):
        y = blow.ystar + sgn * r
        w = eval_at_blowup(d, y, blow)
        q = np.abs(w - wstar - sgn * r / blow.Tstar)
        slopes.append(_loglog_slope(r, q))
    return CodimReport(beta, C, eps, blow.xstar, xc, blow.Tstar, blow.ystar,
                       0.5 * (slopes[0] + slopes[1]), slopes[0], slopes[1], scale,
                       (float(r[0]), float(r[-1])))

# }}}


# {{{ self-similar profiles

@dataclass(frozen=True)
class SimilarityProfile:
    """Solution of ``x = -W - C W |W|**(1/beta)``; strictly decreasing, W(0) = 0."""

    beta: float
    C: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        inv = 1.0 / self.beta
        nu = self.beta / (self.beta + 1.0)
        # start to the right of the root of the convex map s -> s + C s^(1+1/beta)
        s = np.minimum(ax, (ax / self.C) ** nu)
        for _ in range(200):
            F = s + self.C * s ** (1.0 + inv) - ax
            dF = 1.0 + self.C * (1.0 + inv) * s**inv
            step = F / dF
            s = np.maximum(s - step, 0.0)
            if np.all(np.abs(step) <= 4e-16 * np.maximum(1.0, s)):
                break
        return -np.sign(x) * s

    def derivative(self, x, W=None):
        W = self(x) if W is None else W
        inv = 1.0 / self.beta
        return -1.0 / (1.0 + self.C * (1.0 + inv) * np.abs(W) ** inv)

    def residual(self, x):
        W = self(x)
        Wx = self.derivative(x, W)
        return -self.beta * W + (1.0 + self.beta) * np.asarray(x) * Wx + W * Wx


def similarity_profile(beta: float, C: float) -> SimilarityProfile:
    if not (beta > 0 and C > 0):
        raise DomainError("similarity profile needs beta > 0 and C > 0")
    return SimilarityProfile(float(beta), float(C))


def similarity_asymptotics_check(sp: SimilarityProfile, xmax: float = 1e6, npts: int = 25,
                                 xnear: float = 1e-2):
    """Far-field ratio table and near-zero expansion errors."""
    beta, C = sp.beta, sp.C
    nu = beta / (beta + 1.0)
    ax = np.logspace(0, math.log10(xmax), npts)
    x = np.concatenate([-ax[::-1], ax])
    W = sp(x)
    ratio = -np.sign(x) * C ** (-nu) * np.abs(x) ** nu / W
    axn = np.logspace(math.log10(xnear) - 4, math.log10(xnear), npts)
    xn = np.concatenate([-axn[::-1], axn])
    Wn = sp(xn)
    err = np.abs(Wn - (-xn + C * xn * np.abs(xn) ** (1.0 / beta)))
    scaled = err / np.abs(xn) ** (1.0 + 2.0 / beta)
    return {
        "x": x, "W": W, "W_x": sp.derivative(x, W), "ratio": ratio,
        "x_near": xn, "near_error": err, "near_scaled": scaled,
    }


def selfsimilar_field(sp: SimilarityProfile, T: float, y0: float, y, t):
    t = np.asarray(t, dtype=float)
    if np.any(t >= T):
        raise DomainError("self-similar field is defined only for t < T")
    tau = T - t
    return tau**sp.beta * sp((np.asarray(y) - y0) / tau ** (sp.beta + 1.0))

# }}}
