"""Ideal-gas parameters, Riemann-variable algebra and the cusp initial-data family.

The dominant Riemann variable starts as ``1 + bar_w0 + dw`` where ``bar_w0`` is
the odd, 2*pi-periodic profile

    bar_w0(x) = -x + C x |x|**(1/beta)          for |x| <= 1

blended to zero at |x| = pi.  The subdominant variable ``z0`` and the entropy
``k0`` are small periodic perturbations of 0 and of a constant.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .diagnostics import holder_seminorm


class DomainError(ValueError):
    """Raised for parameters outside the admissible range."""


class PerturbationRejected(ValueError):
    """Raised when a perturbation exceeds its norm budget."""

    def __init__(self, message, norms):
        super().__init__(message)
        self.norms = norms


# {{{ gas parameters and Riemann variables

@dataclass(frozen=True)
class GasParams:
    gamma: float
    alpha: float


def make_gas(gamma: float) -> GasParams:
    gamma = float(gamma)
    if not gamma > 1.0:
        raise DomainError(f"adiabatic exponent must exceed 1, got gamma={gamma}")
    return GasParams(gamma=gamma, alpha=(gamma - 1.0) / 2.0)


def riemann_from_primitive(u, sigma):
    return u + sigma, u - sigma


def primitive_from_riemann(w, z):
    return 0.5 * (w + z), 0.5 * (w - z)


def wave_speeds(w, z, gas: GasParams):
    """Return the three characteristic speeds ``(u - a*s, u, u + a*s)``."""
    a = gas.alpha
    lam1 = 0.5 * (1.0 - a) * w + 0.5 * (1.0 + a) * z
    lam2 = 0.5 * (w + z)
    lam3 = 0.5 * (1.0 + a) * w + 0.5 * (1.0 - a) * z
    return lam1, lam2, lam3

# }}}


# {{{ grid

@dataclass(frozen=True)
class TorusGrid:
    """Label grid on [-pi, pi) obtained from a uniform computational grid.

    ``points = X(xi)`` for ``xi`` uniform; ``jac = dX/dxi``.  Without grading
    the map is the identity.  ``x = 0`` is always a grid point (index n // 2).
    """

    n: int
    grading: float | None
    xi: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    jac: np.ndarray = field(repr=False)

    @property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.n

    @property
    def dx_min(self) -> float:
        return float(np.min(self.jac)) * self.dxi

    @property
    def origin(self) -> int:
        return self.n // 2

    def integrate(self, f) -> float:
        """Periodic trapezoid rule."""
        return float(np.sum(f * self.jac) * self.dxi)


def make_grid(n: int, grading: float | None = None, beta: float = 1.0) -> TorusGrid:
    """Build a label grid; ``grading=h`` clusters points near 0 with density
    proportional to ``(|x| + h)**(-1/(beta+1))``."""
    n = int(n)
    if n < 16 or n % 2:
        raise DomainError(f"grid needs an even point count >= 16, got n={n}")
    xi = -math.pi + 2.0 * math.pi * np.arange(n) / n
    if grading is None or grading <= 0:
        return TorusGrid(n, None, xi, xi.copy(), np.ones(n))

    h = float(grading)
    q = 1.0 / (beta + 1.0)
    e = 1.0 - q

    def G(r):
        return ((r + h) ** e - h ** e) / e

    gpi = G(math.pi)
    target = np.abs(xi) / math.pi * gpi
    r = (target * e + h ** e) ** (1.0 / e) - h
    x = np.sign(xi) * r
    x[0] = -math.pi
    jac = gpi / (math.pi * (np.abs(x) + h) ** (-q))
    return TorusGrid(n, h, xi, x, jac)

# }}}


# {{{ smooth bump

def _transition(s, order=0):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1, with derivatives."""
    s = np.asarray(s, dtype=float)

    def f(t, k):
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        e = np.exp(-1.0 / tp)
        if k == 0:
            out[pos] = e
        elif k == 1:
            out[pos] = e / tp**2
        else:
            out[pos] = e * (1.0 - 2.0 * tp) / tp**4
        return out

    g, h = f(s, 0), f(1.0 - s, 0)
    d = g + h
    if order == 0:
        return g / d
    g1, h1 = f(s, 1), -f(1.0 - s, 1)
    num = g1 * h - g * h1
    if order == 1:
        return num / d**2
    g2, h2 = f(s, 2), f(1.0 - s, 2)
    num1 = g2 * h - g * h2
    d1 = g1 + h1
    return (num1 * d - 2.0 * num * d1) / d**3


def bump(x, inner: float, outer: float, order: int = 0):
    """Even bump equal to 1 on |x| <= inner and 0 on |x| >= outer."""
    x = np.asarray(x, dtype=float)
    s = (outer - np.abs(x)) / (outer - inner)
    val = _transition(s, order)
    if order == 0:
        return val
    chain = -np.sign(x) / (outer - inner)
    if order == 1:
        return val * chain
    return val / (outer - inner) ** 2

# }}}


# {{{ base profile

def _quintic_hermite(s, order=0):
    """Basis pair (h00, h10) with zero second derivatives at the ends.

    Only the two functions attached to the left endpoint are needed, since
    the blend vanishes with zero slope at the right end.
    """
    s2 = s * s
    if order == 0:
        return (1.0 + s2 * s * (-10.0 + s * (15.0 - 6.0 * s)),
                s + s2 * s * (-6.0 + s * (8.0 - 3.0 * s)))
    if order == 1:
        return (s2 * (-30.0 + s * (60.0 - 30.0 * s)),
                1.0 + s2 * (-18.0 + s * (32.0 - 15.0 * s)))
    return (s * (-60.0 + s * (180.0 - 120.0 * s)),
            s * (-36.0 + s * (96.0 - 60.0 * s)))


_hermite_scalar = numba.njit(cache=True)(_quintic_hermite)


@numba.njit(cache=True)
def _frac_pow(r, e):
    if e == 1.0:
        return r
    if e == 0.5:
        return math.sqrt(r)
    if e == 0.25:
        return math.sqrt(math.sqrt(r))
    return r**e


@numba.njit(cache=True)
def _base_kernel(x, inv, C, v1, s1, order):
    L = math.pi - 1.0
    out = np.empty(x.size)
    for i in range(x.size):
        y = (x[i] + math.pi) % (2.0 * math.pi) - math.pi
        r = abs(y)
        sg = 1.0 if y > 0 else (-1.0 if y < 0 else 0.0)
        if r <= 1.0:
            p = _frac_pow(r, inv)
            if order == 0:
                out[i] = sg * (-r + C * r * p)
            elif order == 1:
                out[i] = -1.0 + C * (1.0 + inv) * p
            else:
                out[i] = sg * C * (1.0 + inv) * inv * r ** (inv - 1.0) if r > 0 else 0.0
        else:
            h00, h10 = _hermite_scalar((r - 1.0) / L, order)
            val = h00 * v1 + h10 * L * s1
            if order == 0:
                out[i] = sg * val
            elif order == 1:
                out[i] = val / L
            else:
                out[i] = sg * val / (L * L)
    return out


@dataclass(frozen=True)
class BaseProfile:
    """Odd periodic profile with a ``x|x|**(1/beta)`` cusp term at the origin.

    On 1 <= |x| <= pi it is a quintic Hermite blend matching value and slope
    at |x| = 1 and vanishing with zero slope at |x| = pi.
    """

    beta: float
    C: float

    def _blend_data(self):
        v1 = -1.0 + self.C
        s1 = -1.0 + (1.0 + 1.0 / self.beta) * self.C
        return v1, s1

    def __call__(self, x, order: int = 0):
        x = np.asarray(x, dtype=float)
        v1, s1 = self._blend_data()
        out = _base_kernel(np.ascontiguousarray(x).ravel(), 1.0 / self.beta, self.C,
                           v1, s1, int(order))
        return out.reshape(x.shape)

    def derivative(self, x):
        return self(x, 1)


def build_base_profile(beta: float, C: float | None = None) -> BaseProfile:
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    C = beta / (beta + 1.0) if C is None else float(C)
    if not C > 0:
        raise DomainError(f"cusp coefficient must be positive, got {C}")
    prof = BaseProfile(float(beta), C)
    r = np.linspace(1.0, math.pi, 4001)
    vals = prof(r)
    slopes = prof(r, 1)
    assert np.all(np.abs(prof(np.linspace(-math.pi, math.pi, 8001))) < 1.0), \
        "base profile blend leaves (-1, 1)"
    assert np.all(slopes >= -1e-14) and np.all(slopes <= 1.0), \
        "base profile blend slope leaves [0, 1]"
    assert abs(vals[-1]) < 1e-14
    return prof

# }}}


# {{{ perturbations

_PHASES = {"w": 0.0, "z": 0.7, "k": 1.3}


@dataclass(frozen=True)
class PerturbSpec:
    """A single perturbation shape applied to the listed fields.

    kind: ``none``, ``sine``, ``cosine`` or ``kink``.  Trigonometric kinds use
    ``amplitude * sin(mode * x + phase)`` with a fixed per-field phase.  The
    kink ``amplitude * x|x|**exponent * bump(x)`` has critical regularity and
    only perturbs ``w``.
    """

    kind: str = "none"
    amplitude: float = 0.0
    mode: int = 1
    exponent: float | None = None
    fields: str = "wzk"

    def __post_init__(self):
        if self.kind not in ("none", "sine", "cosine", "kink"):
            raise DomainError(f"unknown perturbation kind {self.kind!r}")
        if self.kind in ("sine", "cosine") and int(self.mode) != self.mode:
            raise DomainError("trigonometric perturbations need an integer mode")
        if set(self.fields) - set("wzk"):
            raise DomainError(f"perturbation fields must be drawn from 'wzk', got {self.fields!r}")

    def targets(self) -> str:
        if self.kind == "none" or self.amplitude == 0:
            return ""
        if self.kind == "kink":
            return "w" if "w" in self.fields else ""
        return self.fields

    def evaluate(self, x, which: str, beta: float, order: int = 0):
        x = np.asarray(x, dtype=float)
        if which not in self.targets():
            return np.zeros_like(x)
        a = self.amplitude
        if self.kind in ("sine", "cosine"):
            m = self.mode
            ph = _PHASES[which] + (0.5 * math.pi if self.kind == "cosine" else 0.0)
            arg = m * x + ph
            return a * m**order * (np.sin, np.cos, lambda t: -np.sin(t))[order](arg)
        e = 1.0 / beta if self.exponent is None else float(self.exponent)
        y = np.mod(x + math.pi, 2.0 * math.pi) - math.pi
        r = np.abs(y)
        core = [y * r**e, (1.0 + e) * r**e]
        b0 = bump(y, 1.0, 2.5)
        b1 = bump(y, 1.0, 2.5, 1)
        if order == 0:
            return a * core[0] * b0
        if order == 1:
            return a * (core[1] * b0 + core[0] * b1)
        with np.errstate(divide="ignore"):
            c2 = (1.0 + e) * e * np.sign(y) * r ** (e - 1.0)
        return a * (c2 * b0 + 2 * core[1] * b1 + core[0] * bump(y, 1.0, 2.5, 2))

    def to_dict(self):
        d = {"kind": self.kind, "amplitude": self.amplitude, "fields": self.fields}
        if self.kind == "kink":
            d["exponent"] = self.exponent
        else:
            d["mode"] = self.mode
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        return cls(kind=d.pop("kind", "none"), amplitude=float(d.pop("amplitude", 0.0)),
                   mode=int(d.pop("mode", 1)), exponent=d.pop("exponent", None),
                   fields=d.pop("fields", "wzk"))

# }}}


# {{{ initial data

def holder_conjugate(beta: float) -> float:
    """``beta/(beta-1)``; infinite for beta <= 1 (grid max norms)."""
    return math.inf if beta <= 1.0 else beta / (beta - 1.0)


def _lp_mean(f, p, grid: TorusGrid):
    f = np.abs(f)
    if math.isinf(p):
        return float(np.max(f))
    m = float(np.max(f))
    if m == 0.0:
        return 0.0
    return m * (grid.integrate((f / m) ** p) / (2.0 * math.pi)) ** (1.0 / p)


@dataclass(frozen=True)
class InitialData:
    beta: float
    eps: float
    gamma: float
    C: float
    grid: TorusGrid
    perturbation: PerturbSpec
    base: BaseProfile
    k_mean: float = 0.0
    norms: dict = field(default_factory=dict)

    @property
    def holder_p(self) -> float:
        return holder_conjugate(self.beta)

    def w0(self, x, order: int = 0):
        base = self.base(x, order)
        if order == 0:
            base = base + 1.0
        return base + self.perturbation.evaluate(x, "w", self.beta, order)

    def z0(self, x, order: int = 0):
        return self.perturbation.evaluate(x, "z", self.beta, order)

    def k0(self, x, order: int = 0):
        val = self.perturbation.evaluate(x, "k", self.beta, order)
        return val + self.k_mean if order == 0 else val

    def sigma0(self, x, order: int = 0):
        return 0.5 * (self.w0(x, order) - self.z0(x, order))

    @property
    def isentropic(self) -> bool:
        return "k" not in self.perturbation.targets()

    def to_json(self) -> str:
        return json.dumps({
            "beta": self.beta, "eps": self.eps, "gamma": self.gamma, "C": self.C,
            "grid": {"n": self.grid.n, "grading": self.grid.grading},
            "perturbation": self.perturbation.to_dict(),
        }, indent=2)

    @classmethod
    def from_json(cls, text: str, margin: float = 0.0, mode: str = "theorem"):
        d = json.loads(text)
        gas = make_gas(d["gamma"])
        grid = d.get("grid", {})
        return build_initial_data(
            d["beta"], d["eps"], gas, PerturbSpec.from_dict(d.get("perturbation", {})),
            n=grid.get("n", 4096), grading=grid.get("grading"), C=d.get("C"),
            margin=margin, mode=mode)


def measure_norms(data: InitialData) -> dict:
    """Grid norms of the deviations from the unperturbed family.

    w: max of sup|dw|, sup|dw'| and the C^{0,1/beta} seminorm of dw'.
    z, k: max over derivative orders 0..2 of the normalized L^p norm.
    """
    grid = data.grid
    x = grid.points
    pert, beta = data.perturbation, data.beta
    p = data.holder_p
    dw = pert.evaluate(x, "w", beta)
    dw1 = pert.evaluate(x, "w", beta, 1)
    delta = min(1.0, 1.0 / beta)
    norms = {"w": max(float(np.max(np.abs(dw))), float(np.max(np.abs(dw1))),
                      holder_seminorm(x, dw1, delta))}
    for name in "zk":
        with np.errstate(invalid="ignore"):
            parts = [np.nan_to_num(pert.evaluate(x, name, beta, j)) for j in range(3)]
        norms[name] = max(_lp_mean(f, p, grid) for f in parts)
    return norms


def build_initial_data(beta, eps, gas: GasParams, perturbation: PerturbSpec | None = None,
                       n: int = 4096, grading=None, C=None, margin: float = 0.0,
                       mode: str = "theorem", k_mean: float = 0.0) -> InitialData:
    """Assemble ``(w0, z0, k0)`` and check the perturbation against ``eps``."""
    if mode == "theorem" and beta < 1:
        raise DomainError(f"theorem mode needs beta >= 1, got {beta}")
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    perturbation = perturbation or PerturbSpec()
    base = build_base_profile(beta, C)
    grid = make_grid(n, grading, beta)
    data = InitialData(float(beta), float(eps), gas.gamma, base.C, grid, perturbation,
                       base, k_mean)
    norms = measure_norms(data)
    budget = eps * (1.0 + margin)
    for name, val in norms.items():
        if val > 0 and not val < budget:
            raise PerturbationRejected(
                f"perturbation of {name}0 has norm {val:.3e} >= budget {budget:.3e}", norms)
    object.__setattr__(data, "norms", norms)
    if np.min(data.sigma0(grid.points)) <= 0:
        raise DomainError("initial sound speed is not positive")
    return data

# }}}
