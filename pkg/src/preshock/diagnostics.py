"""Run-time diagnostics: weighted L^p energies and Hoelder seminorms."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EXACT_PAIR_LIMIT = 2048


def holder_seminorm(x, f, delta: float, n_random: int = 20000, seed: int = 0) -> float:
    """Sampled ``sup |f(x) - f(x')| / |x - x'|**delta``.

    Up to ``EXACT_PAIR_LIMIT`` samples every pair is used.  Above that, all
    pairs at dyadic index lags plus ``n_random`` seeded random pairs.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.size < 16:
        raise ValueError("need at least 16 samples")
    if not 0 < delta <= 1:
        raise ValueError(f"Hoelder exponent must lie in (0, 1], got {delta}")
    order = np.argsort(x, kind="stable")
    x, f = x[order], f[order]
    n = x.size
    best = 0.0

    def update(dx, df):
        nonlocal best
        ok = dx > 0
        if np.any(ok):
            best = max(best, float(np.max(np.abs(df[ok]) / dx[ok] ** delta)))

    if n <= EXACT_PAIR_LIMIT:
        for lag in range(1, n):
            update(x[lag:] - x[:-lag], f[lag:] - f[:-lag])
        return best

    lag = 1
    while lag < n:
        update(x[lag:] - x[:-lag], f[lag:] - f[:-lag])
        lag *= 2
    if n_random:
        rng = np.random.default_rng(seed)
        i = rng.integers(0, n, n_random)
        j = rng.integers(0, n, n_random)
        update(np.abs(x[i] - x[j]), f[i] - f[j])
    return best


# {{{ energy

def weight_exponent(alpha: float) -> float:
    return 2.0 / alpha + 0.5


def _weighted_integrand(Sigma, etax, Bt, b):
    return np.abs(Bt) * Sigma ** (-b)


def energy_root(state, p: float, Bt, gas, grid, measure: str = "raw") -> float:
    """``E_p**(1/p)`` computed in scaled form so large ``p`` cannot overflow.

    ``measure='normalized'`` replaces ``eta_x dx`` by the probability measure
    ``eta_x dx / int eta_x dx``; then the root increases with ``p`` toward
    the weighted sup.
    """
    if not p > 1:
        raise ValueError(f"energy exponent must exceed 1, got {p}")
    b = weight_exponent(gas.alpha)
    etax = state.etax
    f = _weighted_integrand(state.Sigma, etax, Bt, b)
    m = float(np.max(f))
    if m == 0.0:
        return 0.0
    wgt = np.maximum(etax, 0.0)
    if math.isinf(p):
        return float(np.max(f[wgt > 0]))
    integral = grid.integrate(wgt * (f / m) ** p)
    if measure == "normalized":
        integral /= grid.integrate(wgt)
    return m * integral ** (1.0 / p)


def energy_Ep(state, p: float, Bt, gas, grid) -> float:
    """``int Sigma**(-b p) eta_x |Bt|**p dx`` with ``b = 2/alpha + 1/2``."""
    r = energy_root(state, p, Bt, gas, grid)
    return r**p


def weighted_sup(state, Bt, gas) -> float:
    f = _weighted_integrand(state.Sigma, state.etax, Bt, weight_exponent(gas.alpha))
    return float(np.max(f[state.etax > 0]))


@dataclass
class EnergyTrace:
    p: float
    b: float
    t: list = field(default_factory=list)
    Ep: list = field(default_factory=list)
    root: list = field(default_factory=list)
    bound_rhs: float = math.nan

    def add(self, t, root):
        if self.t and not t > self.t[-1]:
            raise ValueError("energy samples must be strictly increasing in time")
        self.t.append(float(t))
        self.root.append(float(root))
        self.Ep.append(float(root) ** self.p)

    @property
    def sup_root(self) -> float:
        return max(self.root) if self.root else 0.0

    def columns(self):
        return {"t": self.t, "E_p": self.Ep, "E_p_root": self.root}


class EnergyMonitor:
    """Run callback that samples ``E_p`` for several exponents.

    Sampling stops once ``min eta_x`` drops below ``10 * floor``, since the
    unpacking of ``Z_t`` divides by ``eta_x``.
    """

    def __init__(self, sys, ps=(2, 4, 8), stride: int = 10):
        from .charsolver import B, rhs
        self._rhs, self._row = rhs, B
        self.sys = sys
        self.stride = int(stride)
        self.count = 0
        b = weight_exponent(sys.gas.alpha)
        rhs_bound = {p: lp_budget(sys.data, p) for p in ps}
        self.traces = {p: EnergyTrace(float(p), b, bound_rhs=rhs_bound[p]) for p in ps}
        self.sup_trace = []

    def __call__(self, state):
        if self.count % self.stride == 0 and np.min(state.etax) >= 10.0 * self.sys.floor:
            self.sample(state)
        self.count += 1

    def sample(self, state):
        Bt = self._rhs(state.y, self.sys)[self._row]
        for p, tr in self.traces.items():
            if tr.t and state.t <= tr.t[-1]:
                continue
            tr.add(state.t, energy_root(state, p, Bt, self.sys.gas, self.sys.grid))
        self.sup_trace.append((state.t, weighted_sup(state, Bt, self.sys.gas)))


def lp_norm(f, p, grid) -> float:
    f = np.abs(np.nan_to_num(f))
    m = float(np.max(f))
    if m == 0.0:
        return 0.0
    if math.isinf(p):
        return m
    return m * grid.integrate((f / m) ** p) ** (1.0 / p)


def lp_budget(data, p) -> float:
    """``||z0''||_p + ||k0''||_p + eps`` on the data's grid."""
    x = data.grid.points
    return (lp_norm(data.z0(x, 2), p, data.grid) + lp_norm(data.k0(x, 2), p, data.grid)
            + data.eps)


def energy_bound_check(trace: EnergyTrace, data, C_budget: float = 100.0) -> dict:
    rhs = trace.bound_rhs if math.isfinite(trace.bound_rhs) else lp_budget(data, trace.p)
    sup = trace.sup_root
    if rhs == 0.0:
        ratio = 0.0 if sup == 0.0 else math.inf
    else:
        ratio = sup / rhs
    return {"p": trace.p, "b": trace.b, "sup_root": sup, "bound_rhs": rhs,
            "sup_ratio": ratio, "pass": bool(math.isfinite(ratio) and ratio <= C_budget)}


def p_sweep(state, Bt, gas, grid, ps=(2, 4, 8, 16)) -> dict:
    """Normalized-measure roots for increasing ``p`` against the weighted sup."""
    roots = [energy_root(state, p, Bt, gas, grid, "normalized") for p in ps]
    sup = weighted_sup(state, Bt, gas)
    tol = 1e-12 * max(sup, 1e-300)
    monotone = all(b >= a - tol for a, b in zip(roots, roots[1:]))
    below = all(r <= sup + tol for r in roots)
    return {"p": list(ps), "root": roots, "sup": sup, "monotone": monotone, "below_sup": below}

# }}}


# {{{ initial Z-dot time derivative, straight from the Eulerian equations

def initial_Zt(data, gas, x=None):
    """Material derivative of ``q^z`` along the fast characteristic at t = 0.

    Uses only the Riemann-variable Euler equations and derivatives of the
    initial data up to second order, so it is independent of the Lagrangian
    right-hand side.
    """
    x = data.grid.points if x is None else np.asarray(x, dtype=float)
    a, gm = gas.alpha, gas.gamma
    c = a / (2.0 * gm)
    w, w1 = data.w0(x), data.w0(x, 1)
    z, z1, z2 = data.z0(x), data.z0(x, 1), data.z0(x, 2)
    k1, k2 = data.k0(x, 1), data.k0(x, 2)
    s, s1 = 0.5 * (w - z), 0.5 * (w1 - z1)
    lam1 = 0.5 * (1 - a) * w + 0.5 * (1 + a) * z
    lam1y = 0.5 * (1 - a) * w1 + 0.5 * (1 + a) * z1
    lam2, lam2y = 0.5 * (w + z), 0.5 * (w1 + z1)
    lam3 = 0.5 * (1 + a) * w + 0.5 * (1 - a) * z
    src = c * s * s * k1
    w_t = -lam3 * w1 + src
    z_t = -lam1 * z1 + src
    s_t = 0.5 * (w_t - z_t)
    z_yt = -(lam1y * z1 + lam1 * z2) + c * (2 * s * s1 * k1 + s * s * k2)
    k_yt = -(lam2y * k1 + lam2 * k2)
    q_t = z_yt + (s_t * k1 + s * k_yt) / (2 * gm)
    q_y = z2 + (s1 * k1 + s * k2) / (2 * gm)
    return q_t + lam3 * q_y

# }}}


# {{{ Hoelder suite

@dataclass
class HolderReport:
    quantity: str
    delta: float
    value: float
    samples: int
    budget: float
    passed: bool

    def to_dict(self):
        return {"quantity": self.quantity, "delta": self.delta, "value": self.value,
                "samples": self.samples, "budget": self.budget, "pass": self.passed}


def holder_suite(state, sys, C_budget: float = 100.0, null_tol: float = 1e-8,
                 seed: int = 0) -> list[HolderReport]:
    """Seminorms of the O(eps) quantities along the characteristic.

    Label-space quantities use exponent ``1/beta``; the Eulerian gradients of
    ``z`` and ``k`` are sampled at ``(eta, value)`` pairs with exponent
    ``1/(beta+1)``.
    """
    data, gas, x = sys.data, sys.gas, sys.grid.points
    beta = data.beta
    d_lab = min(1.0, 1.0 / beta)
    d_eul = 1.0 / (beta + 1.0)
    h = 0.5 / gas.gamma
    S, etax = state.Sigma, state.etax
    Kc = sys.kdot(S, state.g)
    Kx = etax * Kc
    items = [
        ("W_x-w0'", x, state.A + h * S * Kx - data.w0(x, 1), d_lab),
        ("Z_x", x, etax * state.B - h * S * Kx, d_lab),
        ("K_x", x, Kx, d_lab),
        ("Zdot", x, state.B, d_lab),
        ("Kdot", x, Kc, d_lab),
        ("z_y", state.eta, state.B - h * S * Kc, d_eul),
        ("k_y", state.eta, Kc, d_eul),
    ]
    budget = max(C_budget * data.eps, null_tol)
    out = []
    for name, pos, val, delta in items:
        v = holder_seminorm(pos, val, delta, seed=seed)
        out.append(HolderReport(name, delta, v, len(pos), budget, v <= budget))
    return out

# }}}
