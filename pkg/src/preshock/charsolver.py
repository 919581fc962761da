"""Euler evolution along the fast acoustic characteristic on a fixed label grid.

All unknowns are carried as functions of the label ``x`` and time.  The
state is packed into one ``(11, n)`` array so that RK4 stages are plain
array arithmetic; ``ROWS`` gives the row of each field.
"""
from __future__ import annotations

import json
import math
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from .gasmodel import DomainError, GasParams, InitialData, TorusGrid, make_gas

ROWS = ("eta", "etax", "W", "Z", "K", "Sigma", "A", "B", "g", "Iz", "Iw")
ETA, ETAX, W, Z, K, SIG, A, B, G, IZ, IW = range(len(ROWS))

FLOOR = 1e-6


class VacuumError(DomainError):
    pass


class SchemeFailure(RuntimeError):
    pass


class NoBlowupError(RuntimeError):
    pass


class CFLError(ValueError):
    def __init__(self, dt, dt_max):
        super().__init__(f"dt={dt:.3e} exceeds the transport limit; use dt <= {dt_max:.3e}")
        self.dt = dt
        self.suggested_dt = dt_max


@dataclass(frozen=True)
class CharState:
    t: float
    y: np.ndarray = field(repr=False)

    def __getattr__(self, name):
        try:
            return self.y[ROWS.index(name)]
        except ValueError:
            raise AttributeError(name) from None

    @property
    def n(self) -> int:
        return self.y.shape[1]

    def to_dict(self):
        return {name: self.y[i] for i, name in enumerate(ROWS)}


@dataclass
class LagrangianSystem:
    data: InitialData
    gas: GasParams
    grid: TorusGrid
    floor: float = FLOOR

    def __post_init__(self):
        if abs(self.gas.gamma - self.data.gamma) > 1e-14:
            raise DomainError("gas and initial data disagree on gamma")
        targets = self.data.perturbation.targets()
        # B and K-dot stay identically zero unless z or k is perturbed
        self.entropy_active = "k" in targets
        self.transport_active = bool(set(targets) & {"z", "k"})
        self._inv_d = 1.0 / (12.0 * self.grid.dxi * self.grid.jac)

    def ddx(self, f):
        """Fourth-order periodic central difference in the label variable."""
        return (8.0 * (np.roll(f, -1) - np.roll(f, 1))
                - (np.roll(f, -2) - np.roll(f, 2))) * self._inv_d

    def kdot(self, S, g):
        """``k_y`` along the characteristic via the back-label ``g``."""
        if not self.entropy_active:
            return np.zeros_like(S)
        a = self.gas.alpha
        return (S / self.data.sigma0(g)) ** (1.0 / a) * self.data.k0(g, 1)

    def cfl_dt(self, y, cfl: float) -> float:
        if not self.transport_active:
            return math.inf
        speed = 2.0 * self.gas.alpha * y[SIG] / np.maximum(y[ETAX], self.floor)
        return cfl * float(np.min(self.grid.jac / speed)) * self.grid.dxi


def make_system(data: InitialData, gas: GasParams | None = None, grid: TorusGrid | None = None,
                floor: float = FLOOR) -> LagrangianSystem:
    return LagrangianSystem(data, gas or make_gas(data.gamma), grid or data.grid, floor)


def init_state(data: InitialData, gas: GasParams | None = None,
               grid: TorusGrid | None = None) -> CharState:
    gas = gas or make_gas(data.gamma)
    grid = grid or data.grid
    x = grid.points
    s0 = data.sigma0(x)
    if np.min(s0) <= 0:
        raise VacuumError(f"initial sound speed reaches {np.min(s0):.3e}")
    corr = s0 * data.k0(x, 1) / (2.0 * gas.gamma)
    y = np.zeros((len(ROWS), x.size))
    y[ETA] = x
    y[ETAX] = 1.0
    y[W] = data.w0(x)
    y[Z] = data.z0(x)
    y[K] = data.k0(x)
    y[SIG] = s0
    y[A] = data.w0(x, 1) - corr
    y[B] = data.z0(x, 1) + corr
    y[G] = x
    return CharState(0.0, y)


@numba.njit(cache=True)
def _rhs_kernel(y, s0g, s0pg, k0pg, k0ppg, a, gm, floor, entropy, transport, inv_d, out):
    n = y.shape[1]
    h = 0.5 / gm
    inva = 1.0 / a
    # 1/alpha is an integer for the usual gases; integer powers are much cheaper
    ipow = int(round(inva))
    use_int = abs(inva - ipow) < 1e-12 and ipow <= 16
    ratio = np.empty(n)
    kc = np.zeros(n)
    zy = np.empty(n)
    for i in range(n):
        q = y[SIG, i] / s0g[i]
        ratio[i] = q**ipow if use_int else q**inva
        if entropy:
            kc[i] = ratio[i] * k0pg[i]
        zy[i] = y[B, i] - h * y[SIG, i] * kc[i]
    for i in range(n):
        etax = y[ETAX, i]
        S = y[SIG, i]
        Av = y[A, i]
        Bv = y[B, i]
        Kc = kc[i]
        Kt = a * S * Kc
        out[K, i] = Kt
        out[W, i] = a * h * S * S * Kc
        out[Z, i] = S * (2.0 * a * Bv - h * Kt)
        St = -S * (a * Bv - h * Kt)
        out[SIG, i] = St
        out[ETA, i] = 0.5 * (1.0 + a) * y[W, i] + 0.5 * (1.0 - a) * y[Z, i]
        etax_t = 0.5 * (1.0 + a) * Av + etax * (0.5 * (1.0 - a) * Bv + h * Kt)
        out[ETAX, i] = etax_t
        out[A, i] = 0.5 * h * Kt * (Av + etax * Bv)
        live = etax > floor
        if transport and live:
            ip1 = i + 1 if i + 1 < n else i + 1 - n
            ip2 = i + 2 if i + 2 < n else i + 2 - n
            Kx = etax * Kc
            Sx = 0.5 * (Av - etax * Bv) + h * S * Kx
            Bx = (8.0 * (zy[ip1] - zy[i - 1]) - (zy[ip2] - zy[i - 2])) * inv_d[i]
            if entropy:
                gx = etax * ratio[i]
                Kcx = ratio[i] * (inva * (Sx / S - s0pg[i] * gx / s0g[i]) * k0pg[i]
                                  + k0ppg[i] * gx)
                Bx += h * (Sx * Kc + S * Kcx)
            Mt = 2.0 * a * (Sx * Bv + S * Bx) + h * (St * Kx - Sx * Kt)
            out[B, i] = (Mt - etax_t * Bv) / etax
        else:
            out[B, i] = 0.0
        out[G, i] = a * S * ratio[i]
        out[IZ, i] = zy[i]
        out[IW, i] = (Av / etax if live else 0.0) + h * S * Kc
    return out


def _g_fields(y, sys):
    g = y[G]
    d = sys.data
    s0g = d.sigma0(g)
    if sys.entropy_active:
        return s0g, d.sigma0(g, 1), d.k0(g, 1), d.k0(g, 2)
    return s0g, s0g, s0g, s0g


def rhs(y: np.ndarray, sys: LagrangianSystem) -> np.ndarray:
    """Time derivative of the packed state array (compiled kernel)."""
    s0g, s0pg, k0pg, k0ppg = _g_fields(y, sys)
    out = np.empty_like(y)
    return _rhs_kernel(y, s0g, s0pg, k0pg, k0ppg, sys.gas.alpha, sys.gas.gamma, sys.floor,
                       sys.entropy_active, sys.transport_active, sys._inv_d, out)


def rhs_reference(y: np.ndarray, sys: LagrangianSystem) -> np.ndarray:
    """Plain numpy time derivative of the packed state array."""
    a, gm = sys.gas.alpha, sys.gas.gamma
    etax, Wv, Zv, S, Av, Bv = y[ETAX], y[W], y[Z], y[SIG], y[A], y[B]
    h = 0.5 / gm
    s0g, s0pg, k0pg, k0ppg = _g_fields(y, sys)
    ratio = (S / s0g) ** (1.0 / a)
    Kc = ratio * k0pg if sys.entropy_active else np.zeros_like(S)
    Kt = a * S * Kc

    out = np.empty_like(y)
    out[K] = Kt
    out[W] = a * h * S * S * Kc
    out[Z] = S * (2.0 * a * Bv - h * Kt)
    St = -S * (a * Bv - h * Kt)
    out[SIG] = St
    out[ETA] = 0.5 * (1.0 + a) * Wv + 0.5 * (1.0 - a) * Zv
    etax_t = 0.5 * (1.0 + a) * Av + etax * (0.5 * (1.0 - a) * Bv + h * Kt)
    out[ETAX] = etax_t
    out[A] = 0.5 * h * Kt * (Av + etax * Bv)
    zy = Bv - h * S * Kc
    live = etax > sys.floor
    if sys.transport_active:
        Kx = etax * Kc
        Sx = 0.5 * (Av - etax * Bv) + h * S * Kx
        # Sigma and the K-dot term carry the cusp of w0 in x: only z_y is
        # differenced, the rest is differentiated in closed form
        Bx = sys.ddx(zy)
        if sys.entropy_active:
            gx = etax * ratio
            Kcx = ratio * ((Sx / S - s0pg * gx / s0g) * k0pg / a + k0ppg * gx)
            Bx = Bx + h * (Sx * Kc + S * Kcx)
        Mt = 2.0 * a * (Sx * Bv + S * Bx) + h * (St * Kx - Sx * Kt)
        out[B] = np.where(live, (Mt - etax_t * Bv) / np.where(live, etax, 1.0), 0.0)
    else:
        out[B] = 0.0
    out[G] = a * S * ratio
    out[IZ] = zy
    out[IW] = np.where(live, Av / np.where(live, etax, 1.0), 0.0) + h * S * Kc
    return out


@numba.njit(cache=True)
def _axpy(y, c, k):
    return y + c * k


@numba.njit(cache=True)
def _rk4_combine(y, dt, k1, k2, k3, k4):
    return y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)


def step(state: CharState, dt: float, sys: LagrangianSystem, cfl: float | None = 1.5) -> CharState:
    """One classical RK4 step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    y = state.y
    if cfl is not None:
        lim = sys.cfl_dt(y, cfl)
        if dt > lim * (1 + 1e-12):
            raise CFLError(dt, lim)
    k1 = rhs(y, sys)
    k2 = rhs(_axpy(y, 0.5 * dt, k1), sys)
    k3 = rhs(_axpy(y, 0.5 * dt, k2), sys)
    k4 = rhs(_axpy(y, dt, k3), sys)
    yn = _rk4_combine(y, dt, k1, k2, k3, k4)
    if not np.all(np.isfinite(yn)):
        raise SchemeFailure(f"non-finite values after step at t={state.t:.6g}")
    if np.min(yn[SIG]) <= 0:
        raise VacuumError(f"sound speed lost positivity at t={state.t + dt:.6g}")
    return CharState(state.t + dt, yn)


def advance_to(state: CharState, t_end: float, sys: LagrangianSystem, cfl: float = 1.5,
               frac: float = 0.05) -> CharState:
    """Step from ``state`` to exactly ``t_end`` with the run's step rule."""
    while state.t < t_end - 1e-15:
        dt = min(_step_size(state.y, sys, cfl, frac), t_end - state.t)
        state = step(state, dt, sys, cfl=None)
    return state


# {{{ monitors

@dataclass
class MonitorLog:
    """Counts of violated pointwise inequalities over accepted steps."""

    tol: float = 1e-6
    steps: int = 0
    violations: dict = field(default_factory=lambda: {
        "riemann": 0, "etax_upper": 0, "qw": 0, "etax_outer": 0})
    worst: dict = field(default_factory=lambda: {
        "riemann": 0.0, "etax_upper": -math.inf, "qw": -math.inf, "etax_outer": math.inf})

    def record(self, y, sys: LagrangianSystem, outer_mask):
        a = sys.gas.alpha
        self.steps += 1
        r = float(np.max(np.abs(y[W] - y[Z] - 2.0 * y[SIG])))
        up = float(np.max(y[ETAX]) - (3.0 + a))
        live = y[ETAX] > 10.0 * sys.floor
        qw = float(np.max((y[A] - (-0.5 + 4.0 * y[ETAX]))[live])) if np.any(live) else -math.inf
        outer = float(np.min(y[ETAX][outer_mask]))
        self.worst["riemann"] = max(self.worst["riemann"], r)
        self.worst["etax_upper"] = max(self.worst["etax_upper"], up)
        self.worst["qw"] = max(self.worst["qw"], qw)
        self.worst["etax_outer"] = min(self.worst["etax_outer"], outer)
        self.violations["riemann"] += r > 1e-8
        self.violations["etax_upper"] += up > self.tol
        self.violations["qw"] += qw > self.tol
        self.violations["etax_outer"] += not outer > 0.5

    @property
    def total(self) -> int:
        return sum(self.violations.values())

    def to_dict(self):
        return {"steps": self.steps, "violations": dict(self.violations), "worst": dict(self.worst)}

# }}}


# {{{ blow-up run

@dataclass
class BlowupReport:
    Tstar: float
    Tstar_ci: float
    xstar: float
    ystar: float
    istar: int
    etax_min: float
    steps: int
    wall_time: float
    history: np.ndarray = field(repr=False)
    terminal: CharState = field(repr=False)
    last: CharState = field(repr=False)
    snapshot: CharState | None = field(default=None, repr=False)
    monitors: MonitorLog = field(default_factory=MonitorLog)
    extrapolation: dict = field(default_factory=dict)
    flagged: bool = False

    def to_dict(self):
        return {"Tstar": self.Tstar, "Tstar_ci": self.Tstar_ci, "xstar": self.xstar,
                "ystar": self.ystar, "etax_min": self.etax_min, "steps": self.steps,
                "wall_time": self.wall_time, "flagged": self.flagged,
                "extrapolation": self.extrapolation, "monitors": self.monitors.to_dict()}

    def to_json(self) -> str:
        from .io import to_jsonable
        return json.dumps(to_jsonable(self.to_dict()), indent=2, sort_keys=True)


def _step_size(y, sys, cfl, frac, dt_max=0.02):
    i = int(np.argmin(y[ETAX]))
    m = y[ETAX, i]
    a = sys.gas.alpha
    rate = abs(0.5 * (1.0 + a) * y[A, i]) + 1e-300
    dt = min(dt_max, frac * m / rate)
    return min(dt, sys.cfl_dt(y, cfl))


def _fit_tstar(hist, deg=2):
    """Root of a polynomial fit of min eta_x against t over the last decade."""
    t, m = hist[:, 0], hist[:, 1]
    sel = m <= 10.0 * m[-1]
    if sel.sum() < deg + 2:
        sel = np.zeros_like(sel)
        sel[-(deg + 2):] = True
    ts, ms = t[sel], m[sel]
    t0 = ts[-1]
    c = np.polyfit(ts - t0, ms, deg)
    roots = np.roots(c)
    roots = roots[np.isreal(roots)].real
    roots = roots[roots > -1e-12]
    if roots.size == 0:
        # fall back to the linear slope through the last two points
        slope = (m[-1] - m[-2]) / (t[-1] - t[-2])
        return float(t0 - m[-1] / slope)
    return float(t0 + roots.min())


def _extrapolate(states, T):
    """Cubic-in-time extrapolation of the last saved states to ``T``."""
    ts = np.array([s.t for s in states])
    ys = np.stack([s.y for s in states])
    out = np.zeros_like(ys[0])
    for j in range(len(ts)):
        lj = 1.0
        for k in range(len(ts)):
            if k != j:
                lj *= (T - ts[k]) / (ts[j] - ts[k])
        out += lj * ys[j]
    return CharState(T, out)


def _refine_label(grid, etax, i, beta):
    """Sub-grid minimiser of eta_x from the model m + c|x - x0|**(1/beta)."""
    n = grid.n
    idx = (i + np.arange(-4, 5)) % n
    x = grid.points[i] + np.unwrap(grid.points[idx] - grid.points[i], period=2 * math.pi)
    f = etax[idx]
    e = 1.0 / beta
    span = (x[3], x[5])

    def resid(x0):
        M = np.column_stack([np.ones_like(x), np.abs(x - x0) ** e])
        coef, *_ = np.linalg.lstsq(M, f, rcond=None)
        return float(np.sum((M @ coef - f) ** 2))

    res = minimize_scalar(resid, bounds=span, method="bounded", options={"xatol": 1e-14})
    x0 = float(res.x)
    return x0 if resid(x0) <= resid(x[4]) else float(x[4])


def run_to_blowup(state: CharState, sys: LagrangianSystem, tol_etax: float = 1e-4,
                  cfl: float = 1.5, frac: float = 0.05, snapshot_lead: float | None = None,
                  callback=None, max_steps: int = 2_000_000) -> BlowupReport:
    """Integrate until ``min eta_x <= tol_etax`` and extrapolate to the singular time."""
    if not 0 < tol_etax < 0.1:
        raise DomainError("tol_etax must lie in (0, 0.1)")
    a = sys.gas.alpha
    t_limit = 4.0 / (1.0 + a)
    x = sys.grid.points
    outer = (np.abs(x) >= 1.0) & (np.abs(x) <= math.pi)
    mon = MonitorLog()
    mon.record(state.y, sys, outer)
    tail = deque([state], maxlen=4)
    hist = [(state.t, float(np.min(state.y[ETAX])), int(np.argmin(state.y[ETAX])))]
    snap = None
    wall = time.perf_counter()
    nsteps = 0
    while hist[-1][1] > tol_etax:
        if state.t > t_limit:
            raise NoBlowupError(f"min eta_x = {hist[-1][1]:.3e} at t = {state.t:.4g}")
        if nsteps >= max_steps:
            raise SchemeFailure("step budget exhausted")
        dt = _step_size(state.y, sys, cfl, frac)
        state = step(state, dt, sys, cfl=None)
        nsteps += 1
        mon.record(state.y, sys, outer)
        i = int(np.argmin(state.y[ETAX]))
        hist.append((state.t, float(state.y[ETAX, i]), i))
        tail.append(state)
        if callback is not None:
            callback(state)
        if snapshot_lead is not None and snap is None:
            rate = abs(0.5 * (1.0 + a) * state.y[A, i])
            if state.y[ETAX, i] / max(rate, 1e-300) <= 2.0 * snapshot_lead:
                snap = tail[-2] if len(tail) > 1 else state
    wall = time.perf_counter() - wall

    H = np.array(hist)
    T2 = _fit_tstar(H[:, :2], 2)
    T1 = _fit_tstar(H[:, :2], 1)
    terminal = _extrapolate(list(tail), T2)
    i = int(H[-1, 2])
    beta = sys.data.beta
    xs = _refine_label(sys.grid, terminal.y[ETAX], i, beta)
    # eta is C^1 in the label, so a local cubic is accurate for y_*
    idx = (i + np.arange(-2, 3)) % sys.grid.n
    xl = x[i] + np.unwrap(x[idx] - x[i], period=2 * math.pi)
    etal = terminal.y[ETA, idx] + (xl - x[idx])
    ystar = float(np.polyval(np.polyfit(xl - x[i], etal, 4), xs - x[i]))
    if snap is not None and snapshot_lead is not None and snap.t < T2 - snapshot_lead:
        snap = advance_to(snap, T2 - snapshot_lead, sys, cfl, frac)
    meta = {"fit": "quadratic", "T_linear": T1, "t_last": float(H[-1, 0]),
            "npoints": int(np.sum(H[:, 1] <= 10 * H[-1, 1])), "cfl": cfl, "frac": frac,
            "dt_last": float(H[-1, 0] - H[-2, 0]) if len(H) > 1 else 0.0}
    return BlowupReport(T2, abs(T2 - T1), xs, ystar, i, float(H[-1, 1]), nsteps, wall, H,
                        terminal, state, snap, mon, meta)


def richardson_check(data: InitialData, report: BlowupReport, tol_etax=1e-4, cfl=1.5,
                     frac=0.05, threshold=0.01) -> BlowupReport:
    """Rerun with halved step controls; widen the interval and flag a >1% disagreement."""
    sys = make_system(data)
    rerun = run_to_blowup(init_state(data), sys, tol_etax, 0.5 * cfl, 0.5 * frac)
    diff = abs(rerun.Tstar - report.Tstar)
    report.Tstar_ci = max(report.Tstar_ci, diff)
    report.extrapolation["richardson_T"] = rerun.Tstar
    report.flagged = report.flagged or diff > threshold * abs(report.Tstar)
    return report

# }}}


# {{{ Eulerian view and identities

def eulerian_snapshot(state: CharState, y=None, npts: int | None = None):
    """Monotone-cubic interpolation of (w, z, k, sigma) on an Eulerian grid."""
    eta = state.y[ETA]
    if np.any(np.diff(eta) < 0):
        raise DomainError("flow map is not monotone; Eulerian fields are multivalued")
    n = eta.size
    pad = 4
    two_pi = 2.0 * math.pi
    ex = np.concatenate([eta[-pad:] - two_pi, eta, eta[:pad] + two_pi])
    keep = np.concatenate([[True], np.diff(ex) > 0])
    if y is None:
        m = npts or n
        y = eta[0] + two_pi * np.arange(m) / m
    y = np.asarray(y, dtype=float)
    out = {"y": y}
    for name, row in (("w", W), ("z", Z), ("k", K), ("sigma", SIG)):
        v = state.y[row]
        ev = np.concatenate([v[-pad:], v, v[:pad]])
        yy = eta[0] + np.mod(y - eta[0], two_pi)
        out[name] = PchipInterpolator(ex[keep], ev[keep])(yy)
    return out


def identity_residuals(state: CharState, sys: LagrangianSystem, tol: float = 1e-4):
    a = sys.gas.alpha
    x = sys.grid.points
    s0 = sys.data.sigma0(x)
    y = state.y
    sig_res = float(np.max(np.abs(y[SIG] - s0 * np.exp(-a * y[IZ]))))
    riem = float(np.max(np.abs(y[W] - y[Z] - 2.0 * y[SIG])))
    mask = y[ETAX] > 10.0 * tol
    pred = (s0 / y[SIG]) ** ((1.0 - a) / (2.0 * a)) * np.exp(0.5 * (1.0 + a) * y[IW])
    etax_res = float(np.max(np.abs(y[ETAX] - pred)[mask])) if np.any(mask) else math.nan
    return {"sigma": sig_res, "riemann": riem, "etax": etax_res}

# }}}


# {{{ checkpoints

def save_checkpoint(path, state: CharState, data: InitialData, scheme: dict):
    path = Path(path)
    from .io import write_csv, write_json
    write_csv(path.with_suffix(".csv"), {name: state.y[i] for i, name in enumerate(ROWS)})
    header = {"t": state.t, "n": state.n, "gamma": data.gamma, "beta": data.beta,
              "eps": data.eps, "scheme": dict(scheme)}
    write_json(path.with_suffix(".json"), header)
    return path


def load_checkpoint(path):
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    arr = np.loadtxt(path.with_suffix(".csv"), delimiter=",", skiprows=1, ndmin=2)
    return CharState(float(header["t"]), np.ascontiguousarray(arr.T)), header

# }}}


# {{{ smooth manufactured case for order verification

@dataclass(frozen=True)
class SmoothData:
    """Trigonometric data with the InitialData interface used by the solver."""

    gamma: float
    grid: TorusGrid
    amp_w: float = 0.5
    amp_zk: float = 1e-2
    beta: float = 1.0
    eps: float = 0.0

    @property
    def perturbation(self):
        from .gasmodel import PerturbSpec
        return PerturbSpec("sine", self.amp_zk, 1, fields="zk")

    def w0(self, x, order=0):
        x = np.asarray(x, dtype=float)
        v = self.amp_w * (np.sin, np.cos, lambda t: -np.sin(t))[order](x)
        return v + 1.0 if order == 0 else v

    def z0(self, x, order=0):
        x = np.asarray(x, dtype=float)
        m, ph = 2.0, 0.3
        return self.amp_zk * m**order * (np.sin, np.cos, lambda t: -np.sin(t))[order](m * x + ph)

    def k0(self, x, order=0):
        x = np.asarray(x, dtype=float)
        return self.amp_zk * (np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t))[order](x)

    def sigma0(self, x, order=0):
        return 0.5 * (self.w0(x, order) - self.z0(x, order))


def smooth_order_study(gamma: float = 3.0, ns=(256, 512, 1024, 2048), t_end: float = 0.5,
                       cfl: float = 1.0):
    """Observed spatial order of the transport discretisation on smooth data.

    All levels share the time step of the finest grid, so differences between
    levels isolate the spatial error; compared on the coarsest grid points.
    """
    from .gasmodel import make_grid

    gas = make_gas(gamma)
    finest = make_grid(ns[-1])
    sys_f = make_system(SmoothData(gamma, finest), gas, finest)
    y0 = init_state(sys_f.data, gas, finest)
    dt = 0.5 * sys_f.cfl_dt(y0.y, cfl)
    nsteps = int(math.ceil(t_end / dt))
    dt = t_end / nsteps
    finals = []
    for n in ns:
        grid = make_grid(n)
        sysm = make_system(SmoothData(gamma, grid), gas, grid)
        st = init_state(sysm.data, gas, grid)
        for _ in range(nsteps):
            st = step(st, dt, sysm, cfl=None)
        stride = n // ns[0]
        finals.append(st.y[:, ::stride])
    diffs = [float(np.max(np.abs(finals[i][B] - finals[i + 1][B]))) for i in range(len(ns) - 1)]
    orders = [math.log2(diffs[i] / diffs[i + 1]) for i in range(len(diffs) - 1)]
    return {"n": list(ns), "diff": diffs, "order": orders, "dt": dt, "steps": nsteps}

# }}}
