"""Experiment runner: configuration, orchestration and report emission.

Exit status: 0 all checks pass, 2 some verdict failed, 3 numerical failure,
4 configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import burgers, charsolver, diagnostics, profilefit
from .gasmodel import DomainError, PerturbSpec, PerturbationRejected, build_initial_data, make_gas
from .io import to_jsonable, write_csv, write_json, write_rows

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_VERDICT, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4
MODES = ("burgers-exact", "euler-run", "codim", "similarity", "convergence", "sweep")


class ConfigError(ValueError):
    pass


NUMERIC_ERRORS = (charsolver.SchemeFailure, charsolver.NoBlowupError, charsolver.VacuumError,
                  profilefit.ResolutionError, burgers.NonMonotoneFlowError,
                  FloatingPointError, np.linalg.LinAlgError)


# {{{ configuration

@dataclass
class ExperimentConfig:
    mode: str = "euler-run"
    gamma: float = 3.0
    beta: float = 1.0
    eps: float = 0.0
    C: float | None = None
    perturbation: dict | None = None
    n: int = 4096
    grading: float | None = None
    cfl: float = 1.5
    tol_etax: float = 1e-4
    floor: float = 1e-6
    frac: float = 0.05
    richardson: bool = False
    margin: float = 0.0
    p_list: list = field(default_factory=lambda: [2, 4, 8])
    energy_stride: int = 10
    C_budget: float = 100.0
    holder_lead: float = 0.01
    tol_nu: float = 0.02
    tol_a: float = 0.05
    tol_y: float = 1e-4
    tol_T: float = 0.002
    tol_T_eps: float = 0.05
    r_in: float | None = None
    r_out: float | None = None
    E_terms: list = field(default_factory=list)
    R: float = 10.0
    xmax: float = 1e6
    levels: int = 3
    axis: str | None = None
    values: list = field(default_factory=list)
    seed: int = 0
    out: str = "out"

    def to_dict(self):
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_NUMERIC = {"gamma", "beta", "eps", "C", "cfl", "tol_etax", "floor", "frac", "margin",
            "C_budget", "holder_lead", "tol_nu", "tol_a", "tol_y", "tol_T", "tol_T_eps",
            "r_in", "r_out", "R", "xmax", "grading"}


def _load_text(text: str) -> dict:
    text = text.strip()
    if not text:
        return {}
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        try:
            obj = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"configuration is neither JSON nor TOML: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError("configuration must be a table/object")
    return obj


def _flatten(raw: dict) -> dict:
    """Accept TOML tables [solver], [diagnostics], [fit], [output] as namespaces."""
    flat = {}
    for k, v in raw.items():
        if k in ("solver", "diagnostics", "fit", "output") and isinstance(v, dict):
            for kk, vv in v.items():
                flat[kk] = vv
        else:
            flat[k] = v
    return flat


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(f"{key}: {msg}")

    need(cfg.mode in MODES, "mode", f"must be one of {', '.join(MODES)}")
    need(cfg.gamma > 1, "gamma", "must exceed 1")
    need(cfg.beta > 0, "beta", "must be positive")
    need(cfg.eps >= 0, "eps", "must be nonnegative")
    need(cfg.C is None or cfg.C > 0, "C", "must be positive")
    need(isinstance(cfg.n, int) and cfg.n >= 16 and cfg.n % 2 == 0, "n",
         "must be an even integer >= 16")
    need(0 < cfg.tol_etax < 0.1, "tol_etax", "must lie in (0, 0.1)")
    need(0 < cfg.cfl <= 2.0, "cfl", "must lie in (0, 2]")
    need(all(p > 1 for p in cfg.p_list), "p_list", "exponents must exceed 1")
    if cfg.mode == "euler-run":
        need(cfg.beta >= 1, "beta", "euler-run requires beta >= 1")
    if cfg.mode == "codim":
        need(cfg.beta < 1, "beta", "codim mode requires beta < 1")
    if cfg.mode == "burgers-exact":
        need(isinstance(cfg.E_terms, list), "E_terms", "must be a list of terms")
    if cfg.mode == "convergence":
        need(cfg.n >= 256 and (cfg.n & (cfg.n - 1)) == 0, "n",
             "convergence mode needs a power of two >= 256")
        need(cfg.levels >= 3, "levels", "convergence mode needs at least 3 levels")
        need(cfg.beta >= 1, "beta", "convergence mode runs the Euler solver (beta >= 1)")
    if cfg.mode == "sweep":
        need(cfg.axis in ("gamma", "beta", "eps"), "axis", "must be gamma, beta or eps")
        need(len(cfg.values) > 0, "values", "sweep needs at least one value")
    if cfg.perturbation is not None:
        try:
            PerturbSpec.from_dict(cfg.perturbation)
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(f"perturbation: {exc}") from None
    return cfg


def parse_config(text: str = "", overrides: dict | None = None) -> ExperimentConfig:
    raw = _flatten(_load_text(text))
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    for key in raw:
        if key not in _FIELDS:
            raise ConfigError(f"unknown configuration key {key!r}")
    vals = {}
    for key, v in raw.items():
        if key in _NUMERIC and v is not None:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{key}: expected a number, got {v!r}")
            v = float(v)
        elif key in ("n", "levels", "energy_stride", "seed"):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{key}: expected an integer, got {v!r}")
        elif key == "mode" and not isinstance(v, str):
            raise ConfigError("mode: expected a string")
        vals[key] = v
    return validate(ExperimentConfig(**vals))

# }}}


# {{{ reports

@dataclass
class RunReport:
    config: dict
    mode: str
    verdicts: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    monitors: dict = field(default_factory=dict)
    wall_time: float = 0.0
    steps: int = 0
    error: str | None = None
    exit_code: int = EXIT_OK

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.verdicts.values())

    def finalize(self):
        if self.error is None:
            self.exit_code = EXIT_OK if all(self.verdicts.values()) else EXIT_VERDICT
        return self

    def to_dict(self):
        return to_jsonable(dataclasses.asdict(self))


def _build_data(cfg: ExperimentConfig, n=None, gamma=None, beta=None, eps=None):
    gamma = cfg.gamma if gamma is None else gamma
    beta = cfg.beta if beta is None else beta
    eps = cfg.eps if eps is None else eps
    if cfg.perturbation is not None:
        pert = PerturbSpec.from_dict(cfg.perturbation)
    elif eps > 0:
        pert = PerturbSpec("sine", eps / 10.0, 3)
    else:
        pert = PerturbSpec()
    gas = make_gas(gamma)
    data = build_initial_data(beta, eps, gas, pert, n=n or cfg.n, grading=cfg.grading, C=cfg.C,
                              margin=cfg.margin)
    return data, gas

# }}}


# {{{ modes

def _euler(cfg: ExperimentConfig, out: Path | None, rep: RunReport, **kw):
    data, gas = _build_data(cfg, **kw)
    sysm = charsolver.make_system(data, gas, floor=cfg.floor)
    state0 = charsolver.init_state(data, gas)
    energy = diagnostics.EnergyMonitor(sysm, tuple(cfg.p_list), cfg.energy_stride)
    blow = charsolver.run_to_blowup(state0, sysm, cfg.tol_etax, cfg.cfl, cfg.frac,
                                    snapshot_lead=cfg.holder_lead, callback=energy)
    if cfg.richardson:
        charsolver.richardson_check(data, blow, cfg.tol_etax, cfg.cfl, cfg.frac)
    samples = profilefit.extract_profile(blow, data.grid)
    fit = profilefit.fit_cusp(samples, data.beta, r_out=cfg.r_out, r_in=cfg.r_in)
    cmp = profilefit.compare_theorem(fit, data, cfg.tol_nu, cfg.tol_a, cfg.tol_y, cfg.C_budget)
    T_pred = 2.0 / (1.0 + gas.alpha)
    v = rep.verdicts
    if data.eps == 0:
        v["Tstar"] = abs(blow.Tstar - T_pred) <= cfg.tol_T * T_pred
    else:
        v["Tstar"] = abs(blow.Tstar - T_pred) <= cfg.tol_T_eps
    v["not_flagged"] = not blow.flagged
    v["monitors"] = blow.monitors.total == 0
    for k in ("nu", "a1", "a2", "ystar"):
        v[f"fit_{k}"] = cmp[k]["pass"]
    ident = charsolver.identity_residuals(blow.last, sysm, cfg.tol_etax)
    v["identities"] = ident["sigma"] <= 1e-8 and ident["riemann"] <= 1e-8
    checks = [diagnostics.energy_bound_check(tr, data, cfg.C_budget)
              for tr in energy.traces.values()]
    if data.eps == 0:
        v["energy"] = all(c["sup_root"] ** c["p"] <= 1e-12 for c in checks)
    else:
        v["energy"] = all(c["pass"] for c in checks)
    holder = []
    if blow.snapshot is not None:
        holder = diagnostics.holder_suite(blow.snapshot, sysm, cfg.C_budget, seed=cfg.seed)
        v["holder"] = all(h.passed for h in holder)
    else:
        v["holder"] = False
    rep.steps += blow.steps
    rep.monitors = blow.monitors.to_dict()
    rep.results.update({
        "blowup": blow.to_dict(), "Tstar_predicted": T_pred, "fit": fit.to_dict(),
        "theorem": cmp, "energy": checks, "holder": [h.to_dict() for h in holder],
        "identities": ident, "norms": data.norms,
        "snapshot_t": None if blow.snapshot is None else blow.snapshot.t,
    })
    if out is not None:
        write_csv(out / "etax_min.csv", {"t": blow.history[:, 0], "etax_min": blow.history[:, 1]})
        profilefit.write_fit(out / "cusp", fit, samples)
        for p, tr in energy.traces.items():
            write_csv(out / f"energy_p{p}.csv", tr.columns())
        if holder:
            write_rows(out / "holder.csv", [h.to_dict() for h in holder])
        charsolver.save_checkpoint(out / "terminal", blow.terminal, data,
                                   {"dt_last": blow.extrapolation["dt_last"], "cfl": cfg.cfl})
        (out / "initial_data.json").write_text(data.to_json() + "\n")
    return blow, fit


def _burgers(cfg: ExperimentConfig, out: Path | None, rep: RunReport):
    C = cfg.C if cfg.C is not None else cfg.beta / (cfg.beta + 1.0)
    terms = []
    for t in cfg.E_terms:
        t = dict(t)
        kind = t.pop("kind", None)
        if kind is None:
            raise ConfigError("E_terms: every term needs a kind")
        terms.append(burgers.Term(kind, t))
    E = burgers.LinePerturbation(tuple(terms))
    r = burgers.stable_profile_check(cfg.beta, C, E, R=cfg.R)
    v = rep.verdicts
    for k, ok in r.hypotheses.items():
        v[f"hypothesis[{k}]"] = bool(ok)
    if r.hypotheses_ok:
        T = 1.0 / (1.0 - r.dE0)
        v["Tstar"] = abs(r.Tstar - T) <= 1e-10
        v["ystar"] = abs(r.ystar - r.E0 * T) <= 1e-8
        v["b_inside"] = bool(np.all(r.inside))
    rep.results.update({"Tstar": r.Tstar, "ystar": r.ystar, "E0": r.E0, "dE0": r.dE0,
                        "seminorm": r.seminorm, "b_lower": r.lower, "b_upper": r.upper,
                        "failed_hypotheses": r.failures()})
    if out is not None and r.y.size:
        d = burgers.key_example(cfg.beta, C, E, bounds=(-cfg.R, cfg.R))
        blow = burgers.blowup(d)
        xl = burgers.invert_flow(d, r.y, blow.Tstar, blow.xstar, blow.ystar)
        write_csv(out / "burgers_profile.csv",
                  {"y": r.y, "w": d.w0(xl), "b_y": r.b, "x_label": xl})


def _codim(cfg: ExperimentConfig, out: Path | None, rep: RunReport):
    C = cfg.C if cfg.C is not None else cfg.beta / (cfg.beta + 1.0)
    r = burgers.codim_experiment(cfg.beta, C, cfg.eps, R=cfg.R)
    target = 1.0 / 3.0 if cfg.eps else cfg.beta / (cfg.beta + 1.0)
    rep.verdicts["exponent"] = abs(r.exponent - target) <= 0.02
    rep.verdicts["xstar"] = r.xstar_relerr <= 0.01 if cfg.eps else abs(r.xstar) <= 1e-12
    rep.results.update(to_jsonable(dataclasses.asdict(r)))
    rep.results["exponent_target"] = target
    if out is not None:
        write_json(out / "codim.json", rep.results)


def _similarity(cfg: ExperimentConfig, out: Path | None, rep: RunReport):
    C = cfg.C if cfg.C is not None else 1.0
    sp = burgers.similarity_profile(cfg.beta, C)
    x = np.linspace(-50.0, 50.0, 1000)
    res = float(np.max(np.abs(sp.residual(x))))
    a = burgers.similarity_asymptotics_check(sp, cfg.xmax)
    bound = 10.0 * C**2 * (1.0 + 1.0 / cfg.beta)
    rep.verdicts["residual"] = res < 1e-10
    rep.verdicts["asymptotic_ratio"] = bool(np.all(np.abs(a["ratio"][[0, -1]] - 1.0) <= 0.01))
    rep.verdicts["near_zero"] = bool(np.all(a["near_scaled"] <= bound))
    rep.results.update({"residual_max": res, "ratio_at_xmax": a["ratio"][[0, -1]],
                        "near_scaled_max": float(np.max(a["near_scaled"])), "near_bound": bound})
    if out is not None:
        write_csv(out / "similarity.csv", {k: a[k] for k in ("x", "W", "W_x", "ratio")})
        write_csv(out / "similarity_near.csv",
                  {"x": a["x_near"], "error": a["near_error"], "scaled": a["near_scaled"]})


def convergence_study(cfg: ExperimentConfig, levels: int | None = None, out: Path | None = None):
    """Runs at n, 2n, 4n, ... and observed orders for T_*, y_*, a1 and nu."""
    levels = levels or cfg.levels
    gas = make_gas(cfg.gamma)
    oracle = cfg.eps == 0
    nu_t = cfg.beta / (cfg.beta + 1.0)
    exact = {"Tstar": 2.0 / (1.0 + gas.alpha), "ystar": 1.0,
             "a1": (1.0 + 1.0 / cfg.beta) ** nu_t, "nu": nu_t}
    rows = []
    for j in range(levels):
        n = cfg.n * 2**j
        rep = RunReport(cfg.to_dict(), "euler-run")
        blow, fit = _euler(cfg, None, rep, n=n)
        rows.append({"n": n, "Tstar": blow.Tstar, "ystar": blow.ystar, "a1": fit.a1, "nu": fit.nu,
                     "steps": blow.steps})
    table = []
    flags = {}
    for key in ("Tstar", "ystar", "a1", "nu"):
        vals = np.array([r[key] for r in rows])
        if oracle:
            err = np.abs(vals - exact[key])
        else:
            err = np.abs(np.diff(vals))
        with np.errstate(divide="ignore", invalid="ignore"):
            orders = np.log2(err[:-1] / err[1:])
        floor = 1e-12 * max(1.0, abs(vals[-1]))
        at_roundoff = bool(np.all(err <= floor))
        monotone = bool(np.all(np.diff(err) <= floor))
        flags[key] = {"monotone": monotone, "at_roundoff": at_roundoff}
        for i, e in enumerate(err):
            table.append({"quantity": key, "level": i, "error": float(e),
                          "order": float(orders[i - 1]) if i >= 1 and i - 1 < orders.size
                          else math.nan})
    nu_spread = float(np.ptp([r["nu"] for r in rows]))
    smooth = charsolver.smooth_order_study(cfg.gamma)
    if out is not None:
        write_rows(out / "convergence_runs.csv", rows)
        write_rows(out / "convergence_orders.csv", table)
        write_csv(out / "smooth_orders.csv", {"n": smooth["n"][1:], "diff": smooth["diff"],
                                              "order": [math.nan] + smooth["order"]})
    return {"runs": rows, "orders": table, "flags": flags, "nu_spread": nu_spread,
            "reference": "exact" if oracle else "successive differences",
            "smooth": smooth}


def _run_one(args):
    cfg_dict, axis, value, outdir = args
    cfg_dict = dict(cfg_dict)
    cfg_dict.update({"mode": "euler-run", "axis": None, "values": [], axis: value,
                     "out": outdir})
    cfg = ExperimentConfig(**cfg_dict)
    row = {axis: value}
    try:
        validate(cfg)
        rep = run(cfg, write=outdir is not None)
        res = rep.results
        row.update({
            "Tstar": res.get("blowup", {}).get("Tstar", math.nan),
            "Tstar_predicted": res.get("Tstar_predicted", math.nan),
            "ystar": res.get("blowup", {}).get("ystar", math.nan),
            "nu": res.get("fit", {}).get("nu", math.nan),
            "a1": res.get("fit", {}).get("a1", math.nan),
            "pass": rep.passed, "error": rep.error or "",
        })
    except Exception as exc:  # recorded per row; the sweep goes on
        row.update({"pass": False, "error": f"{type(exc).__name__}: {exc}"})
    return row


def sweep(cfg: ExperimentConfig, axis: str | None = None, values=None, out: Path | None = None):
    axis = axis or cfg.axis
    values = list(values if values is not None else cfg.values)
    if not values:
        raise ConfigError("values: sweep needs at least one value")
    workers = int(os.environ.get("PRESHOCK_THREADS", "0") or 0) or os.cpu_count() or 1
    workers = max(1, min(workers, len(values)))
    base = cfg.to_dict()
    jobs = [(base, axis, float(v), None if out is None else str(out / f"{axis}_{i}"))
            for i, v in enumerate(values)]
    if workers == 1:
        rows = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_run_one, jobs))
    if out is not None:
        write_rows(out / "sweep.csv", rows)
    return rows


def run(cfg: ExperimentConfig, write: bool = True) -> RunReport:
    rep = RunReport(cfg.to_dict(), cfg.mode)
    out = Path(cfg.out) if write else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        if cfg.mode == "euler-run":
            _euler(cfg, out, rep)
        elif cfg.mode == "burgers-exact":
            _burgers(cfg, out, rep)
        elif cfg.mode == "codim":
            _codim(cfg, out, rep)
        elif cfg.mode == "similarity":
            _similarity(cfg, out, rep)
        elif cfg.mode == "convergence":
            res = convergence_study(cfg, out=out)
            rep.results.update(res)
            rep.verdicts["nu_stable"] = res["nu_spread"] <= 0.01
            rep.verdicts["smooth_order"] = min(res["smooth"]["order"]) >= 3.5
        elif cfg.mode == "sweep":
            rows = sweep(cfg, out=out)
            rep.results["rows"] = rows
            for r in rows:
                rep.verdicts[f"{cfg.axis}={r[cfg.axis]}"] = bool(r["pass"])
    except NUMERIC_ERRORS as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
        rep.exit_code = EXIT_NUMERIC
    except PerturbationRejected as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
        rep.exit_code = EXIT_CONFIG
    rep.wall_time = time.perf_counter() - t0
    rep.finalize()
    if out is not None:
        write_json(out / "report.json", rep.to_dict())
    return rep

# }}}


# {{{ command line

def _parser():
    ap = argparse.ArgumentParser(prog="preshock", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run the mode named in the configuration"),
                        ("converge", "grid-refinement study"),
                        ("sweep", "parameter sweep over gamma, beta or eps"),
                        ("similarity", "self-similar profile tables"),
                        ("burgers", "exact Burgers stability check")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path)
        p.add_argument("--out", type=str)
        p.add_argument("--n", type=int)
        p.add_argument("--gamma", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--eps", type=float)
        if name == "sweep":
            p.add_argument("--axis", choices=("gamma", "beta", "eps"))
            p.add_argument("--values", type=float, nargs="+")
    return ap


_FORCED = {"converge": "convergence", "sweep": "sweep", "similarity": "similarity",
           "burgers": "burgers-exact"}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config else ""
        overrides = {k: getattr(args, k, None)
                     for k in ("out", "n", "gamma", "beta", "eps", "axis", "values")}
        if args.command in _FORCED:
            overrides["mode"] = _FORCED[args.command]
        cfg = parse_config(text, overrides)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rep = run(cfg)
    for name, ok in rep.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if rep.error:
        print(f"ERROR {rep.error}", file=sys.stderr)
    print(f"report written to {Path(cfg.out) / 'report.json'}")
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())

# }}}
