"""Config-driven runs: steady states, fridge sweeps, transients, engine and clock scans.

Every runner returns (columns, rows, summary). Rows are emitted in sweep
order whatever order the worker pool finishes them in.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import stochastic as st
from .config import RunConfig, grid_values, validate
from .dissipation import BathSpec, build_dissipators, decay_dissipator, local_dissipator
from .dynamics import (
    add_interaction_coherence,
    cold_temperature_series,
    evolve,
    internal_current,
    liouvillian,
    product_gibbs_state,
    qubit_temperature,
    steady_state,
)
from .linalg import partial_trace
from .models import build_clock, build_engine, build_three_body, build_three_level
from .thermo import carnot_cop, carnot_efficiency, cooling_window, split_virtual_temperatures, virtual_temperature

LAW_RTOL = 1e-10
LAW_ATOL = 1e-12


def _num(x):
    """JSON-safe number: non-finite values become strings."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _pool_map(fn, items, threads):
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _point_seed(seed, index):
    return int(np.random.SeedSequence(seed).spawn(index + 1)[index].generate_state(1)[0])


def bath_specs(cfg: RunConfig):
    """Bath specs from the config; omega_ref defaults to the configured omega_h."""
    ref = cfg.machine["omega_h"]
    return [BathSpec(b["label"], b["T"], b["kappa"], b.get("D", 1), b.get("omega_ref", ref)) for b in cfg.baths]


def build_machine(cfg: RunConfig, omega_c=None, omega_h=None):
    m = cfg.machine
    wc = m["omega_c"] if omega_c is None else omega_c
    wh = m["omega_h"] if omega_h is None else omega_h
    g = m.get("g", 0.0)
    kind = m["type"]
    if kind == "three_level":
        return build_three_level(wc, wh)
    if kind == "three_qubit":
        return build_three_body("qubit", wc, wh, g)
    if kind == "three_oscillator":
        return build_three_body(("oscillator", m.get("n_max", 2)), wc, wh, g)
    if kind == "engine":
        return build_engine(wc, wh, m["d"], g)
    if kind == "clock":
        return build_clock(wc, wh, m["d"], g, m.get("decay_rate", 1.0))
    raise ValueError(f"unknown machine type {kind!r}")


def _solve(machine, baths, model):
    diss = build_dissipators(machine, baths, model)
    energy = machine.h_free if model == "local" else machine.hamiltonian
    return steady_state(liouvillian(machine.hamiltonian, diss), energy), diss


def _law_flags(rep):
    return rep.first_law_ok(LAW_RTOL), rep.second_law_ok(LAW_ATOL)


# ---------------------------------------------------------------- steady


def run_steady(cfg: RunConfig) -> dict:
    kind = cfg.machine["type"]
    baths = bath_specs(cfg)
    temps = cfg.temperatures()
    model = cfg.model
    machine = build_machine(cfg)
    out = {"machine": kind, "model": model}
    if kind == "clock":
        clock = machine
        machine = clock.engine
        diss = build_dissipators(machine, baths, model) + [decay_dissipator(clock)]
        energy = machine.h_free if model == "local" else machine.hamiltonian
        rep = steady_state(liouvillian(machine.hamiltonian, diss), energy)
    else:
        rep, _ = _solve(machine, baths, model)
    first, second = _law_flags(rep)
    wc, wh = machine.frequencies["c"], machine.frequencies["h"]
    ww = wh - wc
    out.update(
        currents={k: _num(v) for k, v in rep.currents.items()},
        entropy_rate=_num(rep.entropy_rate),
        residual=_num(rep.residual),
        first_law_ok=first,
        second_law_ok=second,
    )
    bh, bc = 1.0 / temps["h"], 1.0 / temps["c"]
    if kind in ("engine", "clock"):
        tv = virtual_temperature(wh, wc, bh, bc)
        out["virtual_temperature"] = _num(tv.value)
        out["energy_ratio"] = _num(st.engine_energy_ratio(wc, wh))
        out["carnot_efficiency"] = _num(carnot_efficiency(temps["c"], temps["h"]))
    else:
        bw = 1.0 / temps["w"]
        tv = virtual_temperature(wh, ww, bh, bw)
        out["virtual_temperature"] = _num(tv.value)
        jw = rep.currents["w"]
        out["cop"] = _num(rep.currents["c"] / jw) if jw != 0 else None
        if temps["c"] < temps["h"] <= temps["w"]:
            out["carnot_cop"] = _num(carnot_cop(temps["c"], temps["h"], temps["w"]))
        if machine.g > 0:
            plus, minus = split_virtual_temperatures(wc, ww, wh, machine.g, bh, bw)
            out["split_virtual_temperatures"] = [_num(plus.value), _num(minus.value)]
    if machine.topology in ("fridge", "engine"):
        out["internal_current"] = _num(internal_current(machine, rep.rho_ss))
    if machine.subsystem("c").kind == "qubit":
        red = partial_trace(rep.rho_ss, machine.dims, 0)
        out["cold_temperature"] = _num(qubit_temperature(red, wc).value)
    if kind == "three_level":
        out["cold_detached"] = _three_level_check(machine, baths, temps)
    out["law_checks_ok"] = bool(first and second)
    return out


def _three_level_check(machine, baths, temps):
    """Cold-transition population ratio with the cold bath removed vs exp(-beta_v omega_c)."""
    diss = [local_dissipator(machine, b.label, b) for b in baths if b.label != "c"]
    rep = steady_state(liouvillian(machine.hamiltonian, diss))
    p = np.real(np.diag(rep.rho_ss))
    wc, wh = machine.frequencies["c"], machine.frequencies["h"]
    tv = virtual_temperature(wh, wh - wc, 1.0 / temps["h"], 1.0 / temps["w"])
    expected = math.exp(-tv.beta * wc)
    ratio = p[1] / p[0]
    return {"ratio": _num(ratio), "expected": _num(expected), "ok": bool(abs(ratio - expected) <= 1e-8 * expected)}


# ---------------------------------------------------------------- fridge sweep

SWEEP_COLUMNS = ["omega_c", "J_c", "J_h", "J_w", "cop", "entropy_rate", "power_norm", "cooling"]


def _fridge_point(args):
    data, wc = args
    cfg = validate(data)
    ww = cfg.machine["omega_h"] - cfg.machine["omega_c"]
    machine = build_machine(cfg, wc, wc + ww)
    rep, _ = _solve(machine, bath_specs(cfg), cfg.model)
    j = rep.currents
    first, second = _law_flags(rep)
    return {
        "omega_c": wc,
        "J_c": j["c"],
        "J_h": j["h"],
        "J_w": j["w"],
        "cop": j["c"] / j["w"] if j["w"] != 0 else math.nan,
        "entropy_rate": rep.entropy_rate,
        "cooling": j["c"] > 0,
        "_laws": (first, second),
    }


def _normalize_power(values):
    vals = np.maximum(np.asarray(values, dtype=float), 0.0)
    top = vals.max(initial=0.0)
    return vals / top if top > 0 else vals


def run_fridge_sweep(cfg: RunConfig, threads=1):
    grid = grid_values(cfg.run["sweep"])
    rows = _pool_map(_fridge_point, [(cfg.data, wc) for wc in grid], threads)
    for r, p in zip(rows, _normalize_power([r["J_c"] for r in rows])):
        r["power_norm"] = float(p)
    temps = cfg.temperatures()
    ww = cfg.machine["omega_h"] - cfg.machine["omega_c"]
    dim = cfg.bath("c").get("D", 1)
    eps_c = cooling_window(temps["c"], temps["h"], temps["w"])
    cool = [r for r in rows if r["cooling"]]
    summary = {
        "mode": "sweep",
        "model": cfg.model,
        "omega_w": ww,
        "n_rows": len(rows),
        "n_cooling": len(cool),
        "carnot_cop": eps_c,
        "law_checks_ok": all(all(r["_laws"]) for r in rows),
        "first_law_ok": all(r["_laws"][0] for r in rows),
        "second_law_ok": all(r["_laws"][1] for r in rows),
        "min_entropy_rate": min(r["entropy_rate"] for r in rows),
    }
    if cool:
        best = max(cool, key=lambda r: r["J_c"])
        first, last = cool[0], cool[-1]
        summary.update(
            max_power_omega_c=best["omega_c"],
            eps_star=best["cop"],
            eps_star_over_carnot=best["cop"] / eps_c,
            bound_ratio=dim / (dim + 1.0),
            bound_value=dim / (dim + 1.0) * eps_c,
            max_cop=max(r["cop"] for r in cool),
            # the two ends of the cooling branch; a closed curve has vanishing power at both
            first_cooling_omega_c=first["omega_c"],
            first_cooling_cop=first["cop"],
            power_at_first_cooling=first["power_norm"],
            last_cooling_omega_c=last["omega_c"],
            last_cooling_cop=last["cop"],
            power_at_last_cooling=last["power_norm"],
            window_edge=_sign_change(rows, ww),
        )
    return SWEEP_COLUMNS, rows, summary


def _sign_change(rows, ww):
    """omega_c / omega_w where J_c first turns non-positive after cooling, linearly interpolated."""
    for a, b in zip(rows, rows[1:]):
        if a["J_c"] > 0 >= b["J_c"]:
            x0, x1 = a["omega_c"], b["omega_c"]
            y0, y1 = a["J_c"], b["J_c"]
            return (x0 - y0 * (x1 - x0) / (y1 - y0)) / ww
    return None


# ---------------------------------------------------------------- transient

TRANSIENT_COLUMNS = ["t", "T_eff", "p0", "p1"]


def first_minimum(values):
    """Index of the first interior local minimum, or None for a monotone series."""
    v = np.asarray(values, dtype=float)
    for k in range(1, len(v) - 1):
        if v[k] < v[k - 1] and v[k] <= v[k + 1]:
            return k
    return None


def run_transient(cfg: RunConfig):
    machine = build_machine(cfg)
    baths = bath_specs(cfg)
    temps = cfg.temperatures()
    diss = build_dissipators(machine, baths, cfg.model)
    lv = liouvillian(machine.hamiltonian, diss)
    energy = machine.h_free if cfg.model == "local" else machine.hamiltonian
    rho0 = product_gibbs_state(machine, temps)
    amp = cfg.run.get("coherence", 0.0)
    if amp:
        rho0 = add_interaction_coherence(machine, rho0, amp)
    times = np.array(grid_values(cfg.run["times"]))
    traj = evolve(rho0, lv, times)
    p0, p1, tvals = cold_temperature_series(machine, traj)
    t_eff = np.array([t.value for t in tvals])
    rep = steady_state(lv, energy)
    t_inf = qubit_temperature(partial_trace(rep.rho_ss, machine.dims, 0), machine.frequencies["c"]).value
    rows = [{"t": t, "T_eff": te, "p0": a, "p1": b} for t, te, a, b in zip(times, t_eff, p0, p1)]
    k = first_minimum(t_eff)
    first, second = _law_flags(rep)
    summary = {
        "mode": "transient",
        "coherence": amp,
        "T_eff_steady": _num(t_inf),
        "T_eff_min": _num(t_eff.min()),
        "t_min": _num(times[int(np.argmin(t_eff))]),
        "first_minimum": None if k is None else {"t": _num(times[k]), "T_eff": _num(t_eff[k])},
        "undershoot": _num((t_inf - t_eff.min()) / t_inf),
        "inverted_rows": int(np.sum(p1 >= p0)),
        "law_checks_ok": bool(first and second),
    }
    return TRANSIENT_COLUMNS, rows, summary


# ---------------------------------------------------------------- engine


def _engine_mc(args):
    wc, wh, tc, th, gamma, n, seed, paths = args
    p = st.walk_params_from_machine(wc, wh, tc, th, gamma)
    return st.ergotropy_rate_mc(p, n, seed, paths) * st.engine_energy_ratio(wc, wh)


def run_engine(cfg: RunConfig, threads=1):
    wh = cfg.machine["omega_h"]
    temps = cfg.temperatures()
    tc, th = temps["c"], temps["h"]
    gamma = cfg.run.get("gamma_eff", 1.0)
    ns = list(cfg.run["n_cycles"])
    grid = grid_values(cfg.run["sweep"])
    columns = ["omega_w", "R", "beta_v_omega_w", "eta_inf"] + [f"eta_{n}" for n in ns]
    columns += ["power_norm_inf"] + [f"power_norm_{n}" for n in ns] + ["engine"]
    rows = []
    for ww in grid:
        wc = wh - ww
        row = {"omega_w": ww, "engine": False}
        if not 0 < wc < wh:
            raise ValueError(f"omega_w={ww} outside (0, omega_h)")
        bvw = st.beta_v_omega_w(wc, wh, tc, th)
        row["R"] = st.engine_energy_ratio(wc, wh)
        row["beta_v_omega_w"] = bvw
        p = st.walk_params_from_machine(wc, wh, tc, th, gamma)
        j_h = wh * p.drift
        if bvw < 0:
            row["engine"] = True
            row["eta_inf"] = row["R"]
            for n in ns:
                row[f"eta_{n}"] = st.n_cycle_efficiency(n, bvw, row["R"])
        else:
            row["eta_inf"] = math.nan
            for n in ns:
                row[f"eta_{n}"] = math.nan
        row["_power"] = {
            key: (row[f"eta_{key}"] * j_h if row["engine"] else 0.0) for key in ["inf"] + ns
        }
        rows.append(row)
    for key in ["inf"] + ns:
        for r, v in zip(rows, _normalize_power([r["_power"][key] for r in rows])):
            r[f"power_norm_{key}"] = float(v)
    eng = [r for r in rows if r["engine"]]
    mc_pts = cfg.run.get("mc_points", [])
    paths = cfg.run.get("mc_paths", 100_000)
    jobs = [(wh - ww, wh, tc, th, gamma, ns[0], _point_seed(cfg.seed, i), paths) for i, ww in enumerate(mc_pts)]
    mc = _pool_map(_engine_mc, jobs, threads)
    checks = []
    for ww, eta_mc, job in zip(mc_pts, mc, jobs):
        wc = wh - ww
        eta_f = st.n_cycle_efficiency(ns[0], st.beta_v_omega_w(wc, wh, tc, th), st.engine_energy_ratio(wc, wh))
        checks.append({"omega_w": ww, "n_cycles": ns[0], "eta_formula": eta_f, "eta_mc": eta_mc,
                       "rel_diff": abs(eta_mc / eta_f - 1.0), "seed": job[6]})
    eta_c = carnot_efficiency(tc, th)
    summary = {
        "mode": "engine_walk",
        "carnot_efficiency": eta_c,
        "n_engine_points": len(eng),
        "n_flagged": len(rows) - len(eng),
        "max_eta_inf": max((r["eta_inf"] for r in eng), default=None),
        "eta_inf_below_carnot": all(r["eta_inf"] < eta_c for r in eng),
        "finite_n_ordered": all(
            r[f"eta_{a}"] < r[f"eta_{b}"] for r in eng for a, b in zip(sorted(ns), sorted(ns)[1:])
        ),
        "mc_checks": checks,
        "law_checks_ok": True,
    }
    return columns, rows, summary


# ---------------------------------------------------------------- clock

CLOCK_COLUMNS = [
    "x", "d", "omega_c", "gamma_eff", "Q_c", "power", "entropy_per_tick",
    "nu_exact", "N_exact", "nu_formula", "N_formula", "nu_mc", "N_mc", "feasible",
]


def _exact(p):
    mean, var = st.first_passage_moments(p)
    return 1.0 / mean, mean * mean / var


def _clock_point(args):
    scan, x, wc, wh, tc, th, d_fixed, run, seed = args
    row = {"x": x, "feasible": True}
    if scan == "a":
        d = int(x)
        base = st.walk_params_from_machine(wc, wh, tc, th, 1.0, d)
        q_c = (d - 1) * wc
        gamma = run["power"] / q_c / _exact(base)[0]
    elif scan == "b":
        d = d_fixed
        base = st.walk_params_from_machine(wc, wh, tc, th, 1.0, d)
        gamma = run["resolution"] / _exact(base)[0]
    else:
        gamma = run.get("gamma_eff", 1.0)
        d = None
        if wc > wh * tc / th:
            for dd in range(3, run.get("d_max", 200) + 1):
                if _exact(st.walk_params_from_machine(wc, wh, tc, th, gamma, dd))[1] >= run["accuracy"]:
                    d = dd
                    break
        if d is None:
            row.update(d=0, omega_c=wc, gamma_eff=gamma, feasible=False)
            for k in CLOCK_COLUMNS:
                row.setdefault(k, math.nan)
            return row
    p = st.walk_params_from_machine(wc, wh, tc, th, gamma, d)
    thermo = st.clock_thermo(d, wc, wh, tc, th)
    nu, n_acc = _exact(p)
    row.update(d=d, omega_c=wc, gamma_eff=gamma, Q_c=thermo.q_c, power=thermo.q_c * nu,
               entropy_per_tick=thermo.entropy_per_tick, nu_exact=nu, N_exact=n_acc)
    if p.drift > 0 and thermo.entropy_per_tick > 0:
        row["nu_formula"] = st.clock_resolution_formula(d, p)
        row["N_formula"] = st.clock_accuracy_formula(d, thermo.entropy_per_tick)
    else:
        row["nu_formula"] = row["N_formula"] = math.nan
    rec = st.simulate_clock(p, run.get("n_ticks", 4000), seed)
    row["nu_mc"], row["N_mc"] = rec.nu, rec.accuracy
    return row


def saturation_change(x, y, frac=0.2):
    """Relative change of y over the last ``frac`` of the x range (x sorted ascending)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x)
    x, y = x[order], y[order]
    x_thr = x[-1] - frac * (x[-1] - x[0])
    y_thr = np.interp(x_thr, x, y)
    return float(abs(y[-1] - y_thr) / abs(y[-1]))


def is_monotone_decreasing(x, y):
    order = np.argsort(np.asarray(x, dtype=float))
    ys = np.asarray(y, dtype=float)[order]
    return bool(np.all(np.diff(ys) < 0))


def run_clock(cfg: RunConfig, threads=1):
    m = cfg.machine
    temps = cfg.temperatures()
    scan = cfg.run["scan"]
    grid = grid_values(cfg.run["sweep"])
    jobs = []
    for i, x in enumerate(grid):
        wc = m["omega_c"] if scan == "a" else x
        jobs.append((scan, x, wc, m["omega_h"], temps["c"], temps["h"], m["d"], cfg.run, _point_seed(cfg.seed, i)))
    rows = _pool_map(_clock_point, jobs, threads)
    ok = [r for r in rows if r["feasible"]]
    summary = {"mode": "clock", "scan": scan, "n_rows": len(rows), "n_infeasible": len(rows) - len(ok), "law_checks_ok": True}
    for src in ("exact", "formula", "mc"):
        good = [r for r in ok if math.isfinite(r[f"nu_{src}"])]
        if len(good) < 2:
            continue
        nu = [r[f"nu_{src}"] for r in good]
        acc = [r[f"N_{src}"] for r in good]
        power = [r["Q_c"] * r[f"nu_{src}"] for r in good]
        if scan == "a":
            summary[f"accuracy_vs_resolution_decreasing_{src}"] = is_monotone_decreasing(nu, acc)
        elif scan == "b":
            summary[f"accuracy_saturation_{src}"] = saturation_change(power, acc)
        else:
            summary[f"resolution_saturation_{src}"] = saturation_change(power, nu)
    return CLOCK_COLUMNS, rows, summary
