"""Scenario runners producing CSV-ready tables and a JSON-ready summary."""
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from math import degrees

import numpy as np

from . import activation, hill
from ._backend import BACKEND
from .config import Scenario, SweepSpec
from .csvio import Table, table_from_columns
from .errors import MuscleSimError
from .fatigue import integrate
from .profiles import initial_fatigue
from .rig import HoldController, RigConfig, initial_state, step_rig

CURVE_GRIDS = {
    "active_force_length": (0.0, 2.0),
    "passive_force_length": (0.0, 2.0),
    "force_velocity": (-10.0, 10.0),
    "tau_activation": (0.0, 1.0),
    "tau_deactivation": (0.0, 1.0),
}
_CURVE_FUNCS = {
    "active_force_length": hill.active_force_length,
    "passive_force_length": hill.passive_force_length,
    "force_velocity": hill.force_velocity,
    "tau_activation": activation.tau_activation,
    "tau_deactivation": activation.tau_deactivation,
}


@dataclass
class RunResult:
    tables: dict
    summary: dict


def _steps(duration, dt):
    n = int(round(duration / dt))
    if n < 1:
        raise MuscleSimError(f"duration {duration} is shorter than one step of {dt}")
    return n


def run_curves(sc: Scenario):
    n = sc.grid or 201
    rows = []
    for name, (lo, hi) in CURVE_GRIDS.items():
        f = _CURVE_FUNCS[name]
        rows.extend([name, float(x), float(f(x))] for x in np.linspace(lo, hi, n))
    return RunResult({"curves": Table(["curve", "x", "value"], rows)},
                     {"points_per_curve": n, "curves": list(CURVE_GRIDS)})


def run_bounds(sc: Scenario):
    n = sc.grid or 21
    rows = activation.bounds_table(np.linspace(0.0, 1.0, n), sc.dt)
    table = Table(["alpha", "lower", "upper", "upper_unclipped"], [list(r) for r in rows])
    return RunResult({"activation_bounds": table}, {"rows": n, "dt": sc.dt})


def run_fatigue_profile(sc: Scenario):
    p = sc.fatigue.params()
    dt = sc.dt
    n = _steps(sc.duration, dt)
    loads = sc.load.sample(n, dt)
    init = initial_fatigue(sc.fatigue.init, sc.seed, p)[0]
    states = integrate(init, loads, dt, p)
    t = np.arange(n + 1) * dt
    u = np.append(loads, sc.load.value(n * dt))
    table = table_from_columns(["time", "u", "m_a", "m_r", "m_f"], t, u, *states.T)
    k = int(np.argmax(states[:, 0]))
    summary = {"steps": n, "initial": list(init.as_tuple()),
               "final": states[-1].tolist(), "peak_m_a": float(states[k, 0]),
               "peak_m_a_time": float(t[k])}
    return RunResult({"fatigue": table}, summary)


def rig_config(sc: Scenario):
    kw = {"fatigue": sc.fatigue.params()}
    if sc.rig.muscles is not None:
        kw["flexor"], kw["extensor"] = sc.rig.muscles
    return RigConfig(**kw)


def _control_period(sc: Scenario):
    ratio = sc.rate / sc.rig.control_rate
    k = int(round(ratio))
    if k < 1 or abs(ratio - k) > 1e-9:
        raise MuscleSimError(
            f"rate {sc.rate} Hz is not a whole multiple of control_rate {sc.rig.control_rate} Hz")
    return k


def _rig_header(cfg):
    cols = ["time", "theta", "theta_dot"]
    for m in cfg.muscles:
        cols += [f"{m.name}_force", f"{m.name}_m_a", f"{m.name}_m_r", f"{m.name}_m_f"]
    return cols


def _rig_row(state):
    row = [state.time, state.theta, state.theta_dot]
    for rt in state.muscles:
        row += [rt.force, *rt.fatigue.as_tuple()]
    return row


def _rig_initial(sc: Scenario, cfg):
    fat = initial_fatigue(sc.fatigue.init, sc.seed, cfg.fatigue, count=len(cfg.muscles))
    return initial_state(sc.rig.start_angle, cfg, fat)


def run_rig_hold(sc: Scenario):
    cfg = rig_config(sc)
    dt = sc.dt
    period = _control_period(sc)
    ctl = HoldController(cfg, sc.rig.hold_angle, sc.rig.stiffness)
    state = _rig_initial(sc, cfg)
    rows = [_rig_row(state) + [1.0 if sc.rig.windows[0][0] == "hold" else 0.0]]
    spans = []
    for mode, dur in sc.rig.windows:
        n = _steps(dur, dt)
        start = len(rows)
        for i in range(n):
            if i % period == 0:
                acts = ctl.actions(state) if mode == "hold" else ctl.rest_actions(cfg)
            state = step_rig(state, dt, cfg, actions=acts)
            rows.append(_rig_row(state) + [1.0 if mode == "hold" else 0.0])
        spans.append((mode, start, len(rows)))
    header = _rig_header(cfg) + ["holding"]
    table = Table(header, rows)
    summary = {"steps": len(rows) - 1, "gain_floor_hits": state.gain_floor_hits}
    summary.update(hold_metrics(table.column("theta"), spans, sc.rig.hold_angle))
    return RunResult({"rig": table}, summary)


def hold_metrics(theta, spans, target):
    """Droop over the first hold window and recovery in the first re-hold.

    ``droop_deg`` is the deviation from the hold target at the end of the
    first hold window. ``recovery_fraction`` is the share of that droop
    removed at the best point of the first hold window that follows a rest.
    """
    dev = np.degrees(np.abs(np.asarray(theta, dtype=float) - target))
    out = {}
    holds = [s for s in spans if s[0] == "hold"]
    if not holds:
        return out
    _, a, b = holds[0]
    droop = float(dev[b - 1])
    out["droop_deg"] = droop
    out["max_deviation_first_hold_deg"] = float(dev[a:b].max())
    seen_rest = False
    for mode, a, b in spans:
        if mode == "rest" and any(s[2] <= a for s in holds):
            seen_rest = True
        elif mode == "hold" and seen_rest:
            best = float(dev[a:b].min())
            out["rehold_min_deviation_deg"] = best
            out["recovery_fraction"] = (droop - best) / droop if droop > 0 else None
            break
    return out


def run_rig_schedule(sc: Scenario):
    cfg = rig_config(sc)
    dt = sc.dt
    period = _control_period(sc)
    n = _steps(sc.duration, dt)
    sched = sc.rig.schedule
    state = _rig_initial(sc, cfg)
    rows = [_rig_row(state)]
    j = 0
    cmds = sched[0][1]
    for i in range(n):
        if i % period == 0:
            t = i * dt
            while j < len(sched) and sched[j][0] <= t + 1e-12:
                cmds = sched[j][1]
                j += 1
        if sc.rig.command == "actions":
            state = step_rig(state, dt, cfg, actions=cmds)
        else:
            state = step_rig(state, dt, cfg, loads=cmds)
        rows.append(_rig_row(state))
    summary = {"steps": n, "final_theta_deg": degrees(state.theta),
               "gain_floor_hits": state.gain_floor_hits}
    return RunResult({"rig": Table(_rig_header(cfg), rows)}, summary)


RUNNERS = {
    "curves": run_curves,
    "activation_bounds": run_bounds,
    "fatigue_profile": run_fatigue_profile,
    "rig_hold": run_rig_hold,
    "rig_schedule": run_rig_schedule,
}


def run(sc: Scenario):
    """Run one scenario; deterministic for a given scenario and seed."""
    res = RUNNERS[sc.kind](sc)
    res.summary = {"kind": sc.kind, "rate": sc.rate, "seed": sc.seed,
                   "fatigue_scale": sc.fatigue.scale, "backend": BACKEND, **res.summary}
    return res


def m_f_growth_rate(table: Table, window):
    """Least-squares slope [1/s] of the first ``m_f`` column over ``t <= window``."""
    col = next(c for c in table.header if c == "m_f" or c.endswith("_m_f"))
    t = table.column("time").astype(float)
    mf = table.column(col).astype(float)
    keep = t <= window + 1e-12
    if keep.sum() < 2:
        raise MuscleSimError(f"rate window {window} s holds fewer than two samples")
    return float(np.polyfit(t[keep], mf[keep], 1)[0])


def _sweep_point(sc: Scenario):
    return run(sc)


def run_sweep(sc: Scenario, workers=None):
    """Run ``sc`` once per fatigue scale in ``sc.sweep``.

    Points run in separate processes; results come back to the caller, which
    is the only writer. Returns ``[(scale, RunResult)]`` in grid order plus a
    summary with the ``m_f`` growth rates.
    """
    if sc.kind not in ("fatigue_profile", "rig_hold", "rig_schedule"):
        raise MuscleSimError(f"kind {sc.kind!r} has no fatigue to sweep")
    sweep = sc.sweep or SweepSpec()
    points = [replace(sc, fatigue=replace(sc.fatigue, scale=s), sweep=None)
              for s in sweep.fatigue_scale]
    workers = workers or sweep.workers or min(len(points), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, points))
    else:
        results = [_sweep_point(p) for p in points]
    rates = []
    for res in results:
        table = next(iter(res.tables.values()))
        rates.append(m_f_growth_rate(table, sweep.rate_window))
    summary = {"kind": sc.kind, "seed": sc.seed, "rate": sc.rate, "backend": BACKEND,
               "fatigue_scale": list(sweep.fatigue_scale), "m_f_growth_rate": rates,
               "rate_window": sweep.rate_window,
               "strictly_increasing": all(b > a for a, b in zip(rates, rates[1:]))}
    return list(zip(sweep.fatigue_scale, results)), summary


__all__ = ["RunResult", "run", "run_sweep", "hold_metrics", "m_f_growth_rate",
           "rig_config"]
