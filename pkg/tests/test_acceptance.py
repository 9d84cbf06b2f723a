"""Acceptance criteria 1-10.

Each test runs one criterion at its stated tolerance and runtime budget and
records a PASS/FAIL line, printed in the terminal summary (see conftest).
"""
import math
import time
from contextlib import contextmanager
from importlib import resources

import numpy as np
import pytest

import oracles
from musclesim import activation, hill
from musclesim.cli import main as cli_main
from musclesim.config import load_scenario
from musclesim.control import (MuscleDefinition, MuscleMemory, Saturation,
                               apply_muscle_control, force_action_sensitivity)
from musclesim.fatigue import (DEMO_PARAMS, FatigueParams, FatigueState,
                               activation_bounds_3ccr, integrate, next_activation,
                               solve_target_load)
from musclesim.hill import MuscleMechanics, NormalizedMuscleState
from musclesim.routing import (AnchorBinding, BonePose, MusclePath, anchor_forces,
                               anchor_positions, path_length)
from musclesim.scenarios import run, run_sweep

DT = 1.0 / 120.0
DATA = resources.files("musclesim") / "data"
RESULTS = []


@contextmanager
def criterion(number, title, budget):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        within = elapsed < budget
        status = "PASS" if ok and within else "FAIL"
        note = "" if within else " (over budget)"
        RESULTS.append(f"[{status}] criterion {number:2d}: {title} "
                       f"({elapsed:.2f} s / {budget:g} s){note}")
    assert elapsed < budget, f"criterion {number} took {elapsed:.2f} s, budget {budget} s"


def random_states(rng, n):
    cuts = np.sort(rng.uniform(0, 1, (n, 2)), axis=1)
    return np.column_stack([cuts[:, 0], cuts[:, 1] - cuts[:, 0], 1.0 - cuts[:, 1]])


def test_criterion_01_hill_anchors():
    with criterion(1, "Hill curve anchor values", 1.0):
        assert abs(hill.active_force_length(1.0) - 1.0) <= 1e-12
        assert abs(hill.passive_force_length(1.0)) <= 1e-12
        assert abs(hill.force_velocity(0.0) - 1.0) <= 1e-12
        assert abs(hill.passive_force_length(1.6) - 1.0) <= 1e-12


def test_criterion_02_activation_bounds_table():
    with criterion(2, "activation bounds table and excitation-grid oracle", 10.0):
        b = activation.activation_bounds(0.5, DT)
        assert abs(b.lower - 0.369792) <= 1e-6 and abs(b.upper - 0.833333) <= 1e-6
        b = activation.activation_bounds(1.0, DT)
        assert abs(b.lower - 0.583333) <= 1e-6 and abs(b.upper - 1.0) <= 1e-6

        alphas = np.linspace(0.0, 1.0, 1000)[:, None]
        eps = np.linspace(0.0, 1.0, 10_000)[None, :]
        tau = np.where(eps > alphas, 0.01 * (0.5 + 1.5 * alphas), 0.04 / (0.5 + 1.5 * alphas))
        reach = np.clip(alphas + DT * (eps - alphas) / tau, 0.0, 1.0)
        grid_step = np.max(np.abs(np.diff(reach, axis=1)), axis=1)
        for i, a in enumerate(alphas[:, 0]):
            b = activation.activation_bounds(a, DT)
            tol = max(grid_step[i], 1e-12)
            assert abs(reach[i].min() - b.lower) <= tol
            assert abs(reach[i].max() - b.upper) <= tol


def test_criterion_03_fatigue_conservation(rng):
    with criterion(3, "3CC-r conservation over 1e5 steps", 5.0):
        p = FatigueParams()
        assert (p.f_coeff, p.r_coeff, p.rest_mult, p.l_d, p.l_r) == (0.01, 0.002, 2, 50, 50)
        for loads in (rng.uniform(0, 1, 100_000),
                      rng.choice([0.0, 0.3, 1.0], 100_000),
                      np.repeat(rng.uniform(0, 1, 100), 1000)):
            traj = integrate(FatigueState.fresh(), loads, DT, p)
            assert np.max(np.abs(traj.sum(axis=1) - 1.0)) <= 1e-6
            assert traj.min() >= 0.0


def test_criterion_04_monotone_clip(rng):
    with criterion(4, "alpha-tilde monotone, bounds tight, load inverse", 30.0):
        p = FatigueParams()
        u = np.linspace(0.0, 1.0, 10_000)
        k = 1.0 - DT * p.f_coeff
        for ma, mr, _ in random_states(rng, 1000):
            c = np.where(ma >= u, p.l_r * (u - ma),
                         np.where(mr > u - ma, p.l_d * (u - ma), p.l_d * mr))
            at = k * ma + DT * c
            assert np.all(np.diff(at) >= -1e-12)
            s = FatigueState(ma, mr, 1.0 - ma - mr)
            b = activation_bounds_3ccr(s, DT, p)
            step = max(np.max(np.abs(np.diff(at))), 1e-12)
            assert abs(min(at.min(), 1.0) - b.lower) <= step
            assert abs(min(at.max(), 1.0) - b.upper) <= step
            target = b.lower + rng.uniform() * (b.upper - b.lower)
            u_star = solve_target_load(s, target, DT, p)
            assert abs(next_activation(u_star, s, DT, p) - target) <= 1e-9


def _straight_muscle(f_m0, length):
    path = MusclePath((AnchorBinding.rigid(0, (0, 0, 0)),
                       AnchorBinding.rigid(1, (length, 0, 0))))
    return MuscleDefinition("m", MuscleMechanics(f_m0, length, 0.1, 0.9), path)


def _shift(dx):
    return [BonePose.identity(), BonePose(np.eye(3), np.array([dx, 0.0, 0.0]))]


def test_criterion_05_clip_equivalence(rng):
    with criterion(5, "force-space clip equals activation-space clip", 10.0):
        m = _straight_muscle(800.0, 0.25)
        p = FatigueParams()
        for ma, mr, mf in random_states(rng, 10_000):
            fs = FatigueState(ma, mr, mf)
            dx = rng.uniform(-0.06, 0.06)
            prev = 0.25 + dx + rng.uniform(-0.01, 0.01)
            mem = MuscleMemory(prev, (prev / 0.25 - 0.1) / 0.9)
            action = rng.uniform(-0.99, 1.0)
            res = apply_muscle_control(_shift(dx), fs, action, m, mem, DT, p)
            s = res.normalized
            pe = oracles.fpe(s.l_bar)
            gain = max(oracles.fl(s.l_bar) * oracles.fv(s.l_bar_dot), 1e-6)
            b = activation_bounds_3ccr(fs, DT, p)
            alpha = min(max((res.f_pd / m.mech.f_m0 - pe) / gain, b.lower), b.upper)
            force = m.mech.f_m0 * (alpha * gain + pe)
            assert abs(res.next_activation - alpha) <= 1e-9
            assert abs(res.applied_force - force) <= 1e-9 * max(1.0, force)


def test_criterion_06_square_wave_demo():
    with criterion(6, "square-wave fatigue demo shape", 1.0):
        sc = load_scenario(DATA / "fatigue_demo.yaml")
        assert sc.fatigue.params() == DEMO_PARAMS
        traj = run(sc).tables["fatigue"]
        t = traj.column("time").astype(float)
        ma, mr, mf = (traj.column(c).astype(float) for c in ("m_a", "m_r", "m_f"))
        assert (ma[0], mr[0], mf[0]) == (0.0, 1.0, 0.0)
        end = int(round(20.0 / DT))
        peak = int(np.argmax(ma[:end + 1]))
        assert t[peak] < 20.0 and ma[end] < ma[peak]
        assert np.all(np.diff(mf[:end + 1]) >= 0.0) and mf[end] > mf[0]
        assert np.all(np.diff(mr[end:]) >= 0.0) and mr[-1] > mr[end]


def test_criterion_07_routing_physics(rng):
    with criterion(7, "anchor forces balance, length rigid-motion invariant", 5.0):
        for _ in range(1000):
            n = int(rng.integers(2, 8))
            pts = rng.normal(scale=0.3, size=(n, 3))
            forces = anchor_forces(pts, rng.uniform(0.0, 1000.0))
            assert max(abs(math.fsum(forces[:, j])) for j in range(3)) <= 1e-12

            n_bones = int(rng.integers(1, 4))
            anchors = []
            for _ in range(n):
                w = rng.dirichlet(np.ones(n_bones))
                anchors.append(AnchorBinding(tuple(
                    (i, float(w[i]), rng.normal(scale=0.2, size=3)) for i in range(n_bones))))
            path = MusclePath(tuple(anchors))
            poses = [_random_pose(rng) for _ in range(n_bones)]
            g = _random_pose(rng)
            moved = [g.compose(q) for q in poses]
            assert abs(path_length(anchor_positions(path, moved))
                       - path_length(anchor_positions(path, poses))) <= 1e-9


def _random_pose(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return BonePose(q, rng.normal(size=3))


def test_criterion_08_derivatives(rng):
    with criterion(8, "analytic vs numeric derivatives", 10.0):
        mech = MuscleMechanics(600.0, 0.2)
        for _ in range(1000):
            s = NormalizedMuscleState(rng.uniform(0.4, 1.6), rng.uniform(-9.0, 10.0))
            a = rng.uniform(0.0, 1.0)
            slope = hill.muscle_force_derivative(s, mech)
            f0 = hill.muscle_force(0.0, s, mech)
            assert abs(hill.muscle_force(a, s, mech) - (f0 + a * slope)) <= 1e-9 * mech.f_m0

        m = _straight_muscle(800.0, 0.25)
        checked, h = 0, 1e-7
        while checked < 1000:
            fs = FatigueState(*rng.dirichlet(np.ones(3)))
            dx = rng.uniform(-0.05, 0.02)
            prev = 0.25 + dx + rng.uniform(-2e-3, 2e-3)
            mem = MuscleMemory(prev, (prev / 0.25 - 0.1) / 0.9)
            action = rng.uniform(-0.8, 0.8)
            res = apply_muscle_control(_shift(dx), fs, action, m, mem, DT)
            up = apply_muscle_control(_shift(dx), fs, action + h, m, mem, DT)
            dn = apply_muscle_control(_shift(dx), fs, action - h, m, mem, DT)
            if not (res.saturated is up.saturated is dn.saturated is Saturation.NONE
                    and min(res.f_pd, up.f_pd, dn.f_pd) > 0.0):
                continue
            numeric = (up.applied_force - dn.applied_force) / (2 * h)
            analytic = force_action_sensitivity(res, m)
            assert abs(numeric - analytic) <= 1e-5 * abs(analytic)
            checked += 1


def test_criterion_09_arm_hold_analog():
    with criterion(9, "arm-hold droop and recovery, ordered fatigue sweep", 60.0):
        sc = load_scenario(DATA / "rig_hold.yaml")
        assert sc.fatigue.scale == 50.0
        assert [m for m, _ in sc.rig.windows] == ["hold", "rest", "hold"]
        assert sc.rig.windows[1][1] == sc.rig.windows[0][1]
        res = run(sc)
        assert res.summary["droop_deg"] >= 5.0
        assert res.summary["recovery_fraction"] >= 0.5
        mf = res.tables["rig"].column("flexor_m_f").astype(float)
        n = int(round(sc.rig.windows[0][1] / DT))
        assert mf[n] > mf[0] and mf[2 * n] < mf[n]

        _, summary = run_sweep(load_scenario(DATA / "sweep.yaml"), workers=1)
        assert summary["fatigue_scale"] == [5.0, 10.0, 25.0]
        assert summary["strictly_increasing"]


def test_criterion_10_cli_determinism(tmp_path):
    with criterion(10, "byte-identical CSV for identical scenario and seed", 5.0):
        cfg = tmp_path / "s.yaml"
        cfg.write_text("""schema: 1
kind: fatigue_profile
duration: 30
load: {type: square, amplitude: 0.6, period: 10, duty: 0.4}
fatigue: {preset: demo, init: sampled}
""")
        for name in ("a", "b"):
            assert cli_main(["fatigue", "--config", str(cfg), "--seed", "7",
                             "--out", str(tmp_path / name)]) == 0
        for f in ("fatigue.csv", "summary.json"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
