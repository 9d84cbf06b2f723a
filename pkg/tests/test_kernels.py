"""Compiled and pure-Python kernels must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from musclesim import _backend, _kernels_py as py

cy = pytest.importorskip("musclesim._kernels")

ARGS = (0.5, 0.1, 2.0, 50.0, 50.0)
DT = 1.0 / 120.0


@st.composite
def triples(draw):
    a, b = sorted((draw(st.floats(0, 1)), draw(st.floats(0, 1))))
    return a, b - a, 1.0 - b


@pytest.mark.skipif(bool(os.environ.get("MUSCLESIM_PURE_PYTHON")),
                    reason="python backend forced")
def test_compiled_backend_selected():
    assert _backend.BACKEND == "cython"


def test_env_var_forces_python_backend():
    code = "from musclesim._backend import BACKEND; print(BACKEND)"
    env = {"MUSCLESIM_PURE_PYTHON": "1", "PATH": ""}
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "python"


@given(st.floats(0, 2), st.floats(-20, 20))
def test_curves_agree(l_bar, v):
    assert cy.fl_active(l_bar) == py.fl_active(l_bar)
    assert cy.fl_passive(l_bar) == py.fl_passive(l_bar)
    assert cy.fv(v) == py.fv(v)
    assert cy.active_gain(l_bar, v) == py.active_gain(l_bar, v)


@given(triples(), st.floats(0, 1))
def test_fatigue_steps_agree(s, u):
    assert cy.fatigue_step(*s, u, DT, *ARGS) == pytest.approx(py.fatigue_step(*s, u, DT, *ARGS), abs=1e-15)
    lo, hi = py.bounds_3ccr(*s[:2], DT, ARGS[0], ARGS[3], ARGS[4])
    assert cy.bounds_3ccr(*s[:2], DT, ARGS[0], ARGS[3], ARGS[4]) == pytest.approx((lo, hi), abs=1e-15)
    target = lo + u * (hi - lo)
    assert cy.fatigue_step_target(*s, target, DT, *ARGS[:3]) == pytest.approx(
        py.fatigue_step_target(*s, target, DT, *ARGS[:3]), abs=1e-15)


@given(triples(), st.floats(-100, 3000), st.floats(0.5, 1.5), st.floats(-15, 15))
def test_muscle_control_agrees(s, f_pd, l_bar, v):
    a = cy.muscle_control(f_pd, l_bar, v, 1000.0, *s, DT, *ARGS)
    b = py.muscle_control(f_pd, l_bar, v, 1000.0, *s, DT, *ARGS)
    assert a[2] == b[2] and a[6] == b[6]
    assert np.allclose(a, b, rtol=1e-14, atol=1e-12)


def test_integration_agrees(rng):
    loads = rng.uniform(0, 1, 5000)
    a = cy.integrate_fatigue(0.0, 1.0, 0.0, loads, DT, *ARGS)
    b = py.integrate_fatigue(0.0, 1.0, 0.0, loads, DT, *ARGS)
    assert np.allclose(a, b, rtol=0, atol=1e-13)


def test_same_public_names():
    names = [n for n in dir(py) if not n.startswith("_")
             and callable(getattr(py, n)) and getattr(getattr(py, n), "__module__", "") == py.__name__]
    for n in names:
        assert hasattr(cy, n), n
