"""First-order excitation-to-activation dynamics.

``d(alpha)/dt = (eps - alpha) / tau(eps, alpha)`` with a faster time constant
while activating (``eps > alpha``) than while deactivating. Stepping with
forward Euler gives a band of next activations reachable from the current
one with some excitation in [0, 1]; :func:`activation_bounds` returns it and
:func:`solve_excitation` recovers the excitation for a target inside it.

The band derivation keeps the lower bound non-negative only for
``dt <= MAX_DT`` (the smallest deactivation time constant), so that window
is enforced.
"""
from dataclasses import dataclass
from math import isfinite

from .errors import FeasibilityError, MuscleSimError

MAX_DT = 0.02
_TOL = 1e-12


@dataclass(frozen=True)
class ActivationState:
    alpha: float = 0.0

    def __post_init__(self):
        _unit(self.alpha, "alpha")


@dataclass(frozen=True)
class ActivationBounds:
    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise MuscleSimError(
                f"bounds must satisfy 0 <= lower <= upper <= 1, got "
                f"({self.lower}, {self.upper})")

    def contains(self, x, tol=_TOL):
        return self.lower - tol <= x <= self.upper + tol


def _unit(x, name):
    x = float(x)
    if not (isfinite(x) and 0.0 <= x <= 1.0):
        raise MuscleSimError(f"{name} must lie in [0, 1], got {x}")
    return x


def _positive_dt(dt):
    dt = float(dt)
    if not (isfinite(dt) and dt > 0):
        raise MuscleSimError(f"dt must be > 0, got {dt}")
    return dt


def tau_activation(alpha):
    return 0.01 * (0.5 + 1.5 * alpha)


def tau_deactivation(alpha):
    return 0.04 / (0.5 + 1.5 * alpha)


def time_constant(epsilon, alpha):
    """Time constant [s]; the activating branch applies only for ``eps > alpha``."""
    epsilon = _unit(epsilon, "epsilon")
    alpha = _unit(alpha, "alpha")
    if epsilon > alpha:
        return tau_activation(alpha)
    return tau_deactivation(alpha)


def activation_rate(epsilon, alpha):
    """d(alpha)/dt [1/s]."""
    return (float(epsilon) - float(alpha)) / time_constant(epsilon, alpha)


def step_activation(alpha, epsilon, dt):
    """One forward-Euler step, clamped to [0, 1]."""
    dt = _positive_dt(dt)
    nxt = float(alpha) + dt * activation_rate(epsilon, alpha)
    return min(max(nxt, 0.0), 1.0)


def activation_bounds(alpha_prev, dt):
    """Range of next activations reachable in one step of length ``dt``."""
    alpha_prev = _unit(alpha_prev, "alpha_prev")
    dt = _positive_dt(dt)
    if dt > MAX_DT:
        raise MuscleSimError(
            f"dt={dt} exceeds the {MAX_DT} s window where the bounds are valid")
    lower = alpha_prev - dt * alpha_prev / tau_deactivation(alpha_prev)
    upper = alpha_prev + dt * (1.0 - alpha_prev) / tau_activation(alpha_prev)
    return ActivationBounds(max(lower, 0.0), min(upper, 1.0))


def solve_excitation(alpha_prev, alpha_target, dt):
    """Excitation that carries ``alpha_prev`` to ``alpha_target`` in one step.

    Raises
    ------
    FeasibilityError
        If the target lies outside :func:`activation_bounds`.
    """
    bounds = activation_bounds(alpha_prev, dt)
    alpha_target = float(alpha_target)
    if alpha_target < bounds.lower - _TOL:
        raise FeasibilityError(
            f"target {alpha_target} is below the lower bound {bounds.lower}",
            "lower", bounds.lower)
    if alpha_target > bounds.upper + _TOL:
        raise FeasibilityError(
            f"target {alpha_target} is above the upper bound {bounds.upper}",
            "upper", bounds.upper)
    delta = alpha_target - alpha_prev
    if delta > 0:
        eps = alpha_prev + delta * tau_activation(alpha_prev) / dt
    elif delta < 0:
        eps = alpha_prev + delta * tau_deactivation(alpha_prev) / dt
    else:
        return alpha_prev
    return min(max(eps, 0.0), 1.0)


def bounds_table(alphas, dt):
    """Rows of ``(alpha_prev, lower, upper, upper_unclipped)`` over a grid."""
    rows = []
    for a in alphas:
        b = activation_bounds(a, dt)
        raw = a + dt * (1.0 - a) / tau_activation(a)
        rows.append((float(a), b.lower, b.upper, raw))
    return rows
