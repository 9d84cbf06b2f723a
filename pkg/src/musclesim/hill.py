"""Hill-type musculotendon force with a rigid tendon and zero pennation.

Force is ``f_m0 * (alpha * f_l(l_bar) * f_v(l_bar_dot) + f_pe(l_bar))`` with
fixed characteristic curves:

* active force-length ``exp(-(l_bar - 1)**2 / 0.5)``
* force-velocity, lengthening for ``l_bar_dot > 0`` and shortening otherwise
* passive force-length, zero below the optimal length

The force-velocity curve turns negative for ``l_bar_dot < -10``. The formula
is evaluated as written; :func:`active_gain` gives the floored product that
the controller divides by.
"""
from dataclasses import dataclass
from math import isfinite
from typing import Optional

from ._backend import kernels
from .errors import MuscleSimError

GAIN_FLOOR = kernels.GAIN_FLOOR


@dataclass(frozen=True)
class MuscleMechanics:
    """Per-muscle Hill parameters.

    Attributes
    ----------
    f_m0 : float
        Maximum isometric force [N].
    l_ori : float
        Rest muscle length [m].
    l_Tnorm : float
        Tendon-length normalising factor [-].
    l_MTnorm : float
        Muscle-tendon-unit normalising factor [-].
    """

    f_m0: float
    l_ori: float
    l_Tnorm: float = 0.0
    l_MTnorm: float = 1.0

    def __post_init__(self):
        for name in ("f_m0", "l_ori", "l_Tnorm", "l_MTnorm"):
            if not isfinite(getattr(self, name)):
                raise MuscleSimError(f"{name} must be finite")
        if self.f_m0 <= 0:
            raise MuscleSimError(f"f_m0 must be > 0, got {self.f_m0}")
        if self.l_ori <= 0:
            raise MuscleSimError(f"l_ori must be > 0, got {self.l_ori}")
        if self.l_MTnorm <= 0:
            raise MuscleSimError(f"l_MTnorm must be > 0, got {self.l_MTnorm}")
        if self.l_Tnorm < 0:
            raise MuscleSimError(f"l_Tnorm must be >= 0, got {self.l_Tnorm}")

    @property
    def optimal_length(self):
        """Muscle length [m] at which ``l_bar == 1``."""
        return self.l_ori * (self.l_Tnorm + self.l_MTnorm)


@dataclass(frozen=True)
class NormalizedMuscleState:
    l_bar: float
    l_bar_dot: float = 0.0

    def __post_init__(self):
        if not (isfinite(self.l_bar) and isfinite(self.l_bar_dot)):
            raise MuscleSimError("normalised muscle state must be finite")
        if self.l_bar < 0:
            raise MuscleSimError(f"l_bar must be >= 0, got {self.l_bar}")


def _finite(x, name):
    x = float(x)
    if not isfinite(x):
        raise MuscleSimError(f"{name} must be finite, got {x}")
    return x


def active_force_length(l_bar):
    """Active force-length gain, peaking at 1 for ``l_bar == 1``."""
    l_bar = _finite(l_bar, "l_bar")
    if l_bar < 0:
        raise MuscleSimError(f"l_bar must be >= 0, got {l_bar}")
    return kernels.fl_active(l_bar)


def force_velocity(l_bar_dot):
    """Force-velocity gain; 1 at rest, above 1 when lengthening."""
    return kernels.fv(_finite(l_bar_dot, "l_bar_dot"))


def passive_force_length(l_bar):
    """Passive force-length gain; 0 at or below ``l_bar == 1`` and 1 at 1.6."""
    l_bar = _finite(l_bar, "l_bar")
    if l_bar < 0:
        raise MuscleSimError(f"l_bar must be >= 0, got {l_bar}")
    return kernels.fl_passive(l_bar)


def active_gain(state: NormalizedMuscleState):
    """``f_l * f_v`` floored at ``GAIN_FLOOR`` so it can be divided by."""
    return kernels.active_gain(state.l_bar, state.l_bar_dot)


def normalize_length(l_M, mech: MuscleMechanics, prev_l_bar: Optional[float], dt):
    """Normalise a muscle length and finite-difference its rate.

    ``prev_l_bar=None`` marks the first frame, where the rate is defined as 0.
    """
    l_M = _finite(l_M, "l_M")
    dt = _finite(dt, "dt")
    if dt <= 0:
        raise MuscleSimError(f"dt must be > 0, got {dt}")
    if l_M <= 0:
        raise MuscleSimError(f"l_M must be > 0, got {l_M}")
    l_bar = (l_M / mech.l_ori - mech.l_Tnorm) / mech.l_MTnorm
    l_bar_dot = 0.0 if prev_l_bar is None else (l_bar - prev_l_bar) / dt
    return NormalizedMuscleState(l_bar, l_bar_dot)


def muscle_force(alpha, state: NormalizedMuscleState, mech: MuscleMechanics):
    """Muscle force [N] for activation ``alpha`` at the given state."""
    alpha = _finite(alpha, "alpha")
    if not 0.0 <= alpha <= 1.0:
        raise MuscleSimError(f"alpha must lie in [0, 1], got {alpha}")
    gain = kernels.fl_active(state.l_bar) * kernels.fv(state.l_bar_dot)
    return mech.f_m0 * (alpha * gain + kernels.fl_passive(state.l_bar))


def muscle_force_derivative(state: NormalizedMuscleState, mech: MuscleMechanics):
    """d(force)/d(alpha); constant because force is affine in alpha."""
    return mech.f_m0 * kernels.fl_active(state.l_bar) * kernels.fv(state.l_bar_dot)
