"""Target-load profiles and fatigue-state initialisation."""
from dataclasses import dataclass
from math import isfinite
from typing import Tuple

import numpy as np

from .errors import MuscleSimError
from .fatigue import FatigueParams, FatigueState, integrate


@dataclass(frozen=True)
class LoadProfile:
    """Piecewise-constant target load ``u(t)``.

    ``kind`` is ``constant`` (``amplitude``), ``square`` (``amplitude`` for the
    first ``duty * period`` seconds of each period, ``baseline`` otherwise) or
    ``schedule`` (``points`` of ``(time, value)``; each value holds until the
    next time, the first value also before the first time).
    """

    kind: str = "constant"
    amplitude: float = 0.0
    baseline: float = 0.0
    period: float = 1.0
    duty: float = 0.5
    points: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "square", "schedule"):
            raise MuscleSimError(f"unknown load profile kind {self.kind!r}")
        for name in ("amplitude", "baseline"):
            _unit(getattr(self, name), name)
        if self.kind == "square":
            if not (isfinite(self.period) and self.period > 0):
                raise MuscleSimError(f"period must be > 0, got {self.period}")
            if not (isfinite(self.duty) and 0.0 <= self.duty <= 1.0):
                raise MuscleSimError(f"duty must lie in [0, 1], got {self.duty}")
        if self.kind == "schedule":
            pts = tuple((float(t), _unit(v, "schedule value")) for t, v in self.points)
            if not pts:
                raise MuscleSimError("a schedule needs at least one point")
            times = [t for t, _ in pts]
            if not all(isfinite(t) for t in times):
                raise MuscleSimError("schedule times must be finite")
            if any(b < a for a, b in zip(times, times[1:])):
                raise MuscleSimError("schedule times must be non-decreasing")
            object.__setattr__(self, "points", pts)

    def value(self, t):
        if self.kind == "constant":
            return self.amplitude
        if self.kind == "square":
            phase = (t % self.period) / self.period
            return self.amplitude if phase < self.duty else self.baseline
        u = self.points[0][1]
        for ti, vi in self.points:
            if t >= ti:
                u = vi
            else:
                break
        return u

    def sample(self, n, dt):
        """Loads applied over steps ``[k*dt, (k+1)*dt)`` for ``k < n``.

        Times are built as ``k * dt`` (not accumulated) so edges land on the
        same step regardless of ``n``.
        """
        return np.array([self.value(k * dt) for k in range(int(n))], dtype=float)


def _unit(x, name):
    x = float(x)
    if not (isfinite(x) and 0.0 <= x <= 1.0):
        raise MuscleSimError(f"{name} must lie in [0, 1], got {x}")
    return x


# Reference curve for sampled initial states: two 40 s cycles of a 50 % duty
# square wave at u = 0.5, starting fresh.
REFERENCE_PROFILE = LoadProfile("square", amplitude=0.5, period=40.0, duty=0.5)
REFERENCE_DURATION = 80.0
REFERENCE_DT = 1.0 / 120.0


def reference_curve(params: FatigueParams = FatigueParams(),
                    profile: LoadProfile = REFERENCE_PROFILE,
                    duration=REFERENCE_DURATION, dt=REFERENCE_DT):
    n = int(round(duration / dt))
    return integrate(FatigueState.fresh(), profile.sample(n, dt), dt, params)


def sample_initial_fatigue(seed, params: FatigueParams = FatigueParams(), rng=None):
    """Pick a uniformly random state from the reference fatigue curve.

    Every point on the curve is reachable by the dynamics, so the returned
    compartments are a valid combination. Pass ``rng`` to draw several states
    from one stream; otherwise a generator is seeded from ``seed``.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    curve = reference_curve(params)
    ma, mr, mf = curve[int(rng.integers(len(curve)))]
    return FatigueState(float(ma), float(mr), float(mf))


def initial_fatigue(mode, seed, params: FatigueParams = FatigueParams(), count=1):
    """``count`` initial states for mode ``fresh`` or ``sampled``."""
    if mode == "fresh":
        return [FatigueState.fresh() for _ in range(count)]
    if mode == "sampled":
        rng = np.random.default_rng(seed)
        return [sample_initial_fatigue(seed, params, rng) for _ in range(count)]
    raise MuscleSimError(f"unknown fatigue init mode {mode!r}")
