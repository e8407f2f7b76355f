"""Time integration and long-run attractor classification."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from genspec import _kernels
from genspec import equilibria as eqm
from genspec.lyapunov import LleConfig, LyapunovError, lle
from genspec.model import Params, check_state

EQUILIBRIUM = "equilibrium"
PERIODIC = "periodic"
CHAOTIC = "chaotic-candidate"
UNRESOLVED = "unresolved"

RHS_TOL = 1e-8
MATCH_TOL = 1e-5
PEAK_REL_TOL = 1e-4
MIN_AMPLITUDE = 1e-6
MIN_EQUAL_PEAKS = 10
MAX_PEAK_LAG = 8
LLE_CHAOS_THRESHOLD = 1e-3

#: Shorter LLE run used inside classification (the orbit is already past
#: its transient when it is handed over).
CLASSIFY_LLE = LleConfig(transient=200.0, accumulation=5000.0)


class IntegrationError(RuntimeError):
    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class IntegratorConfig:
    t_end: float = 5000.0
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = 10.0
    transient_fraction: float = 0.5
    sample_dt: float = 0.1
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (self.t_end > 0 and self.sample_dt > 0 and self.max_step > 0):
            raise ValueError("t_end, sample_dt and max_step must be positive")
        if not 0 < self.transient_fraction < 1:
            raise ValueError("transient_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    accepted: int
    rejected: int

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def window(self, start: float) -> Trajectory:
        """Samples with ``t >= start``."""
        k = int(np.searchsorted(self.t, start - 1e-12))
        return Trajectory(self.t[k:], self.states[k:], self.accepted, self.rejected)


def integrate(p: Params, s0, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Dormand-Prince 5(4) with dense output every ``cfg.sample_dt``.

    Raises :class:`IntegrationError` on step-size underflow or when a
    component drops below ``-1e-9``.
    """
    s0 = check_state(s0)
    out, filled, acc, rej, status = _kernels.integrate_sampled(
        _kernels.rhs,
        s0,
        p.as_array(),
        float(cfg.t_end),
        float(cfg.sample_dt),
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_step,
        cfg.max_steps,
    )
    t = np.arange(filled) * cfg.sample_dt
    traj = Trajectory(t, out[:filled], int(acc), int(rej))
    if status != _kernels.OK:
        raise IntegrationError(
            f"integration stopped at t={t[-1]:.6g}: {_kernels.STATUS_MESSAGES[status]}", traj
        )
    return traj


@dataclass(frozen=True)
class Peaks:
    times: np.ndarray
    heights: np.ndarray


def find_peaks(t: np.ndarray, signal: np.ndarray) -> Peaks:
    """Three-point local maxima, heights refined by a parabola through the triple."""
    y0, y1, y2 = signal[:-2], signal[1:-1], signal[2:]
    idx = np.nonzero((y1 > y0) & (y1 >= y2))[0]
    a, b, c = y0[idx], y1[idx], y2[idx]
    curv = a - 2.0 * b + c
    with np.errstate(divide="ignore", invalid="ignore"):
        shift = np.where(curv < 0, 0.5 * (a - c) / curv, 0.0)
    shift = np.clip(shift, -0.5, 0.5)
    heights = b - 0.25 * (a - c) * shift
    dt = t[1] - t[0] if len(t) > 1 else 0.0
    return Peaks(t[idx + 1] + shift * dt, heights)


@dataclass(frozen=True)
class OrbitExtrema:
    max_norm: float
    min_norm: float
    period: float | None
    lag: int | None = None


def _repeat_lag(heights: np.ndarray, amplitude: float) -> int | None:
    """Smallest lag L at which the last peaks repeat, or None."""
    tol = PEAK_REL_TOL * amplitude
    for lag in range(1, MAX_PEAK_LAG + 1):
        need = MIN_EQUAL_PEAKS + lag
        if len(heights) < need:
            return None
        tail = heights[-need:]
        if np.all(np.abs(tail[lag:] - tail[:-lag]) <= tol):
            return lag
    return None


def po_extrema(traj: Trajectory) -> OrbitExtrema:
    """Norm extremes over the trajectory and the period if the peaks repeat.

    Pass the post-transient window. The period is the mean peak spacing over
    whole repeats, so period-doubled orbits report the doubled period.
    """
    norms = traj.norms()
    hi, lo = float(norms.max()), float(norms.min())
    peaks = find_peaks(traj.t, norms)
    if len(peaks.heights) < 3:
        return OrbitExtrema(hi, lo, None)
    lag = _repeat_lag(peaks.heights, hi - lo)
    if lag is None:
        return OrbitExtrema(hi, lo, None)
    # average over whole periods so unequal sub-intervals do not bias it
    times = peaks.times[-(MIN_EQUAL_PEAKS + lag) :]
    m = (len(times) - 1) // lag
    period = float(times[-1] - times[-1 - m * lag]) / m
    return OrbitExtrema(hi, lo, period, lag)


@dataclass(frozen=True)
class AttractorClass:
    kind: str
    target: str | None = None
    metrics: dict = field(default_factory=dict)

    @property
    def key(self) -> str:
        """Bucket label: ``v1``, ``po:v6``, ``chaotic`` or ``unresolved``."""
        if self.kind == EQUILIBRIUM:
            return self.target
        if self.kind == PERIODIC:
            return f"po:{self.target}"
        if self.kind == CHAOTIC:
            return "chaotic"
        return "unresolved"


def nearest_equilibrium(p: Params, point, feasible_only: bool = True) -> tuple[str, float]:
    best, dist = None, math.inf
    for e in eqm.all_equilibria(p):
        if feasible_only and not e.feasible:
            continue
        d = float(np.linalg.norm(e.reported_state() - point))
        if d < dist:
            best, dist = e.name, d
    return best, dist


def classify_trajectory(
    p: Params,
    traj: Trajectory,
    transient: float,
    lle_config: LleConfig | None = CLASSIFY_LLE,
) -> AttractorClass:
    final = traj.final
    f = np.empty(7)
    _kernels.rhs(final, p.as_array(), f)
    res = float(np.linalg.norm(f))
    metrics = {"final_residual": res}

    name, dist = nearest_equilibrium(p, final)
    if res < RHS_TOL and dist < MATCH_TOL:
        metrics["distance"] = dist
        return AttractorClass(EQUILIBRIUM, name, metrics)

    win = traj.window(transient)
    ext = po_extrema(win)
    metrics.update(po_max=ext.max_norm, po_min=ext.min_norm, period=ext.period)
    if ext.period is not None and ext.max_norm - ext.min_norm > MIN_AMPLITUDE:
        host, _ = nearest_equilibrium(p, win.states.mean(axis=0))
        metrics["lag"] = ext.lag
        return AttractorClass(PERIODIC, host, metrics)

    if lle_config is not None:
        try:
            res_lle = lle(p, final, lle_config)
        except LyapunovError as exc:
            metrics["error"] = str(exc)
            return AttractorClass(UNRESOLVED, None, metrics)
        metrics["lle"] = res_lle.lle
        if res_lle.lle > LLE_CHAOS_THRESHOLD:
            return AttractorClass(CHAOTIC, None, metrics)
    return AttractorClass(UNRESOLVED, None, metrics)


def classify_attractor(
    p: Params,
    s0,
    cfg: IntegratorConfig = IntegratorConfig(),
    lle_config: LleConfig | None = CLASSIFY_LLE,
) -> AttractorClass:
    """Integrate to ``cfg.t_end`` and decide what the orbit settled on.

    In order: a feasible equilibrium (residual below 1e-8 and within 1e-5 of
    a closed-form point); a periodic orbit (ten repeating norm maxima,
    allowing period multiples up to 8); chaos (positive LLE above 1e-3);
    otherwise unresolved.
    """
    try:
        traj = integrate(p, s0, cfg)
    except IntegrationError as exc:
        return AttractorClass(UNRESOLVED, None, {"error": str(exc)})
    return classify_trajectory(p, traj, cfg.transient_fraction * cfg.t_end, lle_config)
