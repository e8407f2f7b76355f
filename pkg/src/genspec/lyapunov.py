"""Largest Lyapunov exponent from the variational equation.

The state is integrated together with one tangent vector ``v``,
``dv/dt = J(s(t)) v``, using the analytic Jacobian. Every renormalization
interval the tangent is rescaled to unit length and ``log |v|`` accumulated;
the exponent is the accumulated log-growth divided by the elapsed time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from genspec import _kernels
from genspec.model import Params, check_state


class LyapunovError(RuntimeError):
    pass


@dataclass(frozen=True)
class LleConfig:
    transient: float = 2000.0
    accumulation: float = 20000.0
    renorm_interval: float = 1.0
    window_fraction: float = 0.25
    tolerance: float = 1e-3
    rel_tol: float = 1e-9
    abs_tol: float = 1e-11
    max_step: float = 10.0
    max_steps: int = 50_000_000

    def __post_init__(self):
        for name in ("accumulation", "renorm_interval", "tolerance", "rel_tol", "abs_tol", "max_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.transient < 0:
            raise ValueError("transient must be non-negative")
        if not 0 < self.window_fraction <= 1:
            raise ValueError("window_fraction must be in (0, 1]")
        if self.accumulation < 10 * self.renorm_interval:
            raise ValueError("accumulation time must span many renormalization intervals")


@dataclass(frozen=True)
class LleResult:
    lle: float
    history: np.ndarray
    converged: bool
    final_state: np.ndarray

    @property
    def drift(self) -> float:
        """Spread of the running estimate over the convergence window."""
        return _window_drift(self.history, 0.25)


def _window_drift(history: np.ndarray, fraction: float) -> float:
    n = len(history)
    if n == 0:
        return np.inf
    tail = history[max(0, n - max(1, int(round(fraction * n)))) :]
    return float(tail.max() - tail.min())


def initial_tangent(seed: int | None = None) -> np.ndarray:
    """Unit tangent vector: the normalized diagonal, or random for a given seed."""
    if seed is None:
        v = np.ones(7)
    else:
        v = np.random.default_rng(seed).standard_normal(7)
    return v / np.linalg.norm(v)


def lle(p: Params, s0, cfg: LleConfig = LleConfig(), tangent=None) -> LleResult:
    """Largest Lyapunov exponent of the orbit through ``s0``.

    Raises :class:`LyapunovError` when the integration fails; slow
    convergence is reported through ``converged`` instead.
    """
    s0 = check_state(s0)
    v = initial_tangent() if tangent is None else np.asarray(tangent, dtype=float)
    if v.shape != (7,) or not np.linalg.norm(v) > 0:
        raise ValueError("tangent must be a non-zero 7-vector")
    u = np.concatenate([s0, v / np.linalg.norm(v)])
    history, filled, status = _kernels.lle_loop(
        _kernels.tangent_rhs,
        u,
        p.as_array(),
        cfg.transient,
        cfg.accumulation,
        cfg.renorm_interval,
        cfg.rel_tol,
        cfg.abs_tol,
        cfg.max_step,
        cfg.max_steps,
    )
    if status != _kernels.OK:
        raise LyapunovError(
            f"LLE integration failed after {filled} intervals: {_kernels.STATUS_MESSAGES[status]}"
        )
    drift = _window_drift(history, cfg.window_fraction)
    return LleResult(
        lle=float(history[-1]),
        history=history,
        converged=bool(drift < cfg.tolerance),
        final_state=u[:7].copy(),
    )
