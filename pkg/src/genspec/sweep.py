"""Parameter sweeps: 1-D bifurcation tables, basin probabilities, 2-D maps.

Grid work fans out over a process pool when ``workers > 1``. Results are
always merged back in input order (row-major over the grid), so output does
not depend on the worker count.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from genspec import equilibria as eqm
from genspec import stability as st
from genspec.dynamics import (
    CHAOTIC,
    CLASSIFY_LLE,
    PERIODIC,
    UNRESOLVED,
    AttractorClass,
    IntegratorConfig,
    classify_attractor,
)
from genspec.lyapunov import LleConfig, LyapunovError, lle
from genspec.model import Params, reference_state

log = logging.getLogger(__name__)

AXES = ("alpha", "alpha_s")


def _pmap(func, items, workers: int | None):
    items = list(items)
    if not workers or workers <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


# grids


@dataclass(frozen=True)
class Grid2D:
    alpha_range: tuple[float, float]
    n_alpha: int
    alpha_s_range: tuple[float, float]
    n_alpha_s: int

    def __post_init__(self):
        if self.n_alpha < 2 or self.n_alpha_s < 2:
            raise ValueError("grid counts must be at least 2")
        for lo, hi in (self.alpha_range, self.alpha_s_range):
            if not 0 < lo < hi:
                raise ValueError(f"grid range must satisfy 0 < lo < hi, got ({lo}, {hi})")

    @property
    def alphas(self) -> np.ndarray:
        return np.linspace(*self.alpha_range, self.n_alpha)

    @property
    def alpha_ss(self) -> np.ndarray:
        return np.linspace(*self.alpha_s_range, self.n_alpha_s)

    def cells(self) -> list[tuple[float, float]]:
        """(alpha, alpha_s) pairs, alpha_s outer, alpha inner."""
        return [(float(a), float(b)) for b in self.alpha_ss for a in self.alphas]


@dataclass(frozen=True)
class BasinConfig:
    """N x N initial viral loads on the unit square; cells start at their
    virus-free capacities.

    The loads are ``k / N`` for ``k = 1 .. N`` on both axes. Zero loads are
    left out: a strain absent at t=0 can never appear (the specialist only by
    mutation from the generalist), so those runs stay on an invariant face.
    """

    n: int = 5
    integrator: IntegratorConfig = IntegratorConfig()
    lle_config: LleConfig | None = CLASSIFY_LLE

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("basin grid needs n >= 2")

    def initial_loads(self) -> list[tuple[float, float]]:
        """(zs0, z0) pairs, zs0 outer."""
        g = np.arange(1, self.n + 1) / self.n
        return [(float(a), float(b)) for a in g for b in g]


# basin probabilities


@dataclass(frozen=True)
class BasinResult:
    outcomes: list[tuple[float, float, AttractorClass]]
    counts: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def probabilities(self) -> dict[str, float]:
        n = self.total
        return {k: c / n for k, c in self.counts.items()}


def _bucket_order(key: str) -> tuple:
    if key in eqm.NAMES:
        return (0, key)
    if key.startswith("po:"):
        return (1, key)
    return (2 if key == "chaotic" else 3, key)


def _classify_job(job):
    p, s0, cfg, lle_cfg = job
    return classify_attractor(p, s0, cfg, lle_cfg)


def basin_probability(p: Params, cfg: BasinConfig = BasinConfig(), workers: int | None = None) -> BasinResult:
    """Classify the long-run outcome of every initial viral load on the grid."""
    loads = cfg.initial_loads()
    jobs = [(p, reference_state(p, zs0, z0), cfg.integrator, cfg.lle_config) for zs0, z0 in loads]
    classes = _pmap(_classify_job, jobs, workers)
    counts = Counter(c.key for c in classes)
    ordered = {k: counts[k] for k in sorted(counts, key=_bucket_order)}
    return BasinResult([(a, b, c) for (a, b), c in zip(loads, classes)], ordered)


# 2-D maps


@dataclass(frozen=True)
class MapRow:
    alpha: float
    alpha_s: float
    attractor: str
    probability: float


def _map_cell(job):
    p, cfg = job
    try:
        return basin_probability(p, cfg).probabilities()
    except Exception as exc:  # one bad cell must not sink the map
        log.warning("cell alpha=%g alpha_s=%g failed: %s", p.alpha, p.alpha_s, exc)
        return {"unresolved": 1.0}


def stability_map(
    p: Params, grid: Grid2D, cfg: BasinConfig = BasinConfig(), workers: int | None = None
) -> list[MapRow]:
    cells = grid.cells()
    results = _pmap(_map_cell, [(p.with_rates(a, b), cfg) for a, b in cells], workers)
    return [
        MapRow(a, b, key, prob)
        for (a, b), probs in zip(cells, results)
        for key, prob in probs.items()
    ]


def dominant_attractors(rows: list[MapRow]) -> dict[tuple[float, float], str]:
    """Most probable attractor per cell (ties broken by bucket order)."""
    best: dict[tuple[float, float], MapRow] = {}
    for r in rows:
        cur = best.get((r.alpha, r.alpha_s))
        if cur is None or r.probability > cur.probability + 1e-12:
            best[(r.alpha, r.alpha_s)] = r
    return {k: r.attractor for k, r in best.items()}


@dataclass(frozen=True)
class LleRow:
    alpha: float
    alpha_s: float
    lle: float
    converged: bool


def _lle_cell(job):
    p, s0, cfg = job
    try:
        r = lle(p, s0 if s0 is not None else reference_state(p), cfg)
    except LyapunovError as exc:
        log.warning("LLE failed at alpha=%g alpha_s=%g: %s", p.alpha, p.alpha_s, exc)
        return LleRow(p.alpha, p.alpha_s, math.nan, False)
    return LleRow(p.alpha, p.alpha_s, r.lle, r.converged)


def lle_map(
    p: Params,
    grid: Grid2D,
    s0=None,
    cfg: LleConfig = LleConfig(),
    workers: int | None = None,
) -> list[LleRow]:
    """LLE per cell, started from ``s0`` (default: the reference state)."""
    jobs = [(p.with_rates(a, b), s0, cfg) for a, b in grid.cells()]
    return _pmap(_lle_cell, jobs, workers)


# 1-D bifurcation sweeps


@dataclass(frozen=True)
class SweepRow:
    value: float
    equilibrium: str
    norm: float
    stable: bool
    po_max: float = math.nan
    po_min: float = math.nan


@dataclass(frozen=True)
class Crossing:
    label: str
    value: float


@dataclass
class SweepTable:
    axis: str
    rows: list[SweepRow] = field(default_factory=list)
    crossings: list[Crossing] = field(default_factory=list)
    errors: list[tuple[float, str]] = field(default_factory=list)

    def at(self, value: float) -> list[SweepRow]:
        return [r for r in self.rows if r.value == value]

    def stable_at(self, value: float) -> list[str]:
        return [r.equilibrium for r in self.at(value) if r.stable]


def _curve_crossings(p: Params, curve: st.BifurcationCurve, axis: str, lo: float, hi: float, n: int):
    """Where a sweep along ``axis`` meets ``curve``."""
    if curve.axis == axis and not curve.depends_on_alpha:
        try:
            v = curve.value(p)
        except st.UndefinedCurveError:
            return []
        return [v] if lo <= v <= hi else []
    if axis == "alpha_s" and curve.axis == "alpha_s":
        try:
            v = curve.value(p, p.alpha)
        except st.UndefinedCurveError:
            return []
        return [v] if lo <= v <= hi else []
    if axis == "alpha" and curve.depends_on_alpha:

        def gap(a):
            try:
                return curve.value(p, a) - p.alpha_s
            except (st.UndefinedCurveError, ZeroDivisionError):
                return math.nan

        xs = np.linspace(lo, hi, max(n, 50))
        g = np.array([gap(a) for a in xs])
        out = []
        for i in range(len(xs) - 1):
            a, b = g[i], g[i + 1]
            if not (np.isfinite(a) and np.isfinite(b)):
                continue
            if a == 0.0:
                out.append(float(xs[i]))
            elif a * b < 0:
                r = float(brentq(gap, xs[i], xs[i + 1], xtol=1e-12))
                # a sign flip across a pole of the curve is not a crossing
                if abs(gap(r)) < 1e-8 * max(1.0, p.alpha_s):
                    out.append(r)
        return out
    return []


def sweep_crossings(p: Params, axis: str, lo: float, hi: float, n: int = 200) -> list[Crossing]:
    """Analytic curves and numerically located Hopf points met by the sweep."""
    found = []
    for label, curve in st.CURVES.items():
        if label == "H5":
            if axis == "alpha":
                try:
                    v = st.hopf_locus_v5(p)
                except st.NoHopfInRange:
                    continue
                if lo <= v <= hi:
                    found.append(Crossing("H5", v))
            continue
        for v in _curve_crossings(p, curve, axis, lo, hi, n):
            found.append(Crossing(label, v))
    for name in ("v3", "v6", "v7", "v8"):
        for h in st.hopf_scan(p, name, axis, lo, hi, n=n).points:
            found.append(Crossing(f"H:{name}", h.value))
    return sorted(found, key=lambda c: (c.value, c.label))


def _sweep_sample(job):
    p, axis, value, cfg = job
    rows = []
    reports = st.stability_reports(p)
    by_name = {e.name: e for e in eqm.feasible_equilibria(p)}
    for r in reports:
        rows.append(SweepRow(value, r.name, by_name[r.name].norm, r.stable))
    if not any(r.stable for r in reports):
        c = classify_attractor(p, reference_state(p), cfg.integrator, cfg.lle_config)
        hi, lo = c.metrics.get("po_max", math.nan), c.metrics.get("po_min", math.nan)
        if c.kind == PERIODIC:
            rows.append(SweepRow(value, c.key, math.nan, True, hi, lo))
        elif c.kind == CHAOTIC:
            rows.append(SweepRow(value, c.key, math.nan, False, hi, lo))
        elif c.kind == UNRESOLVED and "error" in c.metrics:
            raise RuntimeError(c.metrics["error"])
    return rows


def _safe_sweep_sample(job):
    try:
        return _sweep_sample(job), None
    except Exception as exc:  # keep sweeping; the sample is reported as an error
        return [], str(exc)


def bifurcation_sweep_1d(
    p: Params,
    axis: str,
    lo: float,
    hi: float,
    n: int = 100,
    cfg: BasinConfig = BasinConfig(),
    workers: int | None = None,
) -> SweepTable:
    """Feasible equilibria with norm and stability along one rate.

    Where no equilibrium is stable the reference initial condition is
    simulated and the periodic (``po:<host>``) or chaotic attractor reported
    with its norm extremes.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    if n < 10:
        raise ValueError("a sweep needs at least 10 samples")
    if not 0 < lo < hi:
        raise ValueError("sweep range must satisfy 0 < lo < hi")
    values = np.linspace(lo, hi, n)
    jobs = [(p.with_rates(**{axis: float(v)}), axis, float(v), cfg) for v in values]
    table = SweepTable(axis)
    for v, (rows, err) in zip(values, _pmap(_safe_sweep_sample, jobs, workers)):
        table.rows.extend(rows)
        if err is not None:
            table.errors.append((float(v), err))
    table.crossings = sweep_crossings(p, axis, lo, hi)
    return table


def fold_alpha(p: Params, lo: float, hi: float, n: int = 400, xtol: float = 1e-12) -> list[float]:
    """Values of ``alpha`` in [lo, hi] where the coexistence discriminant changes sign."""

    def disc(a):
        return eqm.quadratic_discriminant(p.with_rates(alpha=a))

    xs = np.linspace(lo, hi, n)
    d = np.array([disc(a) for a in xs])
    roots = []
    for i in range(n - 1):
        if d[i] == 0.0:
            roots.append(float(xs[i]))
        elif d[i] * d[i + 1] < 0:
            roots.append(float(brentq(disc, xs[i], xs[i + 1], xtol=xtol)))
    return roots
