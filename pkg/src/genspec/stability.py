"""Linear stability of the equilibria and the analytic bifurcation curves.

Spectra are always taken from the full 7x7 Jacobian. The transcritical
curves are closed forms in the two infection rates; the Hopf locus of the
spec-free state ``v5`` is found from the Routh-Hurwitz condition on its
cubic factor, other Hopf points by scanning spectra.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from genspec import equilibria as eqm
from genspec.model import Params, raw_jacobian

MARGINAL_TOL = 1e-7
HOPF_OMEGA_MIN = 1e-6

STABLE = "stable"
UNSTABLE = "unstable"
SADDLE = "saddle"
MARGINAL = "marginal"


class UndefinedCurveError(ValueError):
    """Curve has a pole (or leaves the positive quadrant) at the requested point."""


class NoHopfInRange(RuntimeError):
    pass


class NoIntersection(RuntimeError):
    pass


@dataclass(frozen=True)
class StabilityReport:
    name: str
    eigenvalues: np.ndarray
    max_real: float
    classification: str

    @property
    def stable(self) -> bool:
        return self.classification == STABLE


def spectrum(p: Params, state) -> np.ndarray:
    """Eigenvalues sorted by decreasing real part, then decreasing imaginary part."""
    ev = np.linalg.eigvals(raw_jacobian(p, state))
    if not np.all(np.isfinite(ev)):
        raise np.linalg.LinAlgError("eigenvalue computation produced non-finite values")
    order = np.lexsort((-ev.imag, -ev.real))
    return ev[order]


def classify_spectrum(ev: np.ndarray, tol: float = MARGINAL_TOL) -> str:
    re = ev.real
    max_real = re.max()
    if abs(max_real) < tol:
        return MARGINAL
    if max_real < 0:
        return STABLE
    if np.any(re < -tol):
        return SADDLE
    return UNSTABLE


def classify_equilibrium(p: Params, e: eqm.Equilibrium) -> StabilityReport:
    ev = spectrum(p, e.state)
    return StabilityReport(e.name, ev, float(ev.real.max()), classify_spectrum(ev))


def stability_reports(p: Params, feasible_only: bool = True) -> list[StabilityReport]:
    """Reports in table order. Points that do not exist (non-finite) are skipped."""
    return [
        classify_equilibrium(p, e)
        for e in eqm.all_equilibria(p)
        if (e.feasible or not feasible_only) and np.all(np.isfinite(e.state))
    ]


def stable_equilibria(p: Params) -> list[str]:
    return [r.name for r in stability_reports(p) if r.stable]


# analytic curves


def _k0(p: Params) -> float:
    return (p.kappa1 - p.nu) * p.gamma1 - p.mu * p.nu


def _t13(p, alpha=None):
    return (p.gamma1 + p.mu) * p.zeta / _k0(p)


def _t12(p, alpha=None):
    return p.zeta_s / (1.0 - p.nu_s)


def _t26(p, alpha=None):
    return p.beta2 / p.beta1 * p.zeta_s / (1.0 - p.nu_s)


def _t23(p, alpha):
    return p.zeta_s / p.zeta * _k0(p) / ((p.gamma1 + p.mu) * (1.0 - p.nu_s)) * alpha


def _t37(p, alpha):
    k0 = _k0(p)
    g = p.gamma1 + p.mu
    k1 = (p.beta1 - 1.0) * (1.0 - p.nu_s) * p.gamma1 - (1.0 + (p.beta1 - 1.0) * p.nu_s) * p.mu
    k2 = g * ((1.0 + p.nu_s * (p.beta2 - 1.0)) * p.mu - (1.0 - p.nu_s) * (p.beta2 - 1.0) * p.gamma1) * p.zeta
    num = alpha * (k0**2 * (p.beta1 - 1.0) * alpha - k0 * p.zeta * (p.beta2 - 1.0) * g)
    den = k0 * k1 * alpha + k2
    if den == 0.0:
        raise UndefinedCurveError(f"T37 has a pole at alpha={alpha}")
    return p.zeta_s / p.zeta * num / den


def _t45(p, alpha=None):
    return p.beta2 / p.beta1 * p.zeta / (p.kappa2 - p.nu)


def _t57(p, alpha=None):
    return (p.beta2 - 1.0) / (p.beta1 - 1.0) * p.zeta / (p.kappa2 - p.nu)


def _t67(p, alpha):
    g = p.mu + p.gamma1
    den = (1.0 - p.nu_s) * g * (p.beta2 * p.zeta - p.beta1 * alpha * (p.kappa2 - p.nu))
    if den == 0.0:
        raise UndefinedCurveError(f"T67 has a pole at alpha={alpha}")
    return alpha * p.beta2 * p.zeta_s * (p.kappa1 * p.gamma1 - p.kappa2 * g) / den


@dataclass(frozen=True)
class BifurcationCurve:
    """A curve in the (alpha, alpha_s) plane.

    ``axis == "alpha"``: vertical line, ``alpha`` is a constant.
    ``axis == "alpha_s"``: ``alpha_s`` given as a function of ``alpha``
    (constant for horizontal lines, ``depends_on_alpha`` False).
    """

    label: str
    kind: str
    axis: str
    pair: tuple[str, ...]
    rule: Callable
    depends_on_alpha: bool = False

    def value(self, p: Params, alpha: float | None = None) -> float:
        if self.depends_on_alpha and alpha is None:
            raise ValueError(f"{self.label} needs alpha")
        v = self.rule(p, alpha)
        if not math.isfinite(v):
            raise UndefinedCurveError(f"{self.label} undefined at alpha={alpha}")
        return float(v)

    def point(self, p: Params, t: float) -> tuple[float, float]:
        """(alpha, alpha_s) on the curve; ``t`` is the free coordinate."""
        if self.axis == "alpha":
            return self.value(p), t
        return t, self.value(p, t)


TRANSCRITICAL = {
    "T12": BifurcationCurve("T12", "transcritical", "alpha_s", ("v1", "v2"), _t12),
    "T13": BifurcationCurve("T13", "transcritical", "alpha", ("v1", "v3"), _t13),
    "T23": BifurcationCurve("T23", "transcritical", "alpha_s", ("v2", "v3"), _t23, True),
    "T26": BifurcationCurve("T26", "transcritical", "alpha_s", ("v2", "v6"), _t26),
    "T37": BifurcationCurve("T37", "transcritical", "alpha_s", ("v3", "v7"), _t37, True),
    "T45": BifurcationCurve("T45", "transcritical", "alpha", ("v4", "v5"), _t45),
    "T57": BifurcationCurve("T57", "transcritical", "alpha", ("v5", "v7"), _t57),
    "T67": BifurcationCurve("T67", "transcritical", "alpha_s", ("v6", "v7"), _t67, True),
}


def transcritical_value(label: str, p: Params, alpha: float | None = None) -> float:
    """Critical rate on a transcritical curve.

    Vertical curves (T13, T45, T57) return the critical ``alpha``; the others
    return ``alpha_s``, which for T23, T37 and T67 depends on ``alpha``.
    """
    try:
        curve = TRANSCRITICAL[label]
    except KeyError:
        raise KeyError(f"unknown curve {label!r}; known: {sorted(TRANSCRITICAL)}") from None
    return curve.value(p, alpha)


def v5_cubic(p: Params) -> tuple[float, float, float, float]:
    """Coefficients (a3, a2, a1, a0) of the cubic factor of the v5 spectrum."""
    a, k2, nu = p.alpha, p.kappa2, p.nu
    b1, b2, g2, z = p.beta1, p.beta2, p.gamma2, p.zeta
    d = k2 - nu
    a3 = a * d**2
    a2 = d * ((a * k2 + b2) * z + g2 * a * d)
    a1 = (b2 * (k2 + nu) * z - d * (a * b1 * nu - b2 * g2)) * z
    a0 = d * (b1 * a * d - z * b2) * g2 * z
    return a3, a2, a1, a0


def _hurwitz_margin(p: Params) -> float:
    a3, a2, a1, a0 = v5_cubic(p)
    return a2 * a1 - a3 * a0


def hopf_locus_v5(p: Params, upper: float = 10.0, n_bracket: int = 400, xtol: float = 1e-10) -> float:
    """Generalist infection rate of the Hopf bifurcation of ``v5``.

    Independent of ``alpha_s``. Searched on ``(T45, upper]``.
    """
    lo = _t45(p) * (1.0 + 1e-9)
    grid = np.linspace(lo, upper, n_bracket)
    g = [_hurwitz_margin(p.with_rates(alpha=a)) for a in grid]
    for i in range(len(grid) - 1):
        if g[i] == 0.0:
            return float(grid[i])
        if g[i] * g[i + 1] < 0:
            root = brentq(lambda a: _hurwitz_margin(p.with_rates(alpha=a)), grid[i], grid[i + 1], xtol=xtol)
            a3, a2, a1, a0 = v5_cubic(p.with_rates(alpha=root))
            if a1 / a3 > 0:
                return float(root)
    raise NoHopfInRange(f"no Hopf bifurcation of v5 for alpha in ({lo:.6g}, {upper}]")


HOPF_V5 = BifurcationCurve("H5", "hopf", "alpha", ("v5",), lambda p, alpha=None: hopf_locus_v5(p))

CURVES = {**TRANSCRITICAL, "H5": HOPF_V5}


# numerical Hopf detection


@dataclass(frozen=True)
class HopfPoint:
    equilibrium: str
    axis: str
    value: float
    omega: float
    alpha: float
    alpha_s: float


@dataclass(frozen=True)
class HopfScan:
    points: list[HopfPoint]
    gaps: list[tuple[float, float]]


def _complex_margin(p: Params, name: str, feasible_only: bool) -> tuple[float, float]:
    """(max real part over complex pairs, matching |Im|); NaN when unavailable."""
    e = eqm.equilibrium(p, name)
    if e is None or (feasible_only and not e.feasible):
        return math.nan, math.nan
    ev = spectrum(p, e.state)
    cplx = ev[np.abs(ev.imag) > HOPF_OMEGA_MIN]
    if cplx.size == 0:
        return math.nan, math.nan
    k = int(np.argmax(cplx.real))
    return float(cplx.real[k]), float(abs(cplx.imag[k]))


def hopf_scan(
    p: Params,
    name: str,
    axis: str,
    lo: float,
    hi: float,
    n: int = 200,
    tol: float = 1e-8,
    feasible_only: bool = True,
) -> HopfScan:
    """Locate Hopf points of equilibrium ``name`` while one rate varies.

    Samples ``n`` values of ``axis`` ("alpha" or "alpha_s"), tracks the
    largest real part among complex-conjugate eigenvalues and bisects every
    sign change. Stretches where the equilibrium is absent, infeasible or has
    no complex pair are returned as gaps.
    """
    if axis not in ("alpha", "alpha_s"):
        raise ValueError("axis must be 'alpha' or 'alpha_s'")

    def at(v):
        return p.with_rates(**{axis: v})

    def margin(v):
        return _complex_margin(at(v), name, feasible_only)[0]

    grid = np.linspace(lo, hi, n)
    m = np.array([margin(v) for v in grid])
    points = []
    gaps = []
    gap_start = None
    for i, v in enumerate(grid):
        if math.isnan(m[i]):
            if gap_start is None:
                gap_start = v
        elif gap_start is not None:
            gaps.append((gap_start, grid[i - 1]))
            gap_start = None
    if gap_start is not None:
        gaps.append((gap_start, grid[-1]))

    for i in range(n - 1):
        if math.isnan(m[i]) or math.isnan(m[i + 1]) or m[i] * m[i + 1] > 0:
            continue
        a, b, fa = grid[i], grid[i + 1], m[i]
        ok = True
        while b - a > tol:
            c = 0.5 * (a + b)
            fc = margin(c)
            if math.isnan(fc):
                ok = False
                break
            if fa * fc <= 0:
                b = c
            else:
                a, fa = c, fc
        if not ok:
            continue
        v = 0.5 * (a + b)
        re, omega = _complex_margin(at(v), name, feasible_only)
        if math.isnan(re) or omega <= HOPF_OMEGA_MIN or abs(re) > 1e-5:
            continue
        q = at(v)
        points.append(HopfPoint(name, axis, float(v), omega, q.alpha, q.alpha_s))
    return HopfScan(points, gaps)


# codimension-two candidates


def _as_curve(c) -> BifurcationCurve:
    return CURVES[c] if isinstance(c, str) else c


def curve_intersection(
    curve_a, curve_b, p: Params, bracket: tuple[float, float], xtol: float = 1e-10
) -> tuple[float, float, str, str]:
    """Intersection of two curves; ``bracket`` bounds the alpha coordinate.

    Returns (alpha, alpha_s, label_a, label_b).
    """
    a, b = _as_curve(curve_a), _as_curve(curve_b)
    if a.label == b.label:
        raise ValueError(f"degenerate intersection: {a.label} with itself")
    lo, hi = bracket
    if a.axis == "alpha" and b.axis == "alpha":
        raise NoIntersection(f"{a.label} and {b.label} are both vertical")
    if b.axis == "alpha":
        a, b = b, a
        swapped = True
    else:
        swapped = False

    if a.axis == "alpha":
        alpha = a.value(p)
        if not lo <= alpha <= hi:
            raise NoIntersection(f"{a.label} at alpha={alpha} lies outside {bracket}")
        alpha_s = b.value(p, alpha)
    else:
        def diff(x):
            return a.value(p, x) - b.value(p, x)

        if not a.depends_on_alpha and not b.depends_on_alpha:
            raise NoIntersection(f"{a.label} and {b.label} are parallel")
        f_lo, f_hi = diff(lo), diff(hi)
        if f_lo * f_hi > 0:
            raise NoIntersection(f"{a.label} and {b.label} do not cross on {bracket}")
        alpha = brentq(diff, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
        alpha_s = a.value(p, alpha)
    labels = (b.label, a.label) if swapped else (a.label, b.label)
    return float(alpha), float(alpha_s), labels[0], labels[1]
