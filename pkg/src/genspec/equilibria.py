"""Closed-form equilibria of the nondimensional model.

There are nine critical points ``v0 .. v8``. Each fixes which of
``x1, x2, z, zs`` vanish and solves the reduced algebraic system for the rest;
the infected-cell components then follow from::

    y1 = (C / mu) x1 z,   y2 = (alpha / gamma2) x2 z,
    ys1 = (x1 / gamma1_s) (C z + alpha_s zs)

The two coexistence points ``v7``/``v8`` come from a quadratic in ``x1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from genspec import _kernels
from genspec.model import Params

NAMES = ("v0", "v1", "v2", "v3", "v4", "v5", "v6", "v7", "v8")
LABELS = {
    "v0": "trivial",
    "v1": "v-free-1",
    "v2": "gen-free-1",
    "v3": "coex-1",
    "v4": "v-free-2",
    "v5": "spec-free",
    "v6": "gen-free-2",
    "v7": "coex-2",
    "v8": "coex-3",
}

FEASIBILITY_TOL = 1e-12
COLLISION_TOL = 1e-8
FOLD_TOL = 1e-10
LINEAR_TOL = 1e-12
POLE_TOL = 1e-12


@dataclass(frozen=True)
class DerivedConstants:
    A: float
    B: float
    C: float
    D: float
    phi2: float
    phi1: float
    phi0: float


@dataclass(frozen=True)
class CoexistenceRoots:
    """Real roots of the coexistence quadratic, largest first.

    ``fold`` marks a (numerically) double root: the saddle-node where the two
    coexistence equilibria are born.
    """

    roots: tuple[float, ...]
    discriminant: float
    fold: bool = False


@dataclass(frozen=True)
class Equilibrium:
    name: str
    state: np.ndarray = field(repr=False)
    feasible: bool
    residual: float
    collides_with: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        return LABELS[self.name]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.state))

    def reported_state(self) -> np.ndarray:
        """State with round-off negatives clamped (feasible points only)."""
        return np.maximum(self.state, 0.0) if self.feasible else self.state.copy()


def derived_constants(p: Params) -> DerivedConstants:
    a, a_s = p.alpha, p.alpha_s
    A = a * (p.gamma1 * p.kappa1 / (p.mu + p.gamma1) - p.nu)
    B = a * (p.kappa2 - p.nu)
    C = a * p.mu / (p.mu + p.gamma1)
    D = a_s * (p.nu_s - 1.0)
    if not (D < 0 and B > 0 and C > 0):
        raise ValueError(f"derived constants out of range: B={B}, C={C}, D={D}")
    q = D * a + C * a_s
    phi2 = (A - B) * (q * p.beta2 - D * a)
    phi1 = (A - B) * a * p.zeta_s * (p.beta2 - 1.0) + q * (B * p.beta1 - p.zeta * p.beta2) + D * a * (
        p.zeta - B
    )
    phi0 = a * p.zeta_s * ((1.0 - p.beta2) * p.zeta + B * (p.beta1 - 1.0))
    return DerivedConstants(A, B, C, D, phi2, phi1, phi0)


def quadratic_discriminant(p: Params) -> float:
    k = derived_constants(p)
    return k.phi1**2 - 4.0 * k.phi2 * k.phi0


def coexistence_roots(p: Params) -> CoexistenceRoots:
    k = derived_constants(p)
    phi2, phi1, phi0 = k.phi2, k.phi1, k.phi0
    scale = max(abs(phi2), abs(phi1), abs(phi0))
    if scale == 0.0:
        raise ValueError("coexistence quadratic is degenerate (all coefficients vanish)")
    if abs(phi2) < LINEAR_TOL * scale:
        if abs(phi1) < LINEAR_TOL * scale:
            raise ValueError("coexistence equation has no x1 dependence")
        return CoexistenceRoots((-phi0 / phi1,), math.nan)

    disc = phi1 * phi1 - 4.0 * phi2 * phi0
    disc_scale = phi1 * phi1 + abs(4.0 * phi2 * phi0)
    if abs(disc) <= FOLD_TOL * disc_scale:
        r = -phi1 / (2.0 * phi2)
        return CoexistenceRoots((r, r), disc, fold=True)
    if disc < 0:
        return CoexistenceRoots((), disc)
    # cancellation-free pair
    sq = math.sqrt(disc)
    q = -0.5 * (phi1 + math.copysign(sq, phi1))
    r1, r2 = q / phi2, phi0 / q
    return CoexistenceRoots((max(r1, r2), min(r1, r2)), disc)


def _fill_infected(p: Params, k: DerivedConstants, x1, x2, z, zs) -> np.ndarray:
    y1 = k.C / p.mu * x1 * z
    y2 = p.alpha / p.gamma2 * x2 * z
    ys1 = x1 / p.gamma1_s * (k.C * z + p.alpha_s * zs)
    return np.array([x1, x2, ys1, y1, y2, zs, z], dtype=float)


def residual(p: Params, state: np.ndarray) -> float:
    if not np.all(np.isfinite(state)):
        return math.inf
    out = np.empty(7)
    _kernels.rhs(np.asarray(state, dtype=float), p.as_array(), out)
    return float(np.linalg.norm(out))


def feasibility(e: Equilibrium | np.ndarray) -> bool:
    state = e.state if isinstance(e, Equilibrium) else np.asarray(e)
    return bool(np.all(np.isfinite(state)) and np.all(state >= -FEASIBILITY_TOL))


def _coexistence_state(p: Params, k: DerivedConstants, x1: float) -> np.ndarray:
    x2 = (p.zeta - k.A * x1) / k.B
    total = x1 + x2
    z = (p.beta1 - p.beta2 * total) / p.alpha
    zs = (1.0 - p.beta1 + (p.beta2 - 1.0) * total) / p.alpha_s
    return _fill_infected(p, k, x1, x2, z, zs)


def equilibrium_states(p: Params) -> dict[str, np.ndarray]:
    """Raw states keyed by name; ``v7``/``v8`` only when real roots exist."""
    k = derived_constants(p)
    a, a_s = p.alpha, p.alpha_s
    b1, b2 = p.beta1, p.beta2
    zeta, zeta_s, D = p.zeta, p.zeta_s, k.D

    states = {
        "v0": np.zeros(7),
        "v1": _fill_infected(p, k, 1.0, 0.0, 0.0, 0.0),
        "v2": _fill_infected(p, k, -zeta_s / D, 0.0, 0.0, 1.0 / a_s + zeta_s / (a_s * D)),
    }

    # coex-1: x1 from the viral balance, then zs, then z; the zs denominator
    # can vanish on a line in the rate plane (v3 escapes to infinity there)
    x1 = zeta / k.A
    terms = (a * zeta_s / (k.C * x1), a_s, D * a / k.C)
    den = sum(terms)
    singular = abs(den) <= POLE_TOL * sum(abs(t) for t in terms)
    zs = math.inf if singular else (1.0 - x1) / den
    z = (1.0 - x1 - a_s * zs) / a
    states["v3"] = _fill_infected(p, k, x1, 0.0, z, zs)

    states["v4"] = _fill_infected(p, k, 0.0, b1 / b2, 0.0, 0.0)
    x2 = zeta / k.B
    states["v5"] = _fill_infected(p, k, 0.0, x2, b1 / a - b2 * zeta / (a * k.B), 0.0)
    states["v6"] = _fill_infected(p, k, -zeta_s / D, b1 / b2 + zeta_s / D, 0.0, (b2 - b1) / (a_s * b2))

    roots = coexistence_roots(p).roots
    for name, r in zip(("v7", "v8"), roots):
        states[name] = _coexistence_state(p, k, r)
    return states


def all_equilibria(p: Params) -> list[Equilibrium]:
    states = equilibrium_states(p)
    names = list(states)
    collisions: dict[str, list[str]] = {n: [] for n in names}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            with np.errstate(invalid="ignore"):
                close = np.linalg.norm(states[a] - states[b]) < COLLISION_TOL
            if close:
                collisions[a].append(b)
                collisions[b].append(a)
    return [
        Equilibrium(
            name=n,
            state=s,
            feasible=feasibility(s),
            residual=residual(p, s),
            collides_with=tuple(collisions[n]),
        )
        for n, s in states.items()
    ]


def equilibrium(p: Params, name: str) -> Equilibrium | None:
    """A single named equilibrium, or None if it does not exist (v7/v8)."""
    for e in all_equilibria(p):
        if e.name == name:
            return e
    return None


def feasible_equilibria(p: Params) -> list[Equilibrium]:
    return [e for e in all_equilibria(p) if e.feasible]
