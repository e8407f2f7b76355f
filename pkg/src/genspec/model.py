"""Nondimensional generalist/specialist host-pathogen model.

State order is fixed everywhere (matrices, CSV columns, arrays)::

    (x1, x2, ys1, y1, y2, zs, z)

``x1``, ``x2`` are uninfected cells, ``ys1`` cells infected by the specialist,
``y1``, ``y2`` cells infected by the generalist, ``zs`` and ``z`` the
specialist and generalist virions.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from genspec import _kernels

STATE_NAMES = ("x1", "x2", "ys1", "y1", "y2", "zs", "z")
PARAM_NAMES = (
    "beta1",
    "beta2",
    "alpha",
    "alpha_s",
    "mu",
    "gamma1_s",
    "gamma1",
    "gamma2",
    "kappa1",
    "kappa2",
    "nu_s",
    "nu",
    "zeta_s",
    "zeta",
)

#: Negative components above this are integration noise and get clamped.
NEGATIVITY_TOL = 1e-9


class ModelAssumptionError(ValueError):
    """Parameters violate the positivity/ordering assumptions of the model."""


@dataclass(frozen=True)
class DimensionalParams:
    """Rates and sizes of the dimensional model, before rescaling."""

    beta1: float
    beta2: float
    delta1: float
    delta2: float
    K: float
    alpha: float
    alpha_s: float
    mu: float
    gamma1_s: float
    gamma1: float
    gamma2: float
    kappa_s: float
    kappa1: float
    kappa2: float
    nu_s: float
    nu: float
    zeta_s: float
    zeta: float

    def __post_init__(self):
        bad = [f.name for f in dataclasses.fields(self) if not getattr(self, f.name) > 0]
        if bad:
            raise ModelAssumptionError(f"non-positive dimensional parameters: {bad}")
        if not (self.beta1 > self.delta1 and self.beta2 > self.delta2):
            raise ModelAssumptionError("uninfected cells must persist: need beta_i > delta_i")
        if self.beta1 == self.beta2 or self.delta1 == self.delta2:
            raise ModelAssumptionError("cell types must differ: beta1 != beta2, delta1 != delta2")


@dataclass(frozen=True)
class Params:
    """The 14 dimensionless parameters of the rescaled system.

    ``alpha`` and ``alpha_s`` (generalist and specialist infection rates) are
    the bifurcation parameters; use :meth:`with_rates` to move along them.
    """

    beta1: float
    beta2: float
    alpha: float
    alpha_s: float
    mu: float
    gamma1_s: float
    gamma1: float
    gamma2: float
    kappa1: float
    kappa2: float
    nu_s: float
    nu: float
    zeta_s: float
    zeta: float

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            if not (isinstance(value, (int, float, np.floating)) and math.isfinite(value)):
                raise ModelAssumptionError(f"{name} must be a finite number, got {value!r}")
            if value <= 0:
                raise ModelAssumptionError(f"{name} must be positive, got {value}")
        if not self.nu_s < 1:
            raise ModelAssumptionError(f"need nu_s < 1, got {self.nu_s}")
        if not (self.nu < self.kappa1 and self.nu < self.kappa2):
            raise ModelAssumptionError("need nu < kappa1 and nu < kappa2")
        a_coef = self.gamma1 * self.kappa1 / (self.mu + self.gamma1) - self.nu
        if a_coef <= 0:
            warnings.warn(
                "A <= 0 (mutation rate too large relative to burst/MOI); "
                "coex-1 equilibrium will be infeasible",
                stacklevel=3,
            )

    @classmethod
    def eq7(cls, alpha: float = 1.0, alpha_s: float = 1.0) -> Params:
        """Reference parameter set with the infection rates left free."""
        return cls(
            beta1=1.5,
            beta2=2.0,
            alpha=alpha,
            alpha_s=alpha_s,
            mu=0.1,
            gamma1_s=0.25,
            gamma1=0.25,
            gamma2=0.25,
            kappa1=1.0,
            kappa2=1.0,
            nu_s=0.5,
            nu=0.5,
            zeta_s=0.22,
            zeta=0.22,
        )

    def with_rates(self, alpha: float | None = None, alpha_s: float | None = None) -> Params:
        changes = {}
        if alpha is not None:
            changes["alpha"] = float(alpha)
        if alpha_s is not None:
            changes["alpha_s"] = float(alpha_s)
        return dataclasses.replace(self, **changes)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=float)

    def as_dict(self) -> dict[str, float]:
        return {n: float(getattr(self, n)) for n in PARAM_NAMES}

    @property
    def x2_capacity(self) -> float:
        """Virus-free carrying capacity of the second cell type."""
        return self.beta1 / self.beta2


def nondimensionalize(d: DimensionalParams) -> Params:
    """Rescale time by ``1/(beta1 - delta1)``, cells by ``x_max`` and virions
    by ``x_max * kappa_s``."""
    r = d.beta1 - d.delta1
    scale = d.kappa_s * d.K / d.beta1
    return Params(
        beta1=(d.beta2 - d.delta2) / r,
        beta2=d.beta2 / d.beta1,
        alpha=scale * d.alpha,
        alpha_s=scale * d.alpha_s,
        mu=d.mu / r,
        gamma1_s=d.gamma1_s / r,
        gamma1=d.gamma1 / r,
        gamma2=d.gamma2 / r,
        kappa1=d.kappa1 / d.kappa_s,
        kappa2=d.kappa2 / d.kappa_s,
        nu_s=d.nu_s / d.kappa_s,
        nu=d.nu / d.kappa_s,
        zeta_s=d.zeta_s / r,
        zeta=d.zeta / r,
    )


def as_state(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if s.shape != (7,):
        raise ValueError(f"state must have 7 components, got shape {s.shape}")
    return s


def check_state(s, tol: float = NEGATIVITY_TOL) -> np.ndarray:
    """Validate nonnegativity to ``-tol``; tiny negatives are clamped to zero."""
    s = as_state(s)
    if not np.all(np.isfinite(s)):
        raise ValueError("state has non-finite components")
    if np.any(s < -tol):
        raise ValueError(f"state has negative components beyond {tol}: {s}")
    return np.maximum(s, 0.0)


def rhs(p: Params, s) -> np.ndarray:
    """Time derivative of the state."""
    s = check_state(s)
    out = np.empty(7)
    _kernels.rhs(s, p.as_array(), out)
    return out


def raw_rhs(p: Params, s) -> np.ndarray:
    """:func:`rhs` without the orthant check."""
    out = np.empty(7)
    _kernels.rhs(as_state(s), p.as_array(), out)
    return out


def jacobian(p: Params, s) -> np.ndarray:
    """Analytic 7x7 Jacobian of :func:`rhs`, rows/columns in state order."""
    s = check_state(s)
    out = np.empty((7, 7))
    _kernels.jacobian(s, p.as_array(), out)
    return out


def raw_jacobian(p: Params, s) -> np.ndarray:
    """Jacobian without the orthant check, for infeasible equilibria."""
    out = np.empty((7, 7))
    _kernels.jacobian(as_state(s), p.as_array(), out)
    return out


def state_norm(s) -> float:
    return float(np.linalg.norm(np.asarray(s, dtype=float)))


def reference_state(p: Params, zs0: float = 0.5, z0: float = 0.5) -> np.ndarray:
    """Virus-free capacities for the cells plus the given viral loads."""
    return np.array([1.0, p.x2_capacity, 0.0, 0.0, 0.0, zs0, z0])


# parameter files


def parse_params_text(text: str, *, base: dict[str, float] | None = None) -> Params:
    """Parse ``key=value`` lines (``#`` comments allowed).

    Without ``base`` all 14 keys are required; with ``base`` the file only
    overrides.
    """
    values = dict(base or {})
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, value = parse_assignment(line, where=f"line {lineno}")
        values[key] = value
    missing = [n for n in PARAM_NAMES if n not in values]
    if missing:
        raise KeyError(f"missing parameters: {', '.join(missing)}")
    return Params(**values)


def parse_assignment(item: str, where: str = "") -> tuple[str, float]:
    if "=" not in item:
        raise ValueError(f"expected key=value{' at ' + where if where else ''}: {item!r}")
    key, value = (part.strip() for part in item.split("=", 1))
    if key not in PARAM_NAMES:
        raise KeyError(f"unknown parameter {key!r}; valid keys: {', '.join(PARAM_NAMES)}")
    try:
        return key, float(value)
    except ValueError:
        raise ValueError(f"bad value for {key}: {value!r}") from None


def load_params(path: str | Path, *, base: dict[str, float] | None = None) -> Params:
    return parse_params_text(Path(path).read_text(), base=base)


def dump_params(p: Params) -> str:
    return "".join(f"{k}={v!r}\n" for k, v in p.as_dict().items())
