"""Compiled inner loops: vector field, Jacobian, Dormand-Prince 5(4) stepping.

Parameter arrays use the order of ``model.PARAM_NAMES``. Everything here
works on plain float64 arrays so it can be jitted; the public wrappers live
in :mod:`genspec.model`, :mod:`genspec.dynamics` and :mod:`genspec.lyapunov`.
"""

import numpy as np
from numba import njit

# integration status codes
OK = 0
STEP_UNDERFLOW = 1
NEGATIVE_STATE = 2
TOO_MANY_STEPS = 3
NON_FINITE = 4

STATUS_MESSAGES = {
    OK: "ok",
    STEP_UNDERFLOW: "step size underflow",
    NEGATIVE_STATE: "state left the nonnegative orthant beyond tolerance",
    TOO_MANY_STEPS: "maximum number of steps exceeded",
    NON_FINITE: "non-finite values in the solution",
}

NEG_TOL = 1e-9


@njit(cache=True)
def rhs(s, p, out):
    x1, x2, ys1, y1, y2, zs, z = s[0], s[1], s[2], s[3], s[4], s[5], s[6]
    beta1, beta2, a, a_s, mu = p[0], p[1], p[2], p[3], p[4]
    g1s, g1, g2, k1, k2 = p[5], p[6], p[7], p[8], p[9]
    nu_s, nu, zeta_s, zeta = p[10], p[11], p[12], p[13]

    out[0] = x1 * (1.0 - x1 - x2) - a * x1 * z - a_s * x1 * zs
    out[1] = x2 * (beta1 - beta2 * (x1 + x2)) - a * x2 * z
    out[2] = a_s * zs * x1 + mu * y1 - g1s * ys1
    out[3] = a * z * x1 - (mu + g1) * y1
    out[4] = a * z * x2 - g2 * y2
    out[5] = g1s * ys1 - nu_s * a_s * zs * x1 - zeta_s * zs
    out[6] = k1 * g1 * y1 + k2 * g2 * y2 - nu * a * z * (x1 + x2) - zeta * z


@njit(cache=True)
def jacobian(s, p, J):
    x1, x2, zs, z = s[0], s[1], s[5], s[6]
    beta1, beta2, a, a_s, mu = p[0], p[1], p[2], p[3], p[4]
    g1s, g1, g2, k1, k2 = p[5], p[6], p[7], p[8], p[9]
    nu_s, nu, zeta_s, zeta = p[10], p[11], p[12], p[13]

    J[:, :] = 0.0
    J[0, 0] = 1.0 - 2.0 * x1 - x2 - a * z - a_s * zs
    J[0, 1] = -x1
    J[0, 5] = -a_s * x1
    J[0, 6] = -a * x1

    J[1, 0] = -beta2 * x2
    J[1, 1] = beta1 - beta2 * x1 - 2.0 * beta2 * x2 - a * z
    J[1, 6] = -a * x2

    J[2, 0] = a_s * zs
    J[2, 2] = -g1s
    J[2, 3] = mu
    J[2, 5] = a_s * x1

    J[3, 0] = a * z
    J[3, 3] = -(mu + g1)
    J[3, 6] = a * x1

    J[4, 1] = a * z
    J[4, 4] = -g2
    J[4, 6] = a * x2

    J[5, 0] = -nu_s * a_s * zs
    J[5, 2] = g1s
    J[5, 5] = -nu_s * a_s * x1 - zeta_s

    J[6, 0] = -nu * a * z
    J[6, 1] = -nu * a * z
    J[6, 3] = k1 * g1
    J[6, 4] = k2 * g2
    J[6, 6] = -nu * a * (x1 + x2) - zeta


@njit(cache=True)
def tangent_rhs(u, p, out):
    """State (first 7) plus one tangent vector (last 7): du/dt = (f, J v)."""
    rhs(u[:7], p, out[:7])
    x1, x2, zs, z = u[0], u[1], u[5], u[6]
    beta1, beta2, a, a_s, mu = p[0], p[1], p[2], p[3], p[4]
    g1s, g1, g2, k1, k2 = p[5], p[6], p[7], p[8], p[9]
    nu_s, nu, zeta_s, zeta = p[10], p[11], p[12], p[13]
    v0, v1, v2, v3, v4, v5, v6 = u[7], u[8], u[9], u[10], u[11], u[12], u[13]

    out[7] = (1.0 - 2.0 * x1 - x2 - a * z - a_s * zs) * v0 - x1 * v1 - a_s * x1 * v5 - a * x1 * v6
    out[8] = -beta2 * x2 * v0 + (beta1 - beta2 * x1 - 2.0 * beta2 * x2 - a * z) * v1 - a * x2 * v6
    out[9] = a_s * zs * v0 - g1s * v2 + mu * v3 + a_s * x1 * v5
    out[10] = a * z * v0 - (mu + g1) * v3 + a * x1 * v6
    out[11] = a * z * v1 - g2 * v4 + a * x2 * v6
    out[12] = -nu_s * a_s * zs * v0 + g1s * v2 - (nu_s * a_s * x1 + zeta_s) * v5
    out[13] = (
        -nu * a * z * (v0 + v1) + k1 * g1 * v3 + k2 * g2 * v4 - (nu * a * (x1 + x2) + zeta) * v6
    )


# Dormand-Prince 5(4) tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
A71, A73, A74, A75, A76 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
D1 = -12715105075.0 / 11282082432.0
D3 = 87487479700.0 / 32700410799.0
D4 = -10690763975.0 / 1880347072.0
D5 = 701980252875.0 / 199316789632.0
D6 = -1453857185.0 / 822651844.0
D7 = 69997945.0 / 29380423.0

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0


@njit(cache=True)
def _initial_step(f, y, p, k1, rtol, atol, max_step):
    n = y.shape[0]
    d0 = 0.0
    d1 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (k1[i] / sc) ** 2
    d0 = np.sqrt(d0 / n)
    d1 = np.sqrt(d1 / n)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y + h0 * k1
    k2 = np.empty(n)
    f(y1, p, k2)
    d2 = 0.0
    for i in range(n):
        sc = atol + rtol * abs(y[i])
        d2 += ((k2[i] - k1[i]) / sc) ** 2
    d2 = np.sqrt(d2 / n) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, max_step)


@njit(cache=True)
def _stages(f, y, p, h, k1, k2, k3, k4, k5, k6, k7, y1, tmp):
    n = y.shape[0]
    for i in range(n):
        tmp[i] = y[i] + h * A21 * k1[i]
    f(tmp, p, k2)
    for i in range(n):
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    f(tmp, p, k3)
    for i in range(n):
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    f(tmp, p, k4)
    for i in range(n):
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    f(tmp, p, k5)
    for i in range(n):
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
    f(tmp, p, k6)
    for i in range(n):
        y1[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
    f(y1, p, k7)


@njit(cache=True)
def _error_norm(y, y1, h, k1, k3, k4, k5, k6, k7, rtol, atol):
    n = y.shape[0]
    err = 0.0
    for i in range(n):
        sc = atol + rtol * max(abs(y[i]), abs(y1[i]))
        e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        err += (e / sc) ** 2
    return np.sqrt(err / n)


@njit(cache=True)
def _clamp_state(y, nstate):
    """Clamp tiny negatives in the population block; False if beyond tolerance."""
    clamped = False
    for i in range(nstate):
        if y[i] < 0.0:
            if y[i] < -NEG_TOL:
                return False, clamped
            y[i] = 0.0
            clamped = True
    return True, clamped


@njit(cache=True)
def integrate_sampled(f, y0, p, t_end, dt_sample, rtol, atol, max_step, max_steps):
    """Integrate from t=0 to t_end, sampling every dt_sample via dense output.

    Returns (samples, n_samples_filled, n_accepted, n_rejected, status).
    Only the first 7 components are subject to the orthant check.
    """
    n = y0.shape[0]
    n_samples = int(np.floor(t_end / dt_sample + 1e-9)) + 1
    out = np.empty((n_samples, n))
    out[0, :] = y0
    filled = 1

    y = y0.copy()
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    y1 = np.empty(n)
    tmp = np.empty(n)
    f(y, p, k1)
    h = _initial_step(f, y, p, k1, rtol, atol, max_step)
    t = 0.0
    accepted = 0
    rejected = 0
    last_rejected = False
    nstate = min(n, 7)

    while filled < n_samples:
        if accepted + rejected >= max_steps:
            return out, filled, accepted, rejected, TOO_MANY_STEPS
        if h < 1e-14 * max(1.0, abs(t)):
            return out, filled, accepted, rejected, STEP_UNDERFLOW
        h = min(h, max_step)
        if t + h > t_end:
            h = t_end - t
            if h <= 0.0:
                h = 1e-12
        _stages(f, y, p, h, k1, k2, k3, k4, k5, k6, k7, y1, tmp)
        err = _error_norm(y, y1, h, k1, k3, k4, k5, k6, k7, rtol, atol)
        if not np.isfinite(err):
            rejected += 1
            h *= FAC_MIN
            last_rejected = True
            continue
        if err <= 1.0:
            # dense output coefficients from the accepted step
            t_new = t + h
            while filled < n_samples:
                ts = filled * dt_sample
                if ts > t_new + 1e-12 * max(1.0, t_new):
                    break
                theta = (ts - t) / h
                if theta > 1.0:
                    theta = 1.0
                for i in range(n):
                    ydiff = y1[i] - y[i]
                    bspl = h * k1[i] - ydiff
                    r4 = ydiff - h * k7[i] - bspl
                    r5 = h * (
                        D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]
                    )
                    out[filled, i] = y[i] + theta * (
                        ydiff + (1.0 - theta) * (bspl + theta * (r4 + (1.0 - theta) * r5))
                    )
                filled += 1
            ok, clamped = _clamp_state(y1, nstate)
            if not ok:
                return out, filled, accepted, rejected, NEGATIVE_STATE
            for i in range(n):
                y[i] = y1[i]
            if clamped:
                f(y, p, k1)
            else:
                for i in range(n):
                    k1[i] = k7[i]
            t = t_new
            accepted += 1
            fac = SAFETY * err ** -0.2 if err > 0.0 else FAC_MAX
            if last_rejected:
                fac = min(fac, 1.0)
            h *= min(FAC_MAX, max(FAC_MIN, fac))
            last_rejected = False
        else:
            rejected += 1
            h *= max(FAC_MIN, SAFETY * err ** -0.2)
            last_rejected = True
    for j in range(filled):
        for i in range(nstate):
            if out[j, i] < 0.0 and out[j, i] >= -NEG_TOL:
                out[j, i] = 0.0
    return out, filled, accepted, rejected, OK


@njit(cache=True)
def advance(f, y, p, duration, h, rtol, atol, max_step, max_steps):
    """Integrate in place over ``duration``, landing exactly on the end time.

    Returns (h_next, n_accepted, n_rejected, status).
    """
    n = y.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    k5 = np.empty(n)
    k6 = np.empty(n)
    k7 = np.empty(n)
    y1 = np.empty(n)
    tmp = np.empty(n)
    f(y, p, k1)
    if h <= 0.0:
        h = _initial_step(f, y, p, k1, rtol, atol, max_step)
    t = 0.0
    accepted = 0
    rejected = 0
    last_rejected = False
    nstate = min(n, 7)
    h_keep = h
    while t < duration:
        if accepted + rejected >= max_steps:
            return h_keep, accepted, rejected, TOO_MANY_STEPS
        if h < 1e-14 * max(1.0, abs(t)):
            return h_keep, accepted, rejected, STEP_UNDERFLOW
        h = min(h, max_step)
        last = False
        if t + h >= duration:
            h_keep = h
            h = duration - t
            last = True
        _stages(f, y, p, h, k1, k2, k3, k4, k5, k6, k7, y1, tmp)
        err = _error_norm(y, y1, h, k1, k3, k4, k5, k6, k7, rtol, atol)
        if not np.isfinite(err):
            rejected += 1
            h *= FAC_MIN
            last_rejected = True
            continue
        if err <= 1.0:
            ok, clamped = _clamp_state(y1, nstate)
            if not ok:
                return h_keep, accepted, rejected, NEGATIVE_STATE
            for i in range(n):
                y[i] = y1[i]
            if clamped:
                f(y, p, k1)
            else:
                for i in range(n):
                    k1[i] = k7[i]
            t = duration if last else t + h
            accepted += 1
            fac = SAFETY * err ** -0.2 if err > 0.0 else FAC_MAX
            if last_rejected:
                fac = min(fac, 1.0)
            h *= min(FAC_MAX, max(FAC_MIN, fac))
            if not last:
                h_keep = h
            last_rejected = False
        else:
            rejected += 1
            h *= max(FAC_MIN, SAFETY * err ** -0.2)
            last_rejected = True
    return h_keep, accepted, rejected, OK


@njit(cache=True)
def lle_loop(f, u, p, t_transient, t_accum, t_renorm, rtol, atol, max_step, max_steps):
    """Tangent-space largest Lyapunov exponent with periodic renormalization.

    ``f`` is the extended field (normally ``tangent_rhs``); ``u`` holds the
    state and a unit tangent vector (14 entries) and is updated in place.
    Returns (history, n_filled, status) where history[k] is the running
    exponent after k+1 accumulation intervals.
    """
    n_trans = int(np.ceil(t_transient / t_renorm - 1e-9))
    n_acc = int(np.ceil(t_accum / t_renorm - 1e-9))
    history = np.empty(n_acc)
    h = -1.0
    total = 0.0
    for k in range(n_trans + n_acc):
        h, acc, rej, status = advance(f, u, p, t_renorm, h, rtol, atol, max_step, max_steps)
        if status != OK:
            return history, max(0, k - n_trans), status
        norm = 0.0
        for i in range(7, 14):
            norm += u[i] * u[i]
        norm = np.sqrt(norm)
        if not np.isfinite(norm) or norm == 0.0:
            return history, max(0, k - n_trans), NON_FINITE
        for i in range(7, 14):
            u[i] /= norm
        if k >= n_trans:
            j = k - n_trans
            total += np.log(norm)
            history[j] = total / ((j + 1) * t_renorm)
    return history, n_acc, OK
