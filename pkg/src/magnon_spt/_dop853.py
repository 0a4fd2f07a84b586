"""Compiled Dormand-Prince 8(5,3) stepper for the driven lab-frame equations.

The lab-frame problem oscillates at the bare frequencies (~1e5 kappa), so
per-step Python overhead dominates ``solve_ivp``. Coefficients and step
control follow scipy's DOP853.
"""

import numpy as np
from numba import njit
from scipy.integrate._ivp import dop853_coefficients as _c

N_STAGES = _c.N_STAGES
A = np.ascontiguousarray(_c.A[:N_STAGES, :N_STAGES])
B = np.ascontiguousarray(_c.B)
C = np.ascontiguousarray(_c.C[:N_STAGES])
E3 = np.ascontiguousarray(_c.E3)
E5 = np.ascontiguousarray(_c.E5)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0
EXPONENT = -1.0 / 8.0


@njit(cache=True)
def lab_rhs(t, y, p, out):
    # y = (Re a, Im a, Re b, Im b); p = (wc, wm, kappa, gamma, K, g, Omega, omega_D)
    ar, ai, br, bi = y[0], y[1], y[2], y[3]
    wc, wm, k, g, K, gm, Om, wD = p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]
    # da/dt = -(k + i wc) a - 2 i gm Re b
    out[0] = -k * ar + wc * ai
    out[1] = -k * ai - wc * ar - 2.0 * gm * br
    w = wm + Om * np.cos(wD * t) + K * (br * br + bi * bi)
    # db/dt = -(g + i w) b - 2 i gm Re a
    out[2] = -g * br + w * bi
    out[3] = -g * bi - w * br - 2.0 * gm * ar


@njit(cache=True)
def _error_norm(K, h, scale, n):
    e5 = 0.0
    e3 = 0.0
    for i in range(n):
        s5 = 0.0
        s3 = 0.0
        for j in range(N_STAGES + 1):
            s5 += K[j, i] * E5[j]
            s3 += K[j, i] * E3[j]
        s5 /= scale[i]
        s3 /= scale[i]
        e5 += s5 * s5
        e3 += s3 * s3
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    return abs(h) * e5 / np.sqrt((e5 + 0.01 * e3) * n)


@njit(cache=True)
def integrate_lab(y0, params, t_samples, rtol, atol, h0, max_steps):
    """Integrate from t_samples[0], landing exactly on every sample time.

    Returns (samples, status, t_reached); status 0 ok, -1 step underflow,
    -2 step budget exhausted.
    """
    n = y0.shape[0]
    m = t_samples.shape[0]
    out = np.empty((m, n))
    out[0, :] = y0
    y = y0.copy()
    K = np.zeros((N_STAGES + 1, n))
    f = np.empty(n)
    ytmp = np.empty(n)
    ynew = np.empty(n)
    scale = np.empty(n)
    stage = np.empty(n)
    t = t_samples[0]
    lab_rhs(t, y, params, f)
    h = h0
    steps = 0
    for s_idx in range(1, m):
        t_target = t_samples[s_idx]
        while t < t_target:
            if steps >= max_steps:
                return out[:s_idx], -2, t
            min_step = 10.0 * abs(np.nextafter(t, np.inf) - t)
            rejected = False
            while True:
                if h < min_step:
                    return out[:s_idx], -1, t
                last = False
                if t + h >= t_target:
                    h_eff = t_target - t
                    last = True
                else:
                    h_eff = h
                for i in range(n):
                    K[0, i] = f[i]
                for s in range(1, N_STAGES):
                    for i in range(n):
                        acc = 0.0
                        for j in range(s):
                            acc += A[s, j] * K[j, i]
                        ytmp[i] = y[i] + h_eff * acc
                    lab_rhs(t + C[s] * h_eff, ytmp, params, stage)
                    for i in range(n):
                        K[s, i] = stage[i]
                for i in range(n):
                    acc = 0.0
                    for j in range(N_STAGES):
                        acc += B[j] * K[j, i]
                    ynew[i] = y[i] + h_eff * acc
                t_new = t_target if last else t + h_eff
                lab_rhs(t_new, ynew, params, stage)
                for i in range(n):
                    K[N_STAGES, i] = stage[i]
                    scale[i] = atol + max(abs(y[i]), abs(ynew[i])) * rtol
                err = _error_norm(K, h_eff, scale, n)
                if err < 1.0:
                    if err == 0.0:
                        factor = MAX_FACTOR
                    else:
                        factor = min(MAX_FACTOR, SAFETY * err ** EXPONENT)
                    if rejected:
                        factor = min(1.0, factor)
                    if not last:
                        h = h_eff * factor
                    else:
                        # keep the natural step; the clipped one says little
                        h = max(h, h_eff) if factor >= 1.0 else h * factor
                    break
                h = h_eff * max(MIN_FACTOR, SAFETY * err ** EXPONENT)
                rejected = True
            t = t_new
            for i in range(n):
                y[i] = ynew[i]
                f[i] = stage[i]
            steps += 1
        out[s_idx, :] = y
    return out, 0, t
