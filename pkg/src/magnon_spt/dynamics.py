"""Mean-field time evolution in the effective frame and in the lab frame."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import solve_ivp

from . import _dop853
from .steady_state import TRIVIAL, SteadyState, occupation_branches, residual, trivial_state

EFFECTIVE, LAB = "effective", "lab"

RTOL_EFFECTIVE, ATOL_EFFECTIVE = 1e-9, 1e-12
RTOL_LAB, ATOL_LAB = 1e-10, 1e-12
# settling needs residuals far below what rtol=1e-9 leaves behind
RTOL_SETTLE, ATOL_SETTLE = 1e-12, 1e-14
SETTLE_TOL = 1e-8
DEFAULT_T_MAX = 50.0


class IntegrationError(RuntimeError):
    """Integrator gave up (step-size underflow); carries the partial trajectory."""

    def __init__(self, message, t_fail, trajectory=None):
        super().__init__(message)
        self.t_fail = t_fail
        self.trajectory = trajectory


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    frame: str = EFFECTIVE

    def __post_init__(self):
        if not (len(self.times) == len(self.a) == len(self.b)):
            raise ValueError("sample count must match time count")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def magnon_number(self):
        return np.abs(self.b) ** 2

    def __len__(self):
        return len(self.times)


def _effective_rhs(model):
    wc, wm = model.omega_c, model.omega_m
    k, g, K = model.kappa, model.gamma, model.kerr_K
    lr, lcr = model.lambda_r, model.lambda_cr
    ca = -1j * wc - k
    cb = -1j * wm - g

    def rhs(t, y):
        a, b = y[0], y[1]
        ac, bc = a.conjugate(), b.conjugate()
        da = ca * a - 1j * (lr * b + lcr * bc)
        db = (cb - 1j * K * (b.real * b.real + b.imag * b.imag)) * b - 1j * (lr * a + lcr * ac)
        return np.array([da, db])

    return rhs


def _lab_rhs(lab, drive):
    wc, wm = lab.omega_c_lab, lab.omega_m_lab
    k, g, K, gm = lab.kappa, lab.gamma, lab.kerr_K, lab.g_m
    Om, wD = drive.Omega, drive.omega_D
    ca = -1j * wc - k

    def rhs(t, y):
        a, b = y[0], y[1]
        da = ca * a - 2j * gm * b.real
        db = ((-1j * (wm + Om * math.cos(wD * t)) - g
               - 1j * K * (b.real * b.real + b.imag * b.imag)) * b
              - 2j * gm * a.real)
        return np.array([da, db])

    return rhs


def _sample_grid(t0, t_end, sample_dt):
    n = int(math.floor((t_end - t0) / sample_dt + 1e-9))
    grid = t0 + sample_dt * np.arange(n + 1)
    if t_end - grid[-1] > 1e-9 * sample_dt:
        grid = np.append(grid, t_end)
    return grid


def _run(rhs, a0, b0, t0, t_end, sample_dt, rtol, atol, frame, method="DOP853"):
    if not t_end > t0:
        raise ValueError("t_end must exceed the start time")
    if not sample_dt > 0:
        raise ValueError("sample_dt must be positive")
    grid = _sample_grid(t0, t_end, sample_dt)
    y0 = np.array([complex(a0), complex(b0)])
    sol = solve_ivp(rhs, (t0, t_end), y0, method=method, t_eval=grid,
                    rtol=rtol, atol=atol)
    traj = Trajectory(sol.t, sol.y[0], sol.y[1], frame)
    if sol.status < 0:
        t_fail = float(sol.t[-1]) if len(sol.t) else t0
        raise IntegrationError(f"integration failed near t = {t_fail:.6g}: {sol.message}",
                               t_fail, traj)
    return traj


def integrate_effective(model, a0, b0, t_end, sample_dt=0.01, *, t0=0.0,
                        rtol=RTOL_EFFECTIVE, atol=ATOL_EFFECTIVE):
    """Mean-field trajectory of the effective model sampled every ``sample_dt``."""
    return _run(_effective_rhs(model), a0, b0, t0, t_end, sample_dt, rtol, atol, EFFECTIVE)


def integrate_lab_frame(lab, drive, a0, b0, t_end, sample_dt=0.01, *, t0=0.0,
                        rtol=RTOL_LAB, atol=ATOL_LAB, max_steps=200_000_000):
    """Mean-field trajectory of the driven lab-frame Hamiltonian with damping.

    Nothing is rotating-wave approximated here, so the step size is set by
    the bare frequencies and the drive; the stepper is compiled for that reason.
    """
    if not t_end > t0:
        raise ValueError("t_end must exceed the start time")
    if not sample_dt > 0:
        raise ValueError("sample_dt must be positive")
    grid = _sample_grid(t0, t_end, sample_dt)
    params = np.array([lab.omega_c_lab, lab.omega_m_lab, lab.kappa, lab.gamma, lab.kerr_K,
                       lab.g_m, drive.Omega, drive.omega_D], dtype=float)
    a0, b0 = complex(a0), complex(b0)
    y0 = np.array([a0.real, a0.imag, b0.real, b0.imag])
    fastest = (abs(lab.omega_c_lab) + abs(lab.omega_m_lab) + drive.Omega + drive.omega_D
               + lab.g_m + 1.0)
    out, status, t_reached = _dop853.integrate_lab(y0, params, grid, rtol, atol,
                                                    0.01 / fastest, max_steps)
    traj = Trajectory(grid[:len(out)], out[:, 0] + 1j * out[:, 1],
                      out[:, 2] + 1j * out[:, 3], LAB)
    if status != 0:
        what = "step size underflow" if status == -1 else "step budget exhausted"
        raise IntegrationError(f"lab-frame integration failed near t = {t_reached:.6g}: {what}",
                               float(t_reached), traj)
    return traj


def integrate_lab_frame_reference(lab, drive, a0, b0, t_end, sample_dt=0.01, *, t0=0.0,
                                  rtol=RTOL_LAB, atol=ATOL_LAB):
    """Same equations through scipy's solve_ivp; slow, kept as a cross-check."""
    return _run(_lab_rhs(lab, drive), a0, b0, t0, t_end, sample_dt, rtol, atol, LAB)


def coarse_grain(times, values, window):
    """Boxcar average of ``values`` over ``window`` (in time units), same length as input."""
    times = np.asarray(times)
    values = np.asarray(values, dtype=float)
    dt = times[1] - times[0]
    w = max(1, int(round(window / dt)))
    kernel = np.ones(w) / w
    padded = np.pad(values, (w // 2, w - 1 - w // 2), mode="edge")
    return np.convolve(padded, kernel, mode="valid")


@dataclass(frozen=True, eq=False)
class Unsettled:
    reason: str  # "timeout", "oscillation" or "blow-up"
    t: float
    a: complex
    b: complex
    trajectory: Trajectory | None = field(default=None, repr=False)


def _match_branch(model, n):
    best, best_d = TRIVIAL, abs(n)
    for name, n_b in occupation_branches(model):
        if n_b is not None and abs(n - n_b) < best_d:
            best, best_d = name, abs(n - n_b)
    return best


def settle(model, a0, b0, t_max=DEFAULT_T_MAX, *, tol=SETTLE_TOL, dwell=None,
           sample_dt=None, keep_trajectory=False, rtol=RTOL_SETTLE, atol=ATOL_SETTLE):
    """Integrate until the steady-state residual stays below ``tol`` for a full dwell.

    ``tol`` is relative to max(1, kappa|a|, gamma|b|). Returns the SteadyState
    of the nearest branch (its amplitudes are the integrated ones, except the
    trivial branch which is returned exactly), or Unsettled.
    """
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    rate = min(model.kappa, model.gamma)
    if dwell is None:
        dwell = 5.0 / rate
    if sample_dt is None:
        fastest = max(abs(model.omega_c), abs(model.omega_m), abs(model.lambda_r),
                      abs(model.lambda_cr), model.kappa, model.gamma, 1.0)
        sample_dt = min(0.05 / rate, 0.2 / fastest)
    rhs = _effective_rhs(model)
    chunk = min(dwell, t_max)
    t, a, b = 0.0, complex(a0), complex(b0)
    quiet_since = 0.0
    pieces = []
    history_t, history_n = [], []

    while True:
        t_next = min(t + chunk, t_max)
        try:
            traj = _run(rhs, a, b, t, t_next, sample_dt, rtol, atol, EFFECTIVE)
        except IntegrationError as err:
            return Unsettled("blow-up", err.t_fail, a, b, err.trajectory)
        if keep_trajectory:
            pieces.append(traj if not pieces else
                          Trajectory(traj.times[1:], traj.a[1:], traj.b[1:], EFFECTIVE))
        for ti, ai, bi in zip(traj.times, traj.a, traj.b):
            res = residual(model, ai, bi)
            bound = tol * max(1.0, model.kappa * abs(ai), model.gamma * abs(bi))
            if res >= bound:
                quiet_since = ti
        history_t.extend(traj.times[1:])
        history_n.extend(np.abs(traj.b[1:]) ** 2)
        t, a, b = float(traj.times[-1]), complex(traj.a[-1]), complex(traj.b[-1])

        if t - quiet_since >= dwell:
            name = _match_branch(model, abs(b) ** 2)
            if name == TRIVIAL:
                return trivial_state()
            return SteadyState(name, abs(b) ** 2, a, b, residual(model, a, b))
        if t >= t_max:
            full = _join(pieces) if keep_trajectory else None
            reason = "oscillation" if _oscillating(history_t, history_n, dwell) else "timeout"
            return Unsettled(reason, t, a, b, full)


def _join(pieces):
    return Trajectory(np.concatenate([p.times for p in pieces]),
                      np.concatenate([p.a for p in pieces]),
                      np.concatenate([p.b for p in pieces]), EFFECTIVE)


def _oscillating(times, n, window):
    """|b|^2 keeps fluctuating: variance over the last window did not drop below
    half of the variance over the window before it."""
    times = np.asarray(times)
    n = np.asarray(n)
    if len(times) < 8:
        return False
    t_end = times[-1]
    last = n[times > t_end - window]
    prev = n[(times <= t_end - window) & (times > t_end - 2 * window)]
    scale = max(1.0, float(np.max(np.abs(last))))
    if np.var(last) < 1e-12 * scale ** 2:
        return False
    if len(prev) < 4:
        return True
    return np.var(last) >= 0.5 * np.var(prev)
