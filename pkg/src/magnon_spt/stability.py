"""Linear stability of mean-field steady states and the phase diagram.

Quadrature basis is (X_a, Y_a, X_b, Y_b) with X = (d^dag + d)/sqrt(2),
Y = i(d^dag - d)/sqrt(2).
"""

from dataclasses import dataclass
import math

import numpy as np

from .steady_state import (MINUS, PLUS, TRIVIAL, SteadyStateError, occupation_branches,
                           recover_amplitudes, trivial_state)

PSP, PSBP, BP, UP = "PSP", "PSBP", "BP", "UP"
PHASES = (PSP, PSBP, BP, UP)

STAB_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class DriftMatrix:
    entries: np.ndarray
    omega_m_shift: float
    F: complex
    kappa: float = 1.0
    gamma: float = 1.0

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def drift_matrix(model, state):
    b = complex(state.b_amp)
    F = model.kerr_K * b * b
    w = model.omega_m + 2.0 * model.kerr_K * abs(b) ** 2
    k, g = model.kappa, model.gamma
    wc, lr, lcr = model.omega_c, model.lambda_r, model.lambda_cr
    U = np.array([
        [-k, wc, 0.0, lr - lcr],
        [-wc, -k, -lr - lcr, 0.0],
        [0.0, lr - lcr, -g + F.imag, w - F.real],
        [-lr - lcr, 0.0, -w - F.real, -g - F.imag],
    ])
    return DriftMatrix(U, w, F, k, g)


def stability_eps(kappa=1.0, gamma=1.0):
    return STAB_EPS * max(1.0, kappa, gamma)


def is_hurwitz(U):
    """(stable, margin) with margin the largest real part of the spectrum.

    Eigen-solver failures are reported as unstable with margin +inf.
    """
    if isinstance(U, DriftMatrix):
        eps = stability_eps(U.kappa, U.gamma)
        M = U.entries
    else:
        eps = STAB_EPS
        M = np.asarray(U, dtype=float)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError:
        return False, math.inf
    if not np.all(np.isfinite(ev)):
        return False, math.inf
    margin = float(ev.real.max())
    return margin < -eps, margin


def characteristic_coefficients(M):
    """[1, c1, ..., cn] of det(sI - M) by Faddeev-LeVerrier; works on stacks of matrices."""
    M = np.asarray(M, dtype=float)
    n = M.shape[-1]
    eye = np.broadcast_to(np.eye(n), M.shape)
    coeffs = [np.ones(M.shape[:-2])]
    A = np.zeros_like(M)
    c = coeffs[0]
    for k in range(1, n + 1):
        A = M @ A + c[..., None, None] * eye
        MA = M @ A
        c = -np.trace(MA, axis1=-2, axis2=-1) / k
        coeffs.append(c)
    return np.stack(coeffs, axis=-1)


def routh_hurwitz_stable(coeffs):
    """Hurwitz test for a monic quartic s^4 + a1 s^3 + a2 s^2 + a3 s + a4."""
    coeffs = np.asarray(coeffs, dtype=float)
    a1, a2, a3, a4 = (coeffs[..., i] for i in range(1, 5))
    return ((a1 > 0) & (a2 > 0) & (a3 > 0) & (a4 > 0)
            & (a1 * a2 - a3 > 0)
            & (a1 * a2 * a3 - a3 * a3 - a1 * a1 * a4 > 0))


@dataclass(frozen=True)
class PhaseLabel:
    label: str
    trivial_stable: bool
    plus_exists: bool
    plus_stable: bool
    minus_exists: bool
    minus_stable: bool
    stability_margin: float | None
    marginal: bool = False
    n_plus: float | None = None
    n_minus: float | None = None


def _branch_verdict(model, state):
    stable, margin = is_hurwitz(drift_matrix(model, state))
    eps = stability_eps(model.kappa, model.gamma)
    return stable, margin, abs(margin) <= eps


def phase_from_flags(trivial_stable, plus_stable):
    if trivial_stable and plus_stable:
        return BP
    if trivial_stable:
        return PSP
    if plus_stable:
        return PSBP
    return UP


def classify(model):
    occ = dict(occupation_branches(model))
    verdicts = {}
    marginal = False
    stable, margin, m = _branch_verdict(model, trivial_state())
    verdicts[TRIVIAL] = (stable, margin)
    marginal |= m
    for name in (PLUS, MINUS):
        n = occ[name]
        if n is None:
            continue
        try:
            state = recover_amplitudes(model, n, name)[0]
        except SteadyStateError:
            # n sits on a degenerate point of the phase condition; treat as absent
            occ[name] = None
            continue
        stable, margin, m = _branch_verdict(model, state)
        verdicts[name] = (stable, margin)
        marginal |= m
    stable_margins = [mg for st, mg in verdicts.values() if st]
    triv = verdicts[TRIVIAL][0]
    plus = verdicts.get(PLUS, (False, None))[0]
    minus = verdicts.get(MINUS, (False, None))[0]
    return PhaseLabel(
        label=phase_from_flags(triv, plus),
        trivial_stable=triv,
        plus_exists=occ[PLUS] is not None,
        plus_stable=plus,
        minus_exists=occ[MINUS] is not None,
        minus_stable=minus,
        stability_margin=max(stable_margins) if stable_margins else None,
        marginal=marginal,
        n_plus=occ[PLUS],
        n_minus=occ[MINUS],
    )


# analytic phase boundaries in the (lambda_r, lambda_cr) plane

def boundary_lambda_cr1(omega_c, kappa, gamma, lambda_r, sign_a=1, sign_b=1):
    """Discriminant-zero curves, where the nontrivial pair appears or vanishes."""
    root = math.sqrt((omega_c ** 2 + kappa ** 2) / kappa ** 2 * (kappa * gamma + lambda_r ** 2))
    return _sgn(sign_a) * root + _sgn(sign_b) * omega_c / kappa * lambda_r


def boundary_lambda_cr2(omega_c, omega_m, kappa, gamma, lambda_r, sign=1):
    """Curves on which a nontrivial occupation passes through zero; None where undefined."""
    inner = 4 * omega_c * omega_m * lambda_r ** 2 - (omega_c * gamma - omega_m * kappa) ** 2
    if inner < 0:
        return None
    outer = lambda_r ** 2 + omega_c * omega_m + kappa * gamma - math.sqrt(inner)
    if outer < 0:
        return None
    return _sgn(sign) * math.sqrt(outer)


def _sgn(s):
    if s in (1, "+", "+1"):
        return 1.0
    if s in (-1, "-", "-1"):
        return -1.0
    raise ValueError(f"sign must be +1/-1, got {s!r}")


SIGN_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def boundary_curves(omega_c, omega_m, kappa, gamma):
    """Name -> callable lambda_r -> lambda_cr (or None) for all six boundary curves."""
    curves = {}
    for sa, sb in SIGN_PAIRS:
        name = "cr1" + ("+" if sa > 0 else "-") + ("+" if sb > 0 else "-")
        curves[name] = (lambda lr, sa=sa, sb=sb:
                        boundary_lambda_cr1(omega_c, kappa, gamma, lr, sa, sb))
    for s in (1, -1):
        name = "cr2" + ("+" if s > 0 else "-")
        curves[name] = (lambda lr, s=s:
                        boundary_lambda_cr2(omega_c, omega_m, kappa, gamma, lr, s))
    return curves


def _bisect(f, lo, hi, tol=1e-13, maxiter=200):
    flo = f(lo)
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def tricritical_points(omega_c, omega_m, kappa, gamma, window=(-30.0, 30.0),
                       samples=6001, tol=1e-9):
    """Intersections of the discriminant-zero and zero-occupation curve families.

    Crossings are bisected on the curve difference; tangential contacts (no
    sign change) are bisected on its numerical derivative and kept only when
    the difference vanishes there.
    """
    curves = boundary_curves(omega_c, omega_m, kappa, gamma)
    lo, hi = window
    grid = np.linspace(lo, hi, samples)
    scale = max(1.0, abs(omega_c), abs(omega_m), kappa, gamma)
    found = []

    for n1, c1 in curves.items():
        if not n1.startswith("cr1"):
            continue
        for n2, c2 in curves.items():
            if not n2.startswith("cr2"):
                continue

            def diff(lr, c1=c1, c2=c2):
                v = c2(lr)
                return math.nan if v is None else c1(lr) - v

            def slope(lr, diff=diff):
                h = 1e-6 * max(1.0, abs(lr))
                return (diff(lr + h) - diff(lr - h)) / (2 * h)

            vals = np.array([diff(x) for x in grid])
            for i in range(samples - 1):
                x0, x1 = grid[i], grid[i + 1]
                f0, f1 = vals[i], vals[i + 1]
                if not (np.isfinite(f0) and np.isfinite(f1)):
                    continue
                if f0 == 0:
                    found.append(x0)
                elif f0 * f1 < 0:
                    found.append(_bisect(diff, x0, x1))
                # tangency: local extremum of the difference close to zero
                if 0 < i < samples - 2:
                    fp = vals[i - 1]
                    if (np.isfinite(fp) and abs(f0) <= abs(fp) and abs(f0) <= abs(f1)
                            and abs(f0) < 1e-2 * scale):
                        s0, s1 = slope(grid[i - 1]), slope(x1)
                        if np.isfinite(s0) and np.isfinite(s1) and s0 * s1 < 0:
                            x = _bisect(slope, grid[i - 1], x1)
                            d = diff(x)
                            if np.isfinite(d) and abs(d) < tol * scale:
                                found.append(x)

    points = []
    for x in sorted(found):
        if not lo <= x <= hi:
            continue
        y_candidates = [c(x) for n, c in curves.items() if n.startswith("cr2")]
        for y in y_candidates:
            if y is None:
                continue
            if any(abs(c(x) - y) < 1e-6 * scale for n, c in curves.items() if n.startswith("cr1")):
                if not any(abs(x - px) < 1e-6 * scale and abs(y - py) < 1e-6 * scale
                           for px, py in points):
                    points.append((float(x), float(y)))
    return sorted(points)
