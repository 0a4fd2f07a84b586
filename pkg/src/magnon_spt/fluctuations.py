"""Gaussian fluctuations around a stable mean-field state.

Quadratures are X = (d^dag + d)/sqrt(2), Y = i(d^dag - d)/sqrt(2), so the
vacuum covariance is I/2.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np
import scipy.linalg

from .stability import DriftMatrix, drift_matrix, is_hurwitz


class NotHurwitzError(ValueError):
    """No stationary covariance: the drift matrix has a non-decaying mode."""


class SingularLyapunovError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class NoiseSpec:
    n_a: float = 0.0
    n_b: float = 0.0

    def __post_init__(self):
        if not (self.n_a >= 0 and self.n_b >= 0):
            raise ValueError("bath occupations must be non-negative")

    @classmethod
    def from_temperature(cls, T, omega_c_lab, omega_m_lab, hbar_over_kB):
        return cls(thermal_occupation(omega_c_lab, T, hbar_over_kB),
                   thermal_occupation(omega_m_lab, T, hbar_over_kB))


VACUUM = NoiseSpec()


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    entries: np.ndarray
    residual: float = 0.0

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def thermal_occupation(omega, T, hbar_over_kB):
    """Bose-Einstein occupation 1/(exp(hbar*omega/kB*T) - 1)."""
    if not omega > 0:
        raise ValueError("frequency must be positive")
    if not hbar_over_kB > 0:
        raise ValueError("hbar_over_kB must be positive")
    if T < 0:
        raise ValueError("temperature must be non-negative")
    if T == 0:
        return 0.0
    x = hbar_over_kB * omega / T
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def diffusion_matrix(noise, kappa, gamma):
    ca = (2 * noise.n_a + 1) * kappa
    cb = (2 * noise.n_b + 1) * gamma
    return np.diag([ca, ca, cb, cb])


def solve_lyapunov(U, D, *, check_stability=True):
    """Stationary covariance V with U V + V U^T = -D, via the 16x16 Kronecker system."""
    if isinstance(U, DriftMatrix):
        stable, margin = is_hurwitz(U)
        U = U.entries
    else:
        U = np.asarray(U, dtype=float)
        stable, margin = is_hurwitz(U)
    if check_stability and not stable:
        raise NotHurwitzError(f"drift matrix is not Hurwitz (max Re eigenvalue {margin:.3g})")
    D = np.asarray(D, dtype=float)
    n = U.shape[0]
    eye = np.eye(n)
    # row-major vec: vec(U V) = (U kron I) vec V, vec(V U^T) = (I kron U) vec V
    A = np.kron(U, eye) + np.kron(eye, U)
    try:
        with warnings.catch_warnings():
            # singularity is detected from the pivots below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as err:
        raise SingularLyapunovError(str(err)) from err
    diag = np.abs(np.diag(lu))
    if diag.min() <= 1e-14 * diag.max():
        raise SingularLyapunovError("Lyapunov system is singular (marginal stability)")
    V = scipy.linalg.lu_solve((lu, piv), -D.reshape(-1)).reshape(n, n)
    V = 0.5 * (V + V.T)
    res = float(np.max(np.abs(U @ V + V @ U.T + D)))
    return CovarianceMatrix(V, res)


def magnon_fluctuation(V):
    """<db^dag db> = (V33 + V44 - 1)/2 in the vacuum-1/2 convention."""
    V = np.asarray(V)
    return 0.5 * (V[2, 2] + V[3, 3] - 1.0)


def cavity_fluctuation(V):
    V = np.asarray(V)
    return 0.5 * (V[0, 0] + V[1, 1] - 1.0)


def state_fluctuation(model, state, noise=VACUUM):
    """<db^dag db> around ``state``; None if the state is not linearly stable."""
    U = drift_matrix(model, state)
    stable, _ = is_hurwitz(U)
    if not stable:
        return None
    V = solve_lyapunov(U, diffusion_matrix(noise, model.kappa, model.gamma),
                       check_stability=False)
    return magnon_fluctuation(V)
