"""Mean-field steady states of the effective Kerr model.

The occupation <b^dag b> of each branch has a closed form; the complex
amplitudes follow from the cavity equation and a phase condition on <b>.
"""

from dataclasses import dataclass
import cmath
import math

TRIVIAL, PLUS, MINUS = "trivial", "plus", "minus"
BRANCHES = (TRIVIAL, PLUS, MINUS)

N_TOL_FACTOR = 1e-12
INCONSISTENCY_TOL = 1e-6


class SteadyStateError(ValueError):
    pass


@dataclass(frozen=True)
class SteadyState:
    branch: str
    n_occ: float
    a_amp: complex
    b_amp: complex
    residual: float

    def partner(self):
        """Parity partner (-a, -b); same occupation and residual."""
        return SteadyState(self.branch, self.n_occ, -self.a_amp, -self.b_amp, self.residual)


def trivial_state():
    return SteadyState(TRIVIAL, 0.0, 0j, 0j, 0.0)


def mean_field_rhs(model, a, b):
    """Right-hand side of the mean-field equations of motion."""
    da = (-1j * (model.omega_c - 1j * model.kappa) * a
          - 1j * model.lambda_r * b - 1j * model.lambda_cr * b.conjugate())
    db = (-1j * (model.omega_m + model.kerr_K * abs(b) ** 2 - 1j * model.gamma) * b
          - 1j * model.lambda_r * a - 1j * model.lambda_cr * a.conjugate())
    return da, db


def residual(model, a_amp, b_amp):
    da, db = mean_field_rhs(model, complex(a_amp), complex(b_amp))
    return max(abs(da), abs(db))


def residual_bound(model, a_amp, b_amp, rel=1e-10):
    return rel * max(1.0, model.kappa * abs(a_amp), model.gamma * abs(b_amp))


def discriminant(model):
    wc, k = model.omega_c, model.kappa
    s = wc * wc + k * k
    lr, lcr = model.lambda_r, model.lambda_cr
    return (2 * lr * lcr * wc) ** 2 - (s * model.gamma + (lr * lr - lcr * lcr) * k) ** 2


def occupation_branches(model):
    """[(branch, n_occ or None)] for trivial, plus and minus.

    A nontrivial branch is None when its square root is imaginary or its
    occupation does not exceed 1e-12 * gamma/K.
    """
    K = model.kerr_K
    if K == 0:
        raise SteadyStateError("occupation branches are singular at kerr_K = 0")
    wc, k = model.omega_c, model.kappa
    s = wc * wc + k * k
    lr, lcr = model.lambda_r, model.lambda_cr
    bracket = (lr * lr + lcr * lcr) * wc - s * model.omega_m
    disc = discriminant(model)
    out = [(TRIVIAL, 0.0)]
    if disc < 0:
        return out + [(PLUS, None), (MINUS, None)]
    root = math.sqrt(disc)
    n_tol = N_TOL_FACTOR * model.gamma / abs(K)
    for name, n in ((PLUS, (bracket + root) / (s * K)), (MINUS, (bracket - root) / (s * K))):
        out.append((name, n if n > n_tol else None))
    return out


def phase_ratio(model, n_occ):
    """r = conj(b)/b required at occupation ``n_occ``; |r| = 1 iff n_occ is a root."""
    wc, k = model.omega_c, model.kappa
    denom = 2 * model.lambda_r * model.lambda_cr * wc
    if denom == 0:
        raise SteadyStateError(
            "phase undetermined: lambda_r * lambda_cr * omega_c = 0 with nonzero occupation")
    bracket = (model.omega_m + model.kerr_K * n_occ - 1j * model.gamma
               - model.lambda_r ** 2 / (wc - 1j * k)
               - model.lambda_cr ** 2 / (wc + 1j * k))
    return bracket * (wc * wc + k * k) / denom


def recover_amplitudes(model, n_occ, branch=PLUS):
    """Both parity partners with occupation ``n_occ``, canonical (theta in [0, pi)) first."""
    if not n_occ > 0:
        raise SteadyStateError("recover_amplitudes needs a positive occupation")
    r = phase_ratio(model, n_occ)
    if abs(abs(r) - 1.0) > INCONSISTENCY_TOL:
        raise SteadyStateError(
            f"|r| = {abs(r):.9g}: n_occ = {n_occ!r} is not a steady-state occupation")
    theta = (-0.5 * cmath.phase(r)) % math.pi
    b = math.sqrt(n_occ) * cmath.exp(1j * theta)
    a = -(model.lambda_r * b + model.lambda_cr * b.conjugate()) / (model.omega_c - 1j * model.kappa)
    res = residual(model, a, b)
    first = SteadyState(branch, n_occ, a, b, res)
    return first, first.partner()


def steady_states(model):
    """Canonical SteadyState for every branch that exists."""
    states = []
    for name, n in occupation_branches(model):
        if name == TRIVIAL:
            states.append(trivial_state())
        elif n is not None:
            states.append(recover_amplitudes(model, n, name)[0])
    return states
