"""Lab-frame parameters, Floquet drive and the effective two-mode Kerr model.

All frequencies and rates are in units of the cavity damping kappa.
"""

from dataclasses import dataclass, field
import math
import warnings

from .bessel import bessel_j

RWA_THRESHOLD = 0.1
_DELTA_FLOOR = 1e-12


class ModelWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LabParams:
    omega_c_lab: float
    omega_m_lab: float
    g_m: float
    kerr_K: float
    kappa: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.kappa > 0 or not self.gamma > 0:
            raise ValueError("kappa and gamma must be positive")
        if not self.g_m >= 0:
            raise ValueError("g_m must be non-negative")
        if not self.kerr_K > 0:
            raise ValueError("kerr_K must be positive")
        if self.g_m > 0:
            ratio = min(self.omega_c_lab, self.omega_m_lab) / self.g_m
            if ratio < 1:
                raise ValueError(
                    f"min(omega_c_lab, omega_m_lab)/g_m = {ratio:.3g} < 1: "
                    "bare frequencies must dominate the coupling")
            if ratio < 10:
                warnings.warn(
                    f"min(omega_c_lab, omega_m_lab)/g_m = {ratio:.3g} < 10; "
                    "the effective model is outside its intended regime",
                    ModelWarning, stacklevel=3)

    @property
    def weak_coupling_ok(self):
        """True when both bare frequencies exceed g_m by at least 10x."""
        if self.g_m == 0:
            return True
        return min(self.omega_c_lab, self.omega_m_lab) / self.g_m >= 10


@dataclass(frozen=True)
class FloquetDrive:
    Omega: float
    omega_D: float
    n1: int = 0
    n2: int = -5

    def __post_init__(self):
        if not self.omega_D > 0:
            raise ValueError("omega_D must be positive")
        if not self.Omega >= 0:
            raise ValueError("Omega must be non-negative")
        if int(self.n1) != self.n1 or int(self.n2) != self.n2:
            raise ValueError("n1 and n2 must be integers")

    @property
    def xi(self):
        return self.Omega / self.omega_D

    def with_xi(self, xi):
        """Same frequency and indices, drive strength set so Omega/omega_D = xi."""
        return FloquetDrive(xi * self.omega_D, self.omega_D, self.n1, self.n2)


@dataclass(frozen=True)
class EffectiveModel:
    omega_c: float
    omega_m: float
    lambda_r: float
    lambda_cr: float
    kerr_K: float = 1.0
    kappa: float = 1.0
    gamma: float = 1.0
    delta_n1_minus: float | None = None
    delta_n2_plus: float | None = None

    def __post_init__(self):
        if not self.kappa > 0 or not self.gamma > 0:
            raise ValueError("kappa and gamma must be positive")

    @property
    def n_scale(self):
        """Natural occupation scale gamma/K."""
        return self.gamma / self.kerr_K

    def with_couplings(self, lambda_r, lambda_cr):
        return EffectiveModel(self.omega_c, self.omega_m, lambda_r, lambda_cr,
                              self.kerr_K, self.kappa, self.gamma,
                              self.delta_n1_minus, self.delta_n2_plus)

    def scaled(self, c):
        """Every frequency, rate and coupling multiplied by ``c`` (K untouched)."""
        return EffectiveModel(c * self.omega_c, c * self.omega_m, c * self.lambda_r,
                              c * self.lambda_cr, self.kerr_K, c * self.kappa,
                              c * self.gamma)


def frame_detunings(lab, drive, n):
    """(delta_{n,-}, delta_{n,+}) oscillation frequencies of the n-th sideband."""
    n = int(n)
    delta_minus = lab.omega_m_lab - lab.omega_c_lab + n * drive.omega_D
    delta_plus = lab.omega_m_lab + lab.omega_c_lab + n * drive.omega_D
    return delta_minus, delta_plus


def build_effective_model(lab, drive):
    d1_minus, _ = frame_detunings(lab, drive, drive.n1)
    _, d2_plus = frame_detunings(lab, drive, drive.n2)
    xi = drive.xi
    return EffectiveModel(
        omega_c=0.5 * (d2_plus - d1_minus),
        omega_m=0.5 * (d2_plus + d1_minus),
        lambda_r=lab.g_m * bessel_j(drive.n1, xi),
        lambda_cr=lab.g_m * bessel_j(drive.n2, xi),
        kerr_K=lab.kerr_K,
        kappa=lab.kappa,
        gamma=lab.gamma,
        delta_n1_minus=d1_minus,
        delta_n2_plus=d2_plus,
    )


@dataclass(frozen=True)
class SidebandRecord:
    n: int
    delta_minus: float
    delta_plus: float
    coupling: float
    ratio_minus: float | None  # None for the retained rotating-wave index
    ratio_plus: float | None  # None for the retained counter-rotating index


@dataclass(frozen=True)
class RWAReport:
    records: tuple
    n1: int
    n2: int
    threshold: float = RWA_THRESHOLD
    worst_ratio: float = 0.0
    valid: bool = True
    discarded: tuple = field(default=())

    def as_rows(self):
        return [
            {"n": r.n, "delta_minus": r.delta_minus, "delta_plus": r.delta_plus,
             "coupling": r.coupling, "ratio_minus": r.ratio_minus,
             "ratio_plus": r.ratio_plus}
            for r in self.records
        ]


def _ratio(coupling, delta, kappa):
    if abs(delta) < _DELTA_FLOOR * kappa:
        return 0.0 if coupling == 0 else math.inf
    return abs(coupling) / abs(delta)


def rwa_report(lab, drive, window=10, threshold=RWA_THRESHOLD):
    """Ratios |g_m J_n(xi)| / |delta| for every discarded sideband in [-window, window].

    The report is valid iff every discarded ratio is below ``threshold``.
    Retained terms (n1 rotating, n2 counter-rotating) are listed but not judged.
    """
    if window < max(abs(drive.n1), abs(drive.n2)) + 1:
        raise ValueError("window must extend at least one index past n1 and n2")
    xi = drive.xi
    records = []
    discarded = []
    worst = 0.0
    for n in range(-window, window + 1):
        d_minus, d_plus = frame_detunings(lab, drive, n)
        coupling = lab.g_m * bessel_j(n, xi)
        r_minus = None if n == drive.n1 else _ratio(coupling, d_minus, lab.kappa)
        r_plus = None if n == drive.n2 else _ratio(coupling, d_plus, lab.kappa)
        if r_minus is not None:
            discarded.append(("rotating", n))
            worst = max(worst, r_minus)
        if r_plus is not None:
            discarded.append(("counter-rotating", n))
            worst = max(worst, r_plus)
        records.append(SidebandRecord(n, d_minus, d_plus, coupling, r_minus, r_plus))
    return RWAReport(tuple(records), drive.n1, drive.n2, threshold, worst,
                     worst < threshold, tuple(discarded))


def fig2_lab_params(g_m=110.0, n2=-5, omega_D=None, kerr_K=1.0, target_sum=16.0,
                    kappa=1.0, gamma=1.0):
    """Degenerate lab frequencies tuned so omega_c_lab + omega_m_lab + n2*omega_D = target_sum.

    With n1 = 0 this pins the effective frequencies at target_sum/2 for every
    drive amplitude. ``omega_D`` defaults to 2e5, where corrections from the
    discarded sidebands (order g_m/omega_D) stay at the percent level.
    """
    if omega_D is None:
        omega_D = 2.0e5
    bare = 0.5 * (target_sum - n2 * omega_D)
    lab = LabParams(bare, bare, g_m, kerr_K, kappa, gamma)
    return lab, FloquetDrive(0.0, omega_D, 0, n2)
