"""Parameter sweeps: phase-diagram grids, drive-amplitude scans, critical drives."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fluctuations import VACUUM, state_fluctuation
from .model import build_effective_model
from .stability import (PHASES, boundary_curves, classify, tricritical_points)
from .steady_state import recover_amplitudes, trivial_state

FIRST_ORDER, SECOND_ORDER = "first-order", "second-order"
JUMP_THRESHOLD = 1e-3


class NoTransitionError(ValueError):
    pass


def _ordered_map(func, items, threads=1):
    """map() with optional thread fan-out; results always come back in input order."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) < 2:
        return [func(x) for x in items]
    # static contiguous blocks, gathered in block order
    nblocks = min(threads, len(items))
    bounds = np.linspace(0, len(items), nblocks + 1).astype(int)
    blocks = [items[bounds[i]:bounds[i + 1]] for i in range(nblocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda blk: [func(x) for x in blk], blocks))
    return [r for part in parts for r in part]


@dataclass(frozen=True, eq=False)
class PhaseGrid:
    lambda_r: np.ndarray
    lambda_cr: np.ndarray
    labels: list  # labels[i][j] is the PhaseLabel at (lambda_r[j], lambda_cr[i])

    def codes(self):
        index = {p: i for i, p in enumerate(PHASES)}
        return np.array([[index[c.label] for c in row] for row in self.labels], dtype=int)

    def label_at(self, lr, lcr):
        j = int(np.argmin(np.abs(self.lambda_r - lr)))
        i = int(np.argmin(np.abs(self.lambda_cr - lcr)))
        return self.labels[i][j].label

    def rows(self):
        for i, lcr in enumerate(self.lambda_cr):
            for j, lr in enumerate(self.lambda_r):
                c = self.labels[i][j]
                yield {
                    "lambda_r": float(lr), "lambda_cr": float(lcr), "label": c.label,
                    "trivial_stable": c.trivial_stable, "plus_exists": c.plus_exists,
                    "plus_stable": c.plus_stable, "minus_exists": c.minus_exists,
                    "minus_stable": c.minus_stable, "stability_margin": c.stability_margin,
                    "marginal": c.marginal,
                }


def phase_diagram_grid(base, lr_range=(-30.0, 30.0), lcr_range=(-30.0, 30.0),
                       resolution=(601, 601), threads=1):
    """Classify every node of a (lambda_r, lambda_cr) grid, row-major in lambda_cr."""
    nr, ncr = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nr < 2 or ncr < 2:
        raise ValueError("resolution must be at least 2 per axis")
    if not (lr_range[1] > lr_range[0] and lcr_range[1] > lcr_range[0]):
        raise ValueError("ranges must be non-degenerate")
    lrs = np.linspace(lr_range[0], lr_range[1], nr)
    lcrs = np.linspace(lcr_range[0], lcr_range[1], ncr)

    def row(lcr):
        return [classify(base.with_couplings(float(lr), float(lcr))) for lr in lrs]

    labels = _ordered_map(row, lcrs, threads)
    return PhaseGrid(lrs, lcrs, labels)


def boundary_overlay(base, lr_range=(-30.0, 30.0), samples=1201, lcr_range=None):
    """Analytic boundary samples and tricritical points for plotting next to a grid.

    Samples with lambda_cr outside ``lcr_range`` (when given) are dropped.
    """
    curves = boundary_curves(base.omega_c, base.omega_m, base.kappa, base.gamma)
    rows = []
    for lr in np.linspace(lr_range[0], lr_range[1], samples):
        for name, f in curves.items():
            v = f(float(lr))
            if v is None or (lcr_range and not lcr_range[0] <= v <= lcr_range[1]):
                continue
            rows.append({"curve": name, "lambda_r": float(lr), "lambda_cr": float(v)})
    tri = tricritical_points(base.omega_c, base.omega_m, base.kappa, base.gamma, lr_range)
    for lr, lcr in tri:
        if lcr_range and not lcr_range[0] <= lcr <= lcr_range[1]:
            continue
        rows.append({"curve": "tricritical", "lambda_r": float(lr), "lambda_cr": float(lcr)})
    return rows


def order_parameter(label):
    """Stable nontrivial occupation (0 when only the trivial state is stable)."""
    return label.n_plus if label.plus_stable else 0.0


def _sweep_point(lab, drive, xi, noise):
    model = build_effective_model(lab, drive.with_xi(xi))
    c = classify(model)
    scale = model.n_scale
    row = {
        "xi": float(xi),
        "omega_c": model.omega_c, "omega_m": model.omega_m,
        "lambda_r": model.lambda_r, "lambda_cr": model.lambda_cr,
        "label": c.label,
        "n_plus_scaled": None if c.n_plus is None else c.n_plus / scale,
        "n_minus_scaled": None if c.n_minus is None else c.n_minus / scale,
        "n_order_scaled": order_parameter(c) / scale,
        "trivial_stable": c.trivial_stable,
        "plus_stable": c.plus_stable,
        "minus_stable": c.minus_stable,
        "fluct_trivial": None,
        "fluct_plus": None,
        "fluct_order": None,
    }
    if c.trivial_stable:
        row["fluct_trivial"] = state_fluctuation(model, trivial_state(), noise)
    if c.plus_stable:
        row["fluct_plus"] = state_fluctuation(model, recover_amplitudes(model, c.n_plus)[0], noise)
    row["fluct_order"] = row["fluct_plus"] if c.plus_stable else row["fluct_trivial"]
    return row


DRIVE_SWEEP_COLUMNS = (
    ("xi", "reduced drive amplitude Omega/omega_D"),
    ("omega_c", "effective cavity frequency (kappa)"),
    ("omega_m", "effective magnon frequency (kappa)"),
    ("lambda_r", "rotating-wave coupling (kappa)"),
    ("lambda_cr", "counter-rotating coupling (kappa)"),
    ("label", "phase: PSP, PSBP, BP or UP"),
    ("n_plus_scaled", "plus-branch <b^dag b>/(gamma/K); empty if absent"),
    ("n_minus_scaled", "minus-branch <b^dag b>/(gamma/K); empty if absent"),
    ("n_order_scaled", "stable nontrivial occupation /(gamma/K); 0 if only trivial is stable"),
    ("trivial_stable", "trivial branch linearly stable"),
    ("plus_stable", "plus branch exists and is linearly stable"),
    ("minus_stable", "minus branch exists and is linearly stable"),
    ("fluct_trivial", "<db^dag db> on the trivial branch; empty unless stable"),
    ("fluct_plus", "<db^dag db> on the plus branch; empty unless stable"),
    ("fluct_order", "<db^dag db> on the branch reported in n_order_scaled"),
)


def drive_sweep(lab, drive, xi_range=(0.0, 3.0), samples=301, noise=VACUUM, threads=1):
    """One row per xi: effective parameters, branches, phase and fluctuations."""
    if samples < 2:
        raise ValueError("samples must be at least 2")
    if not xi_range[1] > xi_range[0]:
        raise ValueError("xi_range must be non-degenerate")
    xis = np.linspace(xi_range[0], xi_range[1], samples)
    return _ordered_map(lambda x: _sweep_point(lab, drive, float(x), noise), xis, threads)


@dataclass(frozen=True)
class CriticalDrive:
    xi: float
    order: str
    jump: float  # change of the stable occupation across the point, in gamma/K
    label_below: str
    label_above: str


def _classify_at(lab, drive, xi):
    return classify(build_effective_model(lab, drive.with_xi(xi)))


def find_critical_drive(lab, drive, bracket, *, xtol=1e-7, scan=201):
    """Drive amplitudes in ``bracket`` where a stable nontrivial occupation appears or vanishes.

    The bracket is scanned on ``scan`` points; each change of plus-branch
    stability is bisected to ``xtol``. Transitions whose occupation jumps by
    more than 1e-3 gamma/K are first-order, the rest second-order.
    """
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ValueError("bracket must be increasing")
    xs = np.linspace(lo, hi, scan)
    cls = [_classify_at(lab, drive, x) for x in xs]
    found = []
    scale = lab.gamma / lab.kerr_K
    for i in range(scan - 1):
        if cls[i].plus_stable == cls[i + 1].plus_stable:
            continue
        a, b = float(xs[i]), float(xs[i + 1])
        ca, cb = cls[i], cls[i + 1]
        while b - a > xtol:
            mid = 0.5 * (a + b)
            cm = _classify_at(lab, drive, mid)
            if cm.plus_stable == ca.plus_stable:
                a, ca = mid, cm
            else:
                b, cb = mid, cm
        jump = abs(order_parameter(cb) - order_parameter(ca)) / scale
        order = FIRST_ORDER if jump > JUMP_THRESHOLD else SECOND_ORDER
        found.append(CriticalDrive(0.5 * (a + b), order, jump, ca.label, cb.label))
    if not found:
        raise NoTransitionError(f"no superradiant transition in [{lo}, {hi}]")
    return found

