import numpy as np
import pytest
from scipy.spatial import cKDTree

from magnon_spt.stability import PHASES, boundary_curves, classify
from magnon_spt.sweep import (FIRST_ORDER, SECOND_ORDER, NoTransitionError, _ordered_map,
                              boundary_overlay, drive_sweep, find_critical_drive,
                              order_parameter, phase_diagram_grid)


def test_ordered_map_keeps_order():
    items = list(range(37))
    for threads in (1, 2, 5, 64):
        assert _ordered_map(lambda x: x * x, items, threads) == [x * x for x in items]


def test_two_by_two_matches_classify(fig3_model):
    grid = phase_diagram_grid(fig3_model, (2.0, 10.0), (2.0, 10.0), (2, 2))
    for i, lcr in enumerate(grid.lambda_cr):
        for j, lr in enumerate(grid.lambda_r):
            assert grid.labels[i][j].label == classify(fig3_model.with_couplings(lr, lcr)).label
    assert grid.label_at(2.0, 2.0) == "PSP"
    assert grid.label_at(10.0, 10.0) == "PSBP"


def test_small_window_all_psp(fig3_model):
    grid = phase_diagram_grid(fig3_model, (-1.0, 1.0), (-1.0, 1.0), (11, 11))
    assert {c.label for row in grid.labels for c in row} == {"PSP"}


def test_grid_validation(fig3_model):
    with pytest.raises(ValueError):
        phase_diagram_grid(fig3_model, (0.0, 1.0), (0.0, 1.0), (1, 5))
    with pytest.raises(ValueError):
        phase_diagram_grid(fig3_model, (1.0, 1.0), (0.0, 1.0), (5, 5))


def test_fig3_grid_regions_and_threads(fig3_model):
    g1 = phase_diagram_grid(fig3_model, resolution=(61, 61), threads=1)
    g3 = phase_diagram_grid(fig3_model, resolution=(61, 61), threads=3)
    assert np.array_equal(g1.codes(), g3.codes())
    assert set(np.unique(g1.codes())) == set(range(len(PHASES)))
    rows = list(g1.rows())
    assert len(rows) == 61 * 61 and rows[1]["lambda_r"] > rows[0]["lambda_r"]


def test_grid_flips_only_next_to_analytic_curves(fig3_model):
    n = 121
    grid = phase_diagram_grid(fig3_model, resolution=(n, n))
    codes = grid.codes()
    cell = grid.lambda_r[1] - grid.lambda_r[0]
    # dense cloud of boundary points
    pts = []
    for f in boundary_curves(8.0, 8.0, 1.0, 1.0).values():
        for lr in np.linspace(-31, 31, 62001):
            v = f(lr)
            if v is not None and abs(v) < 32:
                pts.append((lr, v))
    tree = cKDTree(np.array(pts))
    far_disagreements = 0
    LR, LCR = np.meshgrid(grid.lambda_r, grid.lambda_cr)
    for axis in (0, 1):
        diff = np.diff(codes, axis=axis) != 0
        sl = (slice(None, -1), slice(None)) if axis == 0 else (slice(None), slice(None, -1))
        sh = (slice(1, None), slice(None)) if axis == 0 else (slice(None), slice(1, None))
        mid = np.stack([(LR[sl] + LR[sh]) / 2, (LCR[sl] + LCR[sh]) / 2], axis=-1)[diff]
        if len(mid):
            dist, _ = tree.query(mid)
            far_disagreements += int(np.count_nonzero(dist > cell))
    assert far_disagreements == 0


def test_boundary_overlay(fig3_model):
    rows = boundary_overlay(fig3_model, samples=121, lcr_range=(-30.0, 30.0))
    tri = [r for r in rows if r["curve"] == "tricritical"]
    assert len(tri) == 6
    assert all(-30 <= r["lambda_cr"] <= 30 for r in rows)


def test_drive_sweep_fig2(fig5_setup):
    lab, drive = fig5_setup
    rows = drive_sweep(lab, drive, (0.0, 3.0), 61)
    assert all(r["omega_c"] == pytest.approx(8.0, abs=1e-9) for r in rows)
    assert all(r["omega_m"] == pytest.approx(8.0, abs=1e-9) for r in rows)
    assert rows[0]["lambda_r"] == pytest.approx(110.0) and rows[0]["lambda_cr"] == 0.0


def test_drive_sweep_fig5_shape(fig5_setup):
    lab, drive = fig5_setup
    rows = drive_sweep(lab, drive, (2.1, 2.4), 301)
    xs = np.array([r["xi"] for r in rows])
    n = np.array([r["n_order_scaled"] for r in rows])
    assert np.all(n[xs < 2.175] == 0)
    inside = (xs > 2.177) & (xs < 2.284)
    assert np.all(n[inside] > 0)
    assert n[inside][0] > 10  # discontinuous onset
    assert np.all(np.diff(n[inside]) < 0)  # decreasing towards the continuous end
    assert np.all(n[xs > 2.286] == 0)
    for r in rows:
        assert (r["fluct_order"] is None) == (r["label"] == "UP")


def test_drive_sweep_threads_identical(fig5_setup):
    lab, drive = fig5_setup
    assert drive_sweep(lab, drive, (2.0, 2.4), 41, threads=1) == \
        drive_sweep(lab, drive, (2.0, 2.4), 41, threads=4)


def test_drive_sweep_validation(fig5_setup):
    lab, drive = fig5_setup
    with pytest.raises(ValueError):
        drive_sweep(lab, drive, (0.0, 1.0), 1)
    with pytest.raises(ValueError):
        drive_sweep(lab, drive, (1.0, 0.0), 10)


def test_critical_drive(fig5_setup):
    lab, drive = fig5_setup
    (lo,) = find_critical_drive(lab, drive, (2.0, 2.25))
    (hi,) = find_critical_drive(lab, drive, (2.25, 2.35))
    assert lo.xi == pytest.approx(2.176, abs=0.005) and lo.order == FIRST_ORDER
    assert hi.xi == pytest.approx(2.285, abs=0.005) and hi.order == SECOND_ORDER
    assert lo.jump > 1.0 and hi.jump < 1e-3
    assert (lo.label_below, lo.label_above) == ("PSP", "BP")
    assert (hi.label_below, hi.label_above) == ("PSBP", "PSP")


def test_critical_drive_errors(fig5_setup):
    lab, drive = fig5_setup
    with pytest.raises(NoTransitionError):
        find_critical_drive(lab, drive, (0.1, 0.2))
    with pytest.raises(ValueError):
        find_critical_drive(lab, drive, (0.3, 0.2))


def test_order_parameter(fig3_model):
    assert order_parameter(classify(fig3_model.with_couplings(2, 2))) == 0.0
    assert order_parameter(classify(fig3_model.with_couplings(10, 10))) == pytest.approx(41.2104483)
