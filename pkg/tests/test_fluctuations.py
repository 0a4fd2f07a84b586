import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from magnon_spt.fluctuations import (VACUUM, NoiseSpec, NotHurwitzError, SingularLyapunovError,
                                     cavity_fluctuation, diffusion_matrix, magnon_fluctuation,
                                     solve_lyapunov, state_fluctuation, thermal_occupation)
from magnon_spt.model import EffectiveModel
from magnon_spt.stability import drift_matrix
from magnon_spt.steady_state import PLUS, occupation_branches, recover_amplitudes, trivial_state


def test_vacuum_uncoupled_is_half_identity():
    m = EffectiveModel(4.0, 6.0, 0.0, 0.0, kappa=0.3, gamma=2.0)
    V = solve_lyapunov(drift_matrix(m, trivial_state()), diffusion_matrix(VACUUM, 0.3, 2.0))
    assert np.max(np.abs(V.entries - 0.5 * np.eye(4))) <= 1e-12
    assert magnon_fluctuation(V) == pytest.approx(0.0, abs=1e-12)
    assert cavity_fluctuation(V) == pytest.approx(0.0, abs=1e-12)


def test_thermal_uncoupled():
    m = EffectiveModel(4.0, 6.0, 0.0, 0.0)
    V = solve_lyapunov(drift_matrix(m, trivial_state()), diffusion_matrix(NoiseSpec(0.4, 1.5), 1, 1))
    assert magnon_fluctuation(V) == pytest.approx(1.5, rel=1e-12)
    assert cavity_fluctuation(V) == pytest.approx(0.4, rel=1e-12)


def test_rotating_wave_only_keeps_vacuum():
    # an excitation-conserving beam splitter cannot populate the vacuum
    m = EffectiveModel(8.0, 8.0, 5.0, 0.0)
    f = state_fluctuation(m, trivial_state())
    assert f == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(2, 12), st.floats(2, 12), st.floats(-6, 6), st.floats(-6, 6),
       st.floats(0.3, 3), st.floats(0.3, 3), st.floats(0, 3), st.floats(0, 3))
def test_matches_scipy_and_is_physical(wc, wm, lr, lcr, k, g, na, nb):
    m = EffectiveModel(wc, wm, lr, lcr, kappa=k, gamma=g)
    U = drift_matrix(m, trivial_state())
    ev = np.linalg.eigvals(U.entries).real.max()
    if ev > -1e-3:
        if ev > 1e-9:
            with pytest.raises(NotHurwitzError):
                solve_lyapunov(U, np.eye(4))
        return
    D = diffusion_matrix(NoiseSpec(na, nb), k, g)
    V = solve_lyapunov(U, D)
    ref = scipy.linalg.solve_continuous_lyapunov(U.entries, -D)
    assert np.allclose(V.entries, ref, rtol=1e-8, atol=1e-10)
    assert np.array_equal(V.entries, V.entries.T)
    # uncertainty principle for each mode: det >= 1/4, and V positive definite
    assert np.all(np.linalg.eigvalsh(V.entries) > 0)
    assert np.linalg.det(V.entries[:2, :2]) >= 0.25 - 1e-9
    assert np.linalg.det(V.entries[2:, 2:]) >= 0.25 - 1e-9
    assert magnon_fluctuation(V) >= -1e-9 and cavity_fluctuation(V) >= -1e-9


def test_rejects_unstable():
    m = EffectiveModel(8.0, 8.0, 10.0, 10.0)  # trivial unstable here
    with pytest.raises(NotHurwitzError):
        solve_lyapunov(drift_matrix(m, trivial_state()), np.eye(4))
    assert state_fluctuation(m, trivial_state()) is None


def test_singular_system():
    U = np.diag([-1.0, 1.0, -2.0, -3.0])  # mirrored pair -> singular Kronecker sum
    with pytest.raises(SingularLyapunovError):
        solve_lyapunov(U, np.eye(4), check_stability=False)


def test_plus_branch_fluctuation_finite():
    m = EffectiveModel(8.0, 8.0, 10.0, 10.0)
    s = recover_amplitudes(m, dict(occupation_branches(m))[PLUS])[0]
    f = state_fluctuation(m, s)
    assert f is not None and 0 < f < 10
    assert state_fluctuation(m, s.partner()) == pytest.approx(f, rel=1e-10)


def test_thermal_occupation():
    assert thermal_occupation(5.0, 0.0, 1.0) == 0.0
    assert thermal_occupation(1.0, 1.0, 1.0) == pytest.approx(1 / np.expm1(1.0))
    assert thermal_occupation(1e-6, 1.0, 1.0) == pytest.approx(1e6, rel=1e-5)
    assert thermal_occupation(1e4, 1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        thermal_occupation(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        thermal_occupation(1.0, -1.0, 1.0)
    n = NoiseSpec.from_temperature(1.0, 2.0, 3.0, 1.0)
    assert n.n_a > n.n_b > 0


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseSpec(-0.1, 0.0)
