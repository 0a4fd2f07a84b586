"""Superradiant phase transitions in a Floquet-driven Kerr cavity-magnon system."""

__version__ = "0.1.0"

from .bessel import bessel_j
from .model import (EffectiveModel, FloquetDrive, LabParams, ModelWarning, RWAReport,
                    build_effective_model, fig2_lab_params, frame_detunings, rwa_report)
from .steady_state import (SteadyState, SteadyStateError, occupation_branches,
                           recover_amplitudes, residual, steady_states)
from .stability import (BP, PSBP, PSP, UP, PhaseLabel, boundary_curves, classify,
                        drift_matrix, is_hurwitz, tricritical_points)
from .dynamics import (Trajectory, Unsettled, integrate_effective, integrate_lab_frame,
                       settle)
from .fluctuations import (NoiseSpec, NotHurwitzError, diffusion_matrix, magnon_fluctuation,
                           solve_lyapunov, state_fluctuation)
from .sweep import (CriticalDrive, NoTransitionError, drive_sweep, find_critical_drive,
                    phase_diagram_grid)
