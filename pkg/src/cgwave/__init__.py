"""Spectral toolkit for capillary-gravity water-wave operators: the
Dirichlet-Neumann operator and its variations, linearized operators and
their spectra, lump solitary-wave profiles, and conservative evolution
with orbital-distance tracking."""

from .errors import (AlignmentError, CgwaveError, ConfigurationError,
                     ConvergenceError, DomainError, InconclusiveError,
                     NumericError, RegimeExitError, StepSizeError)
from .params import PhysParams
from .spectral import (GridSpec, RealField, SpectralField, WaveState,
                       antiderivative_x2, apply_multiplier, dealias, dx, dy,
                       inner, integrate, inverse_transform, make_grid,
                       read_wsf1, sobolev_norm, sobolev_norms, transform,
                       translate, write_wsf1)
from .symbols import (EdgeResult, a_flat_symbol, c0_symbol, c_eps_symbol,
                      dno_flat_symbol, nd_flat_symbol, r_residual,
                      resolvent_kernel_symbol, spectral_edge)
from .waves import (LumpProfile, approx_solitary_state, d_prime,
                    d_second_leading, lump_eval, steady_residual)
from .dno import (StripSolution, VariationCoeffs, d2g_quadform, dg_apply,
                  dno_apply, dno_inverse_apply, k_apply, l_apply,
                  nd_series_apply, solve_laplace_flattened, variation_coeffs)
from .linops import (LinearOperatorHandle, a0_apply, a0_handle, a_eta_apply,
                     a_eta_handle, a_flat_handle, b_eps_apply, b_eps_handle,
                     c_eps_handle, d2v_quadform, dv_first, functionals,
                     hessian_quadform, l0_handle, m_eta_apply, transport_apply,
                     v_aug)
from .eigensolve import SpectrumReport, count_below, dense_oracle, lowest_eigenpairs
from .evolve import (EvolutionLog, modulation_solve, orbital_distance,
                     rhs_eval, run_evolution, step_midpoint)

__version__ = "0.1.0"
