"""frachelm: forward and inverse scattering for the cubic nonlinear
fractional Helmholtz equation (-Delta)^s u - k^{2s} u = Q |u|^2 u in R^3.
"""
from ._kernels import backend_name
from .params import ScatteringParams
from .greens import (KernelEval, QuadratureConfig, kernel_eval, phi1,
                     phi_s_eps_oracle, phi_s_farfield, phi_s_pv,
                     phi_s_subordination, s3_kernel)
from .fieldgrid import (BoxGrid, ComplexField, Potential, convolve_green,
                        dft_forward, dft_inverse, fourier_at, frac_laplacian_apply,
                        lp_norm, read_field, stock_potential, write_field)
from .waves import (HerglotzDensity, SphereQuadrature, herglotz_field,
                    plane_wave, sphere_quadrature, stein_tomas_diagnostic)
from .forward import (DecayFit, SolveReport, cubic_rhs, eval_scattered_at,
                      k_decay_study, lap_resolvent_apply, picard_solve)
from .farfield import (FarFieldSample, near_far_consistency,
                       scattering_amplitude, scattering_amplitudes)
from .inverse import (FrequencyProbe, ReconstructionResult, make_probe,
                      qhat_from_farfield, sweep_and_reconstruct, uniqueness_gap)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
