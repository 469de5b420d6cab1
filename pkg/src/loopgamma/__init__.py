"""Unitary loop ax+b representations on Wiener path space.

The package has three layers.  `core` and `montecarlo` carry the measure:
pinned and free path laws on the circle, translation weights, and a
reproducible counter-based Monte Carlo engine whose estimates do not
depend on the worker count.  `repops` and `gammaloop` build the group
operators on that measure and the loop Gamma functional they reduce to.
`gammareg` and `transforms` hold the scalar companions: the regularized
Gamma integral, the line transforms, and the kernel-form checks.
"""

from .core import (Grid, MeasureConfig, Path, SmoothLoop, bridge_mass,
                   cm_log_weight_values, cm_weight, heat_kernel,
                   loop_from_json, loop_to_json, make_grid, path_from_json,
                   path_log_density, path_to_json, quad, sample_bridge,
                   sample_wiener, shifted_path, stieltjes, zero_loop)
from .errors import (AccuracyError, DomainError, EvaluationError,
                     LoopGammaError, UsageError)
from .gammaloop import (ComplexLoopArgument, MuWeight, TestFunction,
                        bridge_total_mass, check_functional_equation,
                        check_ibp_identity, check_kernel_reduction,
                        hat_gamma, hat_gamma_delta_shift, kernel_K,
                        kernel_effective_argument, variational_derivative)
from .gammareg import (RegGammaParams, check_large_t_limit, check_recurrence,
                       gamma_classical, gamma_reg, gamma_reg_prime,
                       laplace_kernel_value)
from .montecarlo import (CheckReport, Functional, MCEstimate,
                         check_direct_integral, check_translation,
                         check_translation_exact, constant_functional,
                         exp_pairing_functional, expect,
                         gaussian_moment_oracle, mc_run,
                         node_value_functional, with_x0_profile, worker_count)
from .repops import (GroupElement, RepContext, apply_rep, check_commutators,
                     check_homomorphism, check_intertwiner,
                     check_opposite_charge, check_unitarity, cocycle,
                     element_from_json, element_to_json, identity_element,
                     intertwiner, inverse, lie_D, lie_T, multiply,
                     semigroup_guard)
from .reports import (estimate_row, report_csv_bytes, report_json_bytes,
                      report_plot, to_jsonable, write_artifacts)
from .transforms import (LineFunction, bilateral_laplace, check_prop22,
                         check_theorem52, fourier_wiener_check,
                         gamma_kernel_transform, inverse_bilateral_laplace,
                         mathcalF_eval, rep_finite)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "CheckReport", "ComplexLoopArgument", "DomainError",
    "EvaluationError", "Functional", "Grid", "GroupElement", "LineFunction",
    "LoopGammaError", "MCEstimate", "MeasureConfig", "MuWeight", "Path",
    "RegGammaParams", "RepContext", "SmoothLoop", "TestFunction",
    "UsageError", "apply_rep", "bilateral_laplace", "bridge_mass",
    "bridge_total_mass", "check_commutators", "check_direct_integral",
    "check_functional_equation", "check_homomorphism", "check_ibp_identity",
    "check_intertwiner", "check_kernel_reduction", "check_large_t_limit",
    "check_opposite_charge", "check_prop22", "check_recurrence",
    "check_theorem52", "check_translation", "check_translation_exact",
    "check_unitarity", "cm_log_weight_values", "cm_weight", "cocycle",
    "constant_functional", "element_from_json", "element_to_json",
    "estimate_row", "exp_pairing_functional", "expect",
    "fourier_wiener_check", "gamma_classical", "gamma_kernel_transform",
    "gamma_reg", "gamma_reg_prime", "gaussian_moment_oracle", "hat_gamma",
    "hat_gamma_delta_shift", "heat_kernel", "identity_element",
    "intertwiner", "inverse", "inverse_bilateral_laplace", "kernel_K",
    "kernel_effective_argument", "laplace_kernel_value", "lie_D", "lie_T",
    "loop_from_json", "loop_to_json", "make_grid", "mathcalF_eval",
    "mc_run", "multiply", "node_value_functional", "path_from_json",
    "path_log_density", "path_to_json", "quad", "rep_finite",
    "report_csv_bytes", "report_json_bytes", "report_plot", "sample_bridge",
    "sample_wiener", "semigroup_guard", "shifted_path", "stieltjes",
    "to_jsonable", "variational_derivative", "with_x0_profile",
    "worker_count", "write_artifacts", "zero_loop",
]
