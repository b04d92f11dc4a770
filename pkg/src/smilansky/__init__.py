"""Numerics for the Jacobi-matrix reduction of a harmonic oscillator
coupled to a line through a delta-type transmission condition.

Hot loops run under numba when available; set ``SMILANSKY_BACKEND=numpy``
to force the pure numpy kernels.
"""
from .errors import (BranchCutError, ConvergenceError, DegenerateFitError, DomainError,
                     HerglotzViolation, MethodDisagreement, NoMinimalSolutionWarning,
                     NotSymmetricError, QuadratureError, SingularMatrixError, SmilanskyError,
                     TruncationUnstable)
from .jacobi import (build, count_below, eigenvalues_sym, j0, jlambda, lowest_eigenvalues,
                     resolvent_element_00, smallest_singular_value, solve)
from .model import (counting_asymptotics, deficiency_probe, norm_decay_probe, point_spectrum,
                    predicted_multiplicity, stripped_spectrum_check)
from .recurrence import (Recurrence, fit_growth, forward_solve, miller_minimal,
                         predict_asymptotics, weighted_sum_identity_check)
from .resolvent import (GridFunctionBundle, assemble_resolvent, free_resolvent_component,
                        transmission_reduction_check)
from .special import (ModelParameters, SpectralPoint, d_entry, eta, hermite_chi, mu_from_alpha,
                      alpha_from_mu, psi_entry, regime, y_entry, zeta)
from .weyl import resolvent_00, subordinacy_probe, tau_density, weyl_m

__version__ = "0.1.0"
