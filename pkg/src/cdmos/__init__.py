"""Moment-SOS bounds for polynomial optimization, with the signed-density /
Christoffel-Darboux reconstruction of the dual relaxation variable."""

from .hierarchy import (DensityReconstruction, Extraction, HierarchyError,
                        LowerBoundResult, SweepRow, UpperBoundResult,
                        certify_and_extract, lower_bound, reconstruct_density,
                        sandwich_sweep, upper_bound)
from .measures import (CountingHypercube, MomentSequence, UniformBox,
                       dirac_moments, integrate, moments)
from .momentmat import (SemialgebraicSet, localizing_matrix, moment_matrix,
                        putinar_prefix_check)
from .orthobasis import (BasisConstructionError, OrthoBasis, build_basis,
                         cd_kernel, christoffel, reproduce, to_ortho_coords)
from .polyring import (MonomialBasis, Polynomial, coeff_vector, enumerate_basis,
                       parse_polynomial, vector_to_poly)
from .sdp import (SdpBlock, SdpOptions, SdpProblem, SdpSolution, SdpStatus,
                  gen_eig_min, solve_sdp, sym_eig)

__version__ = "0.1.0"
