"""Force-neutral image systems for Stokes flow above a no-slip wall.

The package splits the wall Green's function (and its Laplacian and
finite-size extensions) into kernel sums that each carry zero net force and
zero net monopole, so non-periodic, singly periodic and doubly periodic
summation backends are interchangeable drop-ins.
"""
from .errors import (CoincidentPoints, MissingOutputOrder, ModeMismatch,
                     NeutralityViolation, SourceBelowWall)
from .kernels import (GRADIENT, HESSIAN, LAPLACIAN, VALUE, ScalarFieldEval,
                      VectorFieldEval, laplace_dipole, laplace_monopole,
                      laplace_quadrupole, stokeslet, stokeslet_laplacian)
from .summation import (KernelSumRequest, PeriodicityConfig, TargetOutputs,
                        check_neutrality, direct_sum, evaluate, periodic_sum,
                        periodic_sum_trace, set_thread_count, shell_offsets)
from .images import (FlowSample, StokesSource, TargetPoint,
                     build_laplacian_sums, build_rpy_sums_mono,
                     build_rpy_sums_poly, build_rpy_wall_sums,
                     build_stokeslet_sums, combine_laplacian,
                     combine_rpy_mono, combine_rpy_poly, combine_stokeslet,
                     image_velocity_reference, laplacian_image_flow,
                     mobility_matrix, neutral_image_velocity, reflect,
                     rpy_free_space, rpy_velocity_poly, rpy_wall_correction)
from .harness import (ErrorReport, ExperimentConfig, chebyshev_mesh,
                      chebyshev_nodes, generate_sources, noslip_residual,
                      periodicity_error, rpy_field_grid, velocity_field,
                      velocity_field_trace)

__version__ = "0.1.0"
