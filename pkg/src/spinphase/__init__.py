"""Fast spherical phase-space functions of spin-J / qudit states."""

from .angular import (EigenBasis, SpinDimension, am_analytic, build_spin_operator,
                      eigendecompose, jx_eigenbasis, jy_eigenbasis, projector_am,
                      rotation_operator, wigner_d)
from .cgc import (CoefficientTable, TensorOperatorTable, clebsch_gordan,
                  clebsch_gordan_racah, expansion_coefficients, method_b_eval,
                  spherical_harmonic, tensor_operator)
from .fourier import (FourierTable, KMatrix, compute_k, derivative_coefficients,
                      fourier_coefficients_method_c)
from .kcache import (CacheCorruptError, CacheError, CacheIncompleteError,
                     CacheMismatchError, KCache, fourier_coefficients_method_d,
                     open_cache, precompute_cache)
from .parity import (ParityOperator, ParityOverflowError, TransformedParity,
                     build_parity, gamma_j, log_gamma_j, sphere_radius,
                     transform_parity)
from .sampling import (GridWindow, PhaseSpaceGrid, direct_eval, direct_grid,
                       eval_series, method_b_grid, minimal_grid_size, sample_fft,
                       sample_fft_full, window_extract)
from .states import coherent, dicke, ghz, maximally_mixed, random_density, squeezed

__version__ = "0.1.0"
