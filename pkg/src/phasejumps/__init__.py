"""Zeros and charges of complex functions sampled on square grids."""
from .errors import (FormatError, InvalidArgument, NonClosingSum, NonClosingSumWarning,
                     OutOfBounds, QuadratureError)
from .grid import GridPoint, GridSpec, box_boundary, coarse_spacings, enumerate_interior
from .field import (ComplexField, PhaseFactor, arg_diff, factor, fd_jacobian_sign, read_field,
                    shifted_sample, write_field)
from .detect import (Algorithm, ChargedZero, DetectionConfig, Norm, mgn, phasejumps,
                     phasejumps_coarse, pjc_step1_test, read_zeros, sieve, winding_sum,
                     write_zeros)
from .gwhf import (SimConfig, Simulator, STFTField, TwistedKernel, WindowKind, WindowSpec,
                   empirical_covariance, simulate_field, twisted_derivatives)
from .stats import (ChargeReport, MatchResult, Rect, ReferenceZero, RegionSequence,
                    empirical_curves, expected_charge, first_intensity_charge, match_zeros,
                    spiral_regions)

__version__ = "0.1.0"
