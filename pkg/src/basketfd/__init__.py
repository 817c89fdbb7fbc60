"""Fourth-order compact finite-difference pricer for two-asset basket puts."""

__version__ = "0.1.0"

from .boundary import BasketPutBoundary, CallableBoundary, bs1d_put, corner_values, edge_values
from .errors import BasketFDError, ConfigError, NumericalError, ValidationError
from .grid import Grid2, GridField, NodeKind, build_grid, classify, interpolate_bicubic, restrict
from .harness import (
    ConvergenceReport,
    convergence_study,
    emit_report,
    fit_order,
    l_inf_error,
    rel_l2_error,
    run_study_suite,
)
from .model import (
    ConvectionCoeffs,
    MarketParams,
    convection_coeffs,
    from_log_coords,
    manufactured_growth_rate,
    payoff_transformed,
    to_log_coords,
    undo_value_transform,
)
from .oracle import OracleConfig, mc_basket_put, quadrature_basket_put, quadrature_put_1d
from .smoothing import SmoothingKernel, kink_band, phi4, phi4_hat, smooth_initial_condition
from .solver import DiscreteSystem, SolveConfig, assemble, price_at_spots, run, solve_linear, step
from .stencil import StencilPair, apply_stencil, hoc_coefficients, second_order_coefficients
