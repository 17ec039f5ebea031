"""Numerical checks of the sharp pi/2 vertical-segment covering bound for schlicht maps."""

from .errors import *  # noqa: F401,F403
from .geometry import (Region, area, max_vertical_segment, monotone_reachable_grid,
                       region_from_polyline, steiner_symmetrize, vertical_cross_section)
from .maps import (AnalyticMap, catalog, coefficient_a1, half_plane, koebe, load_power_series,
                   poly_convex, power_series, scaled_strip, strip_inverse, strip_map, trace_level_curve,
                   two_slit)
from .metric import (area_integral, build_transport, eq5_excess, line_integral, minkowski_check, mu,
                     prop3_lower_bound, prop4_upper_bound, schwarz_rigidity_check)
from .slabs import (build_decomposition, build_line_system, check_prop1, check_prop2, compute_r_of_D,
                    decompose, order_cells, region_for)

__version__ = "0.1.0"
