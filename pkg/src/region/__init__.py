from .simplex_projection import project_rows_to_simplex, project_weighted_simplex
from .rate_region import (
    DirectionResult,
    upper_concave_envelope,
    region_contains,
    weighted_sum_max,
    maximize_direction,
    frontier_sweep,
    brute_force_region,
    count_grid_policies,
)
