from .occupancy import (
    OccupancyReport,
    OccupancyStudy,
    sample_state_path,
    delayed_states,
    occupancy_trial,
    occupancy_study,
    occupancy_spread,
    trial_seeds,
    empirical_joint,
    empirical_rate_estimate,
)
