from .power_control import (
    PowerPolicy,
    KKTResidual,
    DelaySweepRow,
    build_power_policy,
    corner_objective,
    constant_policy,
    gaussian_rate_triple,
    one_encoder_r1,
    optimize_sum_rate,
    optimize_weighted,
    kkt_residual,
    delay_sweep,
    sweep_delays,
    gaussian_frontier_sweep,
)
