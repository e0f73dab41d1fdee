from .channel_models import (
    DiscreteStateMac,
    GaussianStateMac,
    build_discrete_mac,
    build_two_state_agn,
    build_fading_mac,
    build_switch_mac,
    build_crossed_fading_mac,
    binary_additive_mac,
    identity_mac,
    noise_only_mac,
)
