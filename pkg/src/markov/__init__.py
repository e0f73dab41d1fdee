from .markov_chain import (
    INFINITE,
    InfiniteDelay,
    MarkovChain,
    DelayProfile,
    DelayedJoint,
    validate_chain,
    two_state_chain,
    d_step_matrix,
    two_state_d_step,
    delayed_joint,
    mixing_distance,
    reverse_conditional,
)
