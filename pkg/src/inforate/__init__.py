from .information_rates import (
    InputPolicy,
    build_input_policy,
    uniform_policy,
    symmetric_policy,
    one_encoder_policy,
    random_policy,
    policy_vector,
    policy_hash,
    compose_joint,
    assemble_joint,
    collapse_symmetric,
    marginal_entropy,
    mutual_information,
    rate_triple,
)
