from .directed_information import (
    CausalLaw,
    build_causal_law,
    stationary_causal_law,
    embed_policy,
    directed_information,
    causally_conditioned_pmf,
    directed_information_log_ratio,
    sequence_joint,
    rn_point,
    embedding_deficit,
)
