"""Hamming-ball sampling schemes and the chain driver."""
from .auxiliary import draw_radius_vector, random_partition, resample_auxiliary
from .config import BLOCK_AXES, SCHEMES, THETA_UPDATES, SamplerConfig
from .run import SamplerStepError, Trace, run_chain, sampler_step, state_summary, stream_seed
from .slices import ChainSlice, Counters, FactorizedSlice, ProductSlice, make_slice
from .updates import (
    hb_block_sweep,
    hb_state_update,
    hb_state_update_chain,
    hb_state_update_factorized,
    hb_state_update_unstructured,
    pure_mh_step,
    row_gibbs_sweep,
    theta_update_conditional,
    theta_update_joint_mh,
)

__all__ = [
    "BLOCK_AXES", "SCHEMES", "THETA_UPDATES", "ChainSlice", "Counters", "FactorizedSlice",
    "ProductSlice", "SamplerConfig", "SamplerStepError", "Trace", "draw_radius_vector",
    "hb_block_sweep", "hb_state_update", "hb_state_update_chain", "hb_state_update_factorized",
    "hb_state_update_unstructured", "make_slice", "pure_mh_step", "random_partition",
    "resample_auxiliary", "row_gibbs_sweep", "run_chain", "sampler_step", "state_summary",
    "stream_seed", "theta_update_conditional", "theta_update_joint_mh",
]
