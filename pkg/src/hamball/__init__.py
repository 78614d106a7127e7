"""Hamming-ball samplers for discrete latent variables."""
from .ball import (
    BallSpec,
    BallTable,
    Block,
    ball_table,
    ball_volume,
    block_radii,
    distance_probabilities,
    enumerate_ball,
    hamming_distance,
    in_ball,
    log_weighted_ball_volume,
    sample_in_ball,
    weighted_ball_volume,
)
from .engine import SamplerConfig, Trace, run_chain
from .errors import ConfigError, ContractError, MoveBoundViolation, NumericalDegeneracyError

__version__ = "0.1.0"

__all__ = [
    "BallSpec", "BallTable", "Block", "ConfigError", "ContractError", "MoveBoundViolation",
    "NumericalDegeneracyError", "SamplerConfig", "Trace", "ball_table", "ball_volume",
    "block_radii", "distance_probabilities", "enumerate_ball", "hamming_distance", "in_ball",
    "log_weighted_ball_volume", "run_chain", "sample_in_ball", "weighted_ball_volume",
]
