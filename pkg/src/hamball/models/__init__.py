"""Model targets, simulators and dataset files."""
from .base import (
    CHAIN,
    FACTORIZED,
    STRUCTURES,
    UNSTRUCTURED,
    ChainModel,
    FactorizedModel,
    ModelTarget,
    UnstructuredModel,
    decode_state,
    encode_state,
)
from .fhmm import FhmmModel
from .flat import FlatMatrixModel, FlatVectorModel, flat_model
from .io import read_dataset, write_dataset
from .regression import RegressionModel
from .simulate import ARCHITECTURES, EXPERIMENTS, Dataset, default_confounders, simulate_experiment
from .tumor import TumorModel, TumorParams, allele_frequency, binomial_logpmf

__all__ = [
    "ARCHITECTURES", "CHAIN", "EXPERIMENTS", "FACTORIZED", "STRUCTURES", "UNSTRUCTURED",
    "ChainModel", "Dataset", "FactorizedModel", "FhmmModel", "FlatMatrixModel", "FlatVectorModel",
    "ModelTarget", "RegressionModel", "TumorModel", "TumorParams", "UnstructuredModel",
    "allele_frequency", "binomial_logpmf", "decode_state", "default_confounders", "encode_state",
    "flat_model", "read_dataset", "simulate_experiment", "write_dataset",
]
