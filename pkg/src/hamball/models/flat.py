"""Constant-density targets, used to check samplers against uniform laws."""
from __future__ import annotations

import numpy as np

from .base import FactorizedModel, UnstructuredModel


class FlatVectorModel(UnstructuredModel):
    def __init__(self, size: int, n_symbols: int = 2):
        self.shape = (int(size),)
        self.n_symbols = int(n_symbols)

    def log_joint(self, x, theta=None) -> float:
        return 0.0

    def log_joint_codes(self, codes, theta=None) -> list:
        return [0.0] * len(codes)


class FlatMatrixModel(FactorizedModel):
    def __init__(self, n_rows: int, n_cols: int, n_symbols: int = 2):
        self.shape = (int(n_rows), int(n_cols))
        self.n_symbols = int(n_symbols)

    def column_logp(self, theta, candidates, cols) -> np.ndarray:
        return np.zeros((candidates.shape[0], len(cols)))


def flat_model(shape, n_symbols: int = 2):
    """Flat target of the given state shape (vector or matrix)."""
    shape = tuple(np.atleast_1d(shape).tolist())
    if len(shape) == 1:
        return FlatVectorModel(shape[0], n_symbols)
    return FlatMatrixModel(shape[0], shape[1], n_symbols)
