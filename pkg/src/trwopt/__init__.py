"""Tensor-ring decomposition and completion by weighted optimization."""

from .ring import TRCores, init_random, reconstruct_elem, reconstruct_full
from .tensor import fold_shift, frobenius_norm, hadamard, inner, unfold_classic, unfold_shift
from .wopt import CompletionReport, OptimizerConfig, complete, optimize

__version__ = "0.1.0"
