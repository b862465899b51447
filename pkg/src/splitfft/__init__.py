"""Block Toeplitz matrix-vector products by split FFTs with lazy embedding."""

from .analysis import ComplexityReport, ratios, reconcile, table1
from .baseline import dense_toeplitz, naive_matvec, toe_mul_embed
from .kernel import (EmbeddedSpectrum, GeneratorSpec, KernelSpectra, Symmetry,
                     build_kernel, compress_spectra, embed_generator, expand_block,
                     next_id, precompute_spectra)
from .split import ExecutionPolicy, SplitToeplitzOperator, toe_mul_split
from .tensor import AllocationMeter, ContractError, RunMetrics

__all__ = [
    "AllocationMeter", "ComplexityReport", "ContractError", "EmbeddedSpectrum",
    "ExecutionPolicy", "GeneratorSpec", "KernelSpectra", "RunMetrics",
    "SplitToeplitzOperator", "Symmetry", "build_kernel", "compress_spectra",
    "dense_toeplitz", "embed_generator", "expand_block", "naive_matvec", "next_id",
    "precompute_spectra", "ratios", "reconcile", "table1", "toe_mul_embed",
    "toe_mul_split",
]
