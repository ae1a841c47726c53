"""Floating-point check that the sinc kernel commutes with the prolate operator."""

from ._kernels import BACKEND
from .core import (MARGIN, OperatorMatrices, ProlateConfig, ProlateEigs, build_K, build_L, build_matrices,
                   commutator_residual, jacobi_offdiag, prolate_eigs, prolate_report, quadrature_change,
                   write_csv)

__all__ = [
    "BACKEND", "MARGIN", "OperatorMatrices", "ProlateConfig", "ProlateEigs", "build_K", "build_L",
    "build_matrices", "commutator_residual", "jacobi_offdiag", "prolate_eigs", "prolate_report",
    "quadrature_change", "write_csv",
]
