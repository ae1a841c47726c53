from .scalar import GR, ONE, ZERO, I, GaussianRational, as_gr
from .bipoly import BiPoly
from .ratfun import BasisError, Factor, FactorBasis, RatFun
from .matrix import MatRF, ShapeError
from .linalg import Echelon, exact_nullspace, rref, rank, solve_affine

__all__ = [
    "GR", "ONE", "ZERO", "I", "GaussianRational", "as_gr",
    "BiPoly", "BasisError", "Factor", "FactorBasis", "RatFun",
    "MatRF", "ShapeError",
    "Echelon", "exact_nullspace", "rref", "rank", "solve_affine",
]
