"""Time-and-band limiting in a Legendre basis.

On ``[-T, T]`` the sinc kernel ``sin(W (t - s)) / (t - s)`` commutes with

    (L f)(x) = -(d/dx) (T^2 - x^2) (df/dx) + W^2 x^2 f(x).

With ``x = T u`` and ``c = W T`` the operator becomes
``-(d/du)(1 - u^2)(d/du) + c^2 u^2``, which is pentadiagonal in orthonormal
Legendre polynomials.  The kernel is assembled by tensor Gauss-Legendre
quadrature in the same basis.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

# boundary margin for the commutator: truncated products are exact on the leading n - 4 block
MARGIN = 4


@dataclass(frozen=True)
class ProlateConfig:
    T: float = 1.0
    W: float = 5 * math.pi / 2
    n_modes: int = 40
    n_quad: int = 200

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if not self.W >= 0:
            raise ValueError("W must be nonnegative")
        if self.n_modes < 1:
            raise ValueError("n_modes must be positive")
        if self.n_quad < 2 * self.n_modes:
            raise ValueError("n_quad must be at least 2 * n_modes")

    @property
    def c(self) -> float:
        return self.W * self.T

    @property
    def shannon(self) -> float:
        return 2 * self.W * self.T / math.pi

    def to_dict(self) -> dict:
        return {"T": self.T, "W": self.W, "n_modes": self.n_modes, "n_quad": self.n_quad,
                "c": self.c, "shannon_number": self.shannon}


@dataclass
class OperatorMatrices:
    config: ProlateConfig
    Lmat: np.ndarray
    Kmat: np.ndarray


def jacobi_offdiag(n: int) -> np.ndarray:
    """Off-diagonal of multiplication by u in orthonormal Legendre polynomials."""
    k = np.arange(n - 1, dtype=float)
    return (k + 1) / np.sqrt((2 * k + 1) * (2 * k + 3))


def build_L(config: ProlateConfig) -> np.ndarray:
    """``diag(n (n + 1)) + c^2 A^2`` with A the Legendre Jacobi matrix."""
    n = config.n_modes
    # A^2 computed on n + 1 modes so the last diagonal entry sees its lower neighbour
    a = jacobi_offdiag(n + 1)
    A = np.diag(a, 1) + np.diag(a, -1)
    A2 = (A @ A)[:n, :n]
    k = np.arange(n, dtype=float)
    L = np.diag(k * (k + 1)) + config.c ** 2 * A2
    return (L + L.T) / 2


def build_K(config: ProlateConfig, n_quad: int | None = None) -> np.ndarray:
    """Kernel matrix in the orthonormal Legendre basis of ``[-T, T]``."""
    nq = config.n_quad if n_quad is None else n_quad
    u, w = np.polynomial.legendre.leggauss(nq)
    T = config.T
    x = T * u
    # orthonormal on [-T, T]: sqrt(1/T) * orthonormal on [-1, 1]; dx = T du
    P = _kernels.legendre_table(u, config.n_modes) / math.sqrt(T)
    M = _kernels.sinc_kernel(x, x, float(config.W))
    K = _kernels.contract(P, w * T, M)
    return (K + K.T) / 2


def build_matrices(config: ProlateConfig) -> OperatorMatrices:
    return OperatorMatrices(config, build_L(config), build_K(config))


def commutator_residual(config: ProlateConfig, mats: OperatorMatrices | None = None) -> float:
    """``|KL - LK|_F / (|K|_F |L|_F)`` on the leading ``n - 4`` block."""
    if config.W == 0:
        return 0.0
    mats = mats or build_matrices(config)
    K, L = mats.Kmat, mats.Lmat
    b = config.n_modes - MARGIN
    if b < 1:
        raise ValueError(f"n_modes must exceed the boundary margin {MARGIN}")
    C = (K @ L - L @ K)[:b, :b]
    return float(np.linalg.norm(C) / (np.linalg.norm(K[:b, :b]) * np.linalg.norm(L[:b, :b])))


def quadrature_change(config: ProlateConfig) -> float:
    """Largest entry change of Kmat when n_quad doubles, relative to max |Kmat|."""
    K1 = build_K(config)
    K2 = build_K(config, 2 * config.n_quad)
    return float(np.max(np.abs(K2 - K1)) / np.max(np.abs(K1)))


@dataclass
class ProlateEigs:
    chi: np.ndarray          # eigenvalues of L, ascending
    vectors: np.ndarray      # columns, Legendre coefficients
    mu: np.ndarray           # Rayleigh quotients v^T K v, in the order of chi
    cross_residuals: np.ndarray  # |K v - mu v| / |K|_2
    order: np.ndarray = field(default=None)  # indices sorting mu descending

    def shannon_count(self) -> int:
        return int(np.sum(self.mu > self.mu.max() / 2))

    def parity(self) -> list:
        """+1 / -1 when a vector lives on even / odd Legendre indices, 0 otherwise."""
        out = []
        for v in self.vectors.T:
            even = np.linalg.norm(v[0::2])
            odd = np.linalg.norm(v[1::2])
            tol = 1e-10 * np.linalg.norm(v)
            out.append(1 if odd <= tol else -1 if even <= tol else 0)
        return out


def prolate_eigs(config: ProlateConfig, mats: OperatorMatrices | None = None) -> ProlateEigs:
    mats = mats or build_matrices(config)
    K, L = mats.Kmat, mats.Lmat
    try:
        chi, V = np.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver did not converge: {exc}") from None
    # fix signs so the largest coefficient is positive (deterministic output)
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(V.shape[1])])
    KV = K @ V
    mu = np.einsum("ij,ij->j", V, KV)
    norm_K = np.linalg.norm(K, 2)
    res = np.linalg.norm(KV - V * mu, axis=0) / norm_K if norm_K else np.zeros_like(mu)
    return ProlateEigs(chi, V, mu, res, np.argsort(-mu, kind="stable"))


def prolate_report(config: ProlateConfig, quad_check: bool = False) -> dict:
    """Residuals, the (n, chi_n, mu_n) table and the Shannon count."""
    mats = build_matrices(config)
    sym_L = float(np.max(np.abs(mats.Lmat - mats.Lmat.T)))
    sym_K = float(np.max(np.abs(mats.Kmat - mats.Kmat.T)))
    comm = commutator_residual(config, mats)
    eig = prolate_eigs(config, mats)
    lead = config.n_modes // 2
    out = {
        "config": config.to_dict(),
        "backend": _kernels.BACKEND,
        "commutator_residual": comm,
        "max_cross_residual_leading": float(np.max(eig.cross_residuals[:lead])) if lead else 0.0,
        "leading_modes": lead,
        "shannon_count": eig.shannon_count(),
        "shannon_number": config.shannon,
        "symmetry": {"L": sym_L, "K": sym_K},
        "L_min_eigenvalue": float(eig.chi[0]),
        "K_eigenvalue_range": [float(v) for v in (np.linalg.eigvalsh(mats.Kmat)[[0, -1]])],
        "table": [{"n": int(n), "chi": float(eig.chi[n]), "mu": float(eig.mu[n]),
                   "cross_residual": float(eig.cross_residuals[n])} for n in range(config.n_modes)],
        "mu_descending": [float(eig.mu[i]) for i in eig.order],
    }
    if quad_check:
        out["quadrature_change"] = quadrature_change(config)
    return out


def write_csv(path, eig: ProlateEigs, n_vectors: int | None = None):
    """Legendre coefficients of the leading eigenvectors, one row per coefficient index."""
    n = eig.vectors.shape[1] if n_vectors is None else min(n_vectors, eig.vectors.shape[1])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k"] + [f"v{j}" for j in range(n)])
        for k in range(eig.vectors.shape[0]):
            w.writerow([k] + [repr(float(eig.vectors[k, j])) for j in range(n)])
