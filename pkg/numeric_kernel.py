"""
Dense complex linear algebra shared by every other module: norms, Hermitian extremes, kernels, ranges, projectors and
pseudo-inverses, all under one numerical-rank policy.

Matrices are plain complex128 numpy arrays. Real input is embedded with zero imaginary part.
"""
import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from framekit_errors import InputError, SymmetryError

logger = logging.getLogger(__name__)

CMatrix = np.ndarray


@dataclass(frozen=True)
class TolerancePolicy:
    rank_cutoff_rel: float = 1e-12
    identity_residual_rel: float = 1e-9
    strict_contraction_margin: float = 0.0

    def __post_init__(self):
        for name in ('rank_cutoff_rel', 'identity_residual_rel'):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise InputError(f"{name} must lie in (0, 1). Got {value}.")
        if not 0.0 <= self.strict_contraction_margin < 1.0:
            raise InputError(f"strict_contraction_margin must lie in [0, 1). Got {self.strict_contraction_margin}.")

    def with_identity_residual(self, value: float) -> 'TolerancePolicy':
        return replace(self, identity_residual_rel=value)


DEFAULT_TOLERANCE = TolerancePolicy()


def as_cmatrix(m, allow_empty: bool = False) -> CMatrix:
    """
    Validates and converts input into a 2D complex128 array.

    :param m: array-like with two dimensions
    :param allow_empty: accept zero columns (used for spanning sets of the zero subspace)
    :return: complex copy of the input
    """
    arr = np.array(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise InputError(f"Expected a 2D matrix. Got an array with {arr.ndim} dimensions.")
    if arr.shape[0] < 1 or (arr.shape[1] < 1 and not allow_empty):
        raise InputError(f"Matrix must have at least one row and one column. Got shape {arr.shape}.")
    if not np.all(np.isfinite(arr)):
        raise InputError("Matrix contains NaN or Inf entries.")
    return arr


def adjoint(m: CMatrix) -> CMatrix:
    return np.conj(np.asarray(m)).T


def singular_values(m: CMatrix) -> np.ndarray:
    m = as_cmatrix(m, allow_empty=True)
    if m.size == 0:
        return np.zeros(0)
    return scipy.linalg.svdvals(m)


def operator_norm(m: CMatrix) -> float:
    """
    :return: largest singular value of m (0 for a matrix without columns)
    """
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def smallest_singular_value(m: CMatrix) -> float:
    """
    Smallest singular value over min(rows, cols). For an invertible square matrix this is 1/||m^-1||.
    """
    s = singular_values(m)
    return float(s[-1]) if s.size else 0.0


def numerical_rank(m: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> int:
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_cutoff_rel * s[0]))


def hermitian_eig_extremes(m: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> tuple[float, float]:
    """
    Extreme eigenvalues of the Hermitian part (m + m*)/2.

    :param m: square matrix, Hermitian up to tol.identity_residual_rel * ||m||
    :param tol: tolerance policy
    :return: (min eigenvalue, max eigenvalue)
    """
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise InputError(f"Expected a square matrix. Got shape {m.shape}.")
    scale = operator_norm(m)
    asymmetry = operator_norm(m - adjoint(m))
    if asymmetry > tol.identity_residual_rel * scale:
        raise SymmetryError(f"Matrix is not Hermitian: ||M - M*|| = {asymmetry:.3e} with ||M|| = {scale:.3e}.")
    hermitian = (m + adjoint(m)) / 2
    eigenvalues = scipy.linalg.eigh(hermitian, eigvals_only=True)
    return float(eigenvalues[0]), float(eigenvalues[-1])


def kernel_basis(m: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    Orthonormal basis of ker(m) as columns. Uses a full SVD, so keep it to matrices with a modest column count; use
    `kernel_projection` when only P_ker(m) applied to something is needed.
    """
    m = as_cmatrix(m)
    return scipy.linalg.null_space(m, rcond=tol.rank_cutoff_rel)


def range_basis(m: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    Orthonormal basis of the column span of m (economy SVD, so tall matrices are cheap).
    """
    m = as_cmatrix(m, allow_empty=True)
    if m.shape[1] == 0 or not np.any(m):
        return np.zeros((m.shape[0], 0), dtype=np.complex128)
    return scipy.linalg.orth(m, rcond=tol.rank_cutoff_rel)


def kernel_projection(m: CMatrix, x: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    Computes P_ker(m) x without forming the projector: ker(m) is the orthogonal complement of ran(m*), so
    P_ker(m) x = x - B B* x with B an orthonormal basis of ran(m*). When ran(m*) is the whole space the kernel is
    trivial and the result is exactly zero.

    :param m: matrix whose kernel we project onto (cols = length of the vectors in x)
    :param x: matrix whose columns get projected
    :param tol: tolerance policy
    :return: projected copy of x
    """
    basis = range_basis(adjoint(as_cmatrix(m)), tol)
    x = np.asarray(x, dtype=np.complex128)
    if basis.shape[1] == basis.shape[0]:
        return np.zeros_like(x)
    return x - basis @ (adjoint(basis) @ x)


def orth_projector(spanning: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    Orthogonal projector onto the column span of `spanning`. Zero columns give the zero projector.
    """
    spanning = as_cmatrix(spanning, allow_empty=True)
    basis = range_basis(spanning, tol)
    projector = basis @ adjoint(basis)
    return (projector + adjoint(projector)) / 2


def pseudo_inverse(m: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    Moore-Penrose pseudo-inverse; singular values below rank_cutoff_rel * sigma_max are treated as zero.
    """
    m = as_cmatrix(m)
    return scipy.linalg.pinv(m, atol=0.0, rtol=tol.rank_cutoff_rel)


def penrose_residuals(m: CMatrix, p: CMatrix) -> tuple[float, float, float, float]:
    """
    Relative residuals of the four Penrose identities MPM = M, PMP = P, (MP)* = MP, (PM)* = PM.
    """
    m = as_cmatrix(m)
    p = as_cmatrix(p)
    mp = m @ p
    pm = p @ m
    scale_m = max(operator_norm(m), 1.0)
    scale_p = max(operator_norm(p), 1.0)
    return (operator_norm(mp @ m - m) / scale_m,
            operator_norm(pm @ p - p) / scale_p,
            operator_norm(adjoint(mp) - mp) / (scale_m * scale_p),
            operator_norm(adjoint(pm) - pm) / (scale_m * scale_p))
