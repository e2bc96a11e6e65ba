"""
Finite frames for C^d: a frame is an ordered family of N vectors, stored as an N x d array (row n = vector n). The
synthesis operator T has the vectors as columns, the analysis operator is U = T*, and the frame operator is S = T T*.
"""
import logging
from dataclasses import dataclass

import numpy as np

from framekit_errors import InputError, NotAFrameError
from numeric_kernel import (CMatrix, DEFAULT_TOLERANCE, TolerancePolicy, adjoint, hermitian_eig_extremes,
                            numerical_rank, operator_norm, pseudo_inverse)

logger = logging.getLogger(__name__)

TIGHTNESS_REL = 1e-10


class Frame:
    __vectors: np.ndarray

    def __init__(self, vectors, dim: int | None = None):
        vectors = np.array(vectors, dtype=np.complex128)
        if vectors.ndim != 2:
            raise InputError(f"Frame vectors must form an N x d array. Got an array with {vectors.ndim} dimensions.")
        if vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise InputError(f"A frame needs N >= 1 vectors in dimension d >= 1. Got shape {vectors.shape}.")
        if dim is not None and vectors.shape[1] != dim:
            raise InputError(f"Declared dimension {dim} does not match vector length {vectors.shape[1]}.")
        if not np.all(np.isfinite(vectors)):
            raise InputError("Frame vectors contain NaN or Inf entries.")

        vectors.setflags(write=False)
        self.__vectors = vectors

    @classmethod
    def from_synthesis(cls, synthesis: CMatrix) -> 'Frame':
        """
        :param synthesis: d x N matrix whose columns are the frame vectors
        """
        return cls(np.asarray(synthesis).T)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented

        return self.get_vectors().shape == other.get_vectors().shape and np.array_equal(self.get_vectors(),
                                                                                        other.get_vectors())

    def __repr__(self):
        return f"Frame(dim={self.get_dim()}, size={self.get_size()})"

    def get_dim(self) -> int:
        return self.__vectors.shape[1]

    def get_size(self) -> int:
        return self.__vectors.shape[0]

    def get_vectors(self) -> np.ndarray:
        """
        :return: read-only N x d array, row n is vector n
        """
        return self.__vectors

    def get_vector(self, n: int) -> np.ndarray:
        return self.__vectors[n]


@dataclass(frozen=True)
class FrameBounds:
    lower_opt: float
    upper_opt: float
    tight: bool

    def is_frame(self) -> bool:
        return self.lower_opt > 0.0


def check_same_shape(f: Frame, g: Frame) -> None:
    if f.get_dim() != g.get_dim() or f.get_size() != g.get_size():
        raise InputError(f"Frames must share dimension and size. Got (d={f.get_dim()}, N={f.get_size()}) and "
                         f"(d={g.get_dim()}, N={g.get_size()}).")


def synthesis_matrix(f: Frame) -> CMatrix:
    """
    :return: d x N matrix T with T c = sum_n c_n phi_n
    """
    return np.array(f.get_vectors().T)


def analysis_matrix(f: Frame) -> CMatrix:
    """
    :return: N x d matrix U with (U x)_n = <x, phi_n>
    """
    return adjoint(synthesis_matrix(f))


def frame_operator(f: Frame) -> CMatrix:
    t = synthesis_matrix(f)
    s = t @ adjoint(t)
    return (s + adjoint(s)) / 2


def frame_bounds(f: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> FrameBounds:
    """
    Optimal frame bounds, i.e. the extreme eigenvalues of the frame operator. A lower bound at or below
    rank_cutoff_rel * upper bound is reported as 0 (the family does not span C^d).
    """
    lower, upper = hermitian_eig_extremes(frame_operator(f), tol)
    upper = max(upper, 0.0)
    if lower <= tol.rank_cutoff_rel * upper:
        lower = 0.0
    tight = abs(upper - lower) <= TIGHTNESS_REL * upper
    logger.debug("Frame bounds for d=%d, N=%d: (%.6g, %.6g)", f.get_dim(), f.get_size(), lower, upper)
    return FrameBounds(lower, upper, tight)


def is_frame(f: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> bool:
    return frame_bounds(f, tol).is_frame()


def require_frame(f: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> FrameBounds:
    bounds = frame_bounds(f, tol)
    if not bounds.is_frame():
        raise NotAFrameError(f"Family of {f.get_size()} vectors does not span C^{f.get_dim()} "
                             f"(upper bound {bounds.upper_opt:.3e}, lower bound below cutoff).")
    return bounds


def inverse_frame_operator(f: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    require_frame(f, tol)
    inverse = pseudo_inverse(frame_operator(f), tol)
    return (inverse + adjoint(inverse)) / 2


def canonical_dual(f: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> Frame:
    """
    The canonical dual (S^-1 phi_n)_n.
    """
    return Frame.from_synthesis(inverse_frame_operator(f, tol) @ synthesis_matrix(f))


def reconstruction_operator(f: Frame, g: Frame) -> CMatrix:
    """
    :return: T_f U_g, the operator x -> sum_n <x, g_n> f_n
    """
    check_same_shape(f, g)
    return synthesis_matrix(f) @ analysis_matrix(g)


def is_dual_pair(f: Frame, g: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> bool:
    residual = operator_norm(reconstruction_operator(f, g) - np.eye(f.get_dim()))
    return residual <= tol.identity_residual_rel


def excess(f: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> int:
    """
    dim ker(T_f): number of vectors beyond the numerical rank of the synthesis operator.
    """
    return f.get_size() - numerical_rank(synthesis_matrix(f), tol)


def frame_norm_distance(f: Frame, g: Frame) -> float:
    """
    ||T_f - T_g||_op, the frame-norm distance between two families of the same shape.
    """
    check_same_shape(f, g)
    return operator_norm(synthesis_matrix(f) - synthesis_matrix(g))
