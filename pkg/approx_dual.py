"""
Approximately dual frames through the (A, Theta) parameterization.

For a frame F with synthesis T and frame operator S, every approximately dual frame has vectors
A* S^-1 phi_n + Theta* delta_n, where ||I - A|| < 1 and Theta (N x d) satisfies T Theta = 0. Its synthesis operator is
A* S^-1 T + Theta*, and the reconstruction T U_dual equals A.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from frame_core import (Frame, analysis_matrix, excess, frame_bounds, inverse_frame_operator, require_frame,
                        synthesis_matrix)
from framekit_errors import ContractionError, InconsistentThetaError, InputError, NotAFrameError
from numeric_kernel import (CMatrix, DEFAULT_TOLERANCE, TolerancePolicy, adjoint, kernel_basis, kernel_projection,
                            operator_norm, smallest_singular_value)
from util.rng import complex_gaussian, stream_generator

logger = logging.getLogger(__name__)

NEAR_BOUNDARY_WIDTH = 1e-12
DOMINANCE_TOL = 1e-10
LOWER_BOUND_TOL = 1e-9
POINTWISE_SAMPLES = 20


@dataclass(frozen=True, eq=False)
class ApproxDualParams:
    A: CMatrix
    Theta: CMatrix
    contraction_norm: float = math.nan
    theta_residual: float = math.nan
    projection_residual: float = math.nan
    near_boundary: bool = False
    validated: bool = False


@dataclass(frozen=True, eq=False)
class ApproxDualReport:
    dual: Frame
    reconstruction: CMatrix
    rate: float
    is_alternate_dual: bool
    params: ApproxDualParams
    reconstruction_residual: float


@dataclass(frozen=True)
class MinimalNormAudit:
    lower_bound: float
    canonical_norm: float
    trial_norms: tuple[float, ...]
    equality_gap: float
    equality_flagged: bool
    lower_bound_holds: bool
    dominance_holds: bool
    min_pointwise_margin: float
    frobenius_residual: float
    frobenius_unique: bool


def make_params(f: Frame, a: CMatrix | None = None, theta: CMatrix | None = None) -> ApproxDualParams:
    """
    Unvalidated params for frame f. Missing A defaults to the identity and missing Theta to zero.
    """
    d, n = f.get_dim(), f.get_size()
    a = np.eye(d, dtype=np.complex128) if a is None else np.array(a, dtype=np.complex128)
    theta = np.zeros((n, d), dtype=np.complex128) if theta is None else np.array(theta, dtype=np.complex128)
    return ApproxDualParams(a, theta)


def contraction_norm(a: CMatrix) -> float:
    a = np.asarray(a, dtype=np.complex128)
    return operator_norm(np.eye(a.shape[0]) - a)


def check_contraction(a: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> float:
    """
    :return: ||I - a||, after checking it is below 1 - strict_contraction_margin
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"A must be a square matrix. Got shape {a.shape}.")
    if not np.all(np.isfinite(a)):
        raise InputError("A contains NaN or Inf entries.")
    norm = contraction_norm(a)
    if norm >= 1.0 - tol.strict_contraction_margin:
        raise ContractionError(f"||I - A|| = {norm:.12g} is not below {1.0 - tol.strict_contraction_margin}.")
    return norm


def validate_params(f: Frame, params: ApproxDualParams, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> ApproxDualParams:
    """
    Checks ||I - A|| < 1 and replaces Theta by its projection onto ker(T_f) column-wise. The projection distance is
    reported as projection_residual; the remaining residual ||T_f Theta|| must be at round-off level.

    :param f: frame the params belong to
    :param params: candidate (A, Theta)
    :param tol: tolerance policy
    :return: validated copy of params
    """
    d, n = f.get_dim(), f.get_size()
    a = np.asarray(params.A, dtype=np.complex128)
    theta = np.asarray(params.Theta, dtype=np.complex128)
    if a.shape != (d, d):
        raise InputError(f"A must be {d} x {d}. Got shape {a.shape}.")
    if theta.shape != (n, d):
        raise InputError(f"Theta must be {n} x {d}. Got shape {theta.shape}.")
    if not np.all(np.isfinite(theta)):
        raise InputError("Theta contains NaN or Inf entries.")

    norm = check_contraction(a, tol)
    near_boundary = norm >= 1.0 - NEAR_BOUNDARY_WIDTH
    if near_boundary:
        logger.warning("||I - A|| = %.15g is within %g of 1; accepted but flagged.", norm, NEAR_BOUNDARY_WIDTH)

    t = synthesis_matrix(f)
    projected = kernel_projection(t, theta, tol)
    projection_residual = operator_norm(theta - projected)
    theta_residual = operator_norm(t @ projected)
    allowed = tol.identity_residual_rel * operator_norm(t) * max(operator_norm(theta), 1.0)
    if theta_residual > allowed:
        raise InconsistentThetaError(f"||T Theta|| = {theta_residual:.3e} exceeds {allowed:.3e} after projection.")
    if projection_residual > 0.0:
        logger.debug("Projected Theta onto ker(T): moved by %.3e", projection_residual)

    return ApproxDualParams(a, projected, norm, theta_residual, projection_residual, near_boundary, True)


def dual_synthesis(f: Frame, params: ApproxDualParams, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    A* S^-1 T + Theta*, for params already validated against f.
    """
    return adjoint(params.A) @ inverse_frame_operator(f, tol) @ synthesis_matrix(f) + adjoint(params.Theta)


def build_approx_dual(f: Frame, params: ApproxDualParams,
                      tol: TolerancePolicy = DEFAULT_TOLERANCE) -> ApproxDualReport:
    """
    Builds the approximately dual frame with vectors A* S^-1 phi_n + Theta* delta_n.

    :param f: frame
    :param params: (A, Theta); validated here if not already
    :param tol: tolerance policy
    :return: report with the dual, its reconstruction operator T_f U_dual and the approximation rate
    """
    require_frame(f, tol)
    if not params.validated:
        params = validate_params(f, params, tol)

    synthesis = dual_synthesis(f, params, tol)
    reconstruction = synthesis_matrix(f) @ adjoint(synthesis)
    rate = operator_norm(np.eye(f.get_dim()) - reconstruction)
    residual = operator_norm(reconstruction - params.A)
    is_alternate = rate <= tol.identity_residual_rel
    logger.debug("Built approximate dual: rate %.6g, reconstruction residual %.3e", rate, residual)
    return ApproxDualReport(Frame.from_synthesis(synthesis), reconstruction, rate, is_alternate, params, residual)


def canonical_approx_dual(f: Frame, a: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> ApproxDualReport:
    """
    The Theta = 0 member of the family, A* S^-1 phi_n.
    """
    return build_approx_dual(f, make_params(f, a), tol)


def random_admissible_operator(d: int, rng: np.random.Generator, max_radius: float = 0.95) -> CMatrix:
    """
    A = I + rho R / ||R|| with rho uniform in [0, max_radius], so ||I - A|| = rho < 1.
    """
    r = complex_gaussian(rng, (d, d))
    rho = rng.uniform(0.0, max_radius)
    return np.eye(d, dtype=np.complex128) + rho * r / operator_norm(r)


def random_kernel_theta(f: Frame, rng: np.random.Generator, norm: float = 1.0,
                        tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    Theta = B_ker C with B_ker an orthonormal basis of ker(T_f) and C Gaussian, scaled to operator norm `norm`.
    """
    basis = kernel_basis(synthesis_matrix(f), tol)
    if basis.shape[1] == 0:
        return np.zeros((f.get_size(), f.get_dim()), dtype=np.complex128)
    c = complex_gaussian(rng, (basis.shape[1], f.get_dim()))
    theta = basis @ c
    return theta * (norm / operator_norm(theta))


def minimal_norm_audit(f: Frame, a: CMatrix, trials: int, seed: int,
                       tol: TolerancePolicy = DEFAULT_TOLERANCE) -> MinimalNormAudit:
    """
    Compares ||U||^2 of approximately duals with the lower bound 1/(m_opt ||A^-1||^2).

    Only the inequality direction and the pointwise dominance of Theta = 0 are checked as pass/fail. Whether the
    canonical approximately dual attains the lower bound is reported through equality_gap and flagged when it does
    not; for A that is not a multiple of the identity it generally does not.

    :param f: frame
    :param a: operator with ||I - a|| < 1
    :param trials: number of random kernel-valued Theta to compare against
    :param seed: master seed
    :param tol: tolerance policy
    :return: MinimalNormAudit
    """
    if trials < 1:
        raise InputError(f"trials must be at least 1. Got {trials}.")
    bounds = require_frame(f, tol)
    check_contraction(a, tol)
    sigma_min = smallest_singular_value(a)
    if sigma_min == 0.0:
        raise NotAFrameError("A is singular, so ||A^-1|| is undefined.")

    lower_bound = sigma_min ** 2 / bounds.lower_opt
    canonical = canonical_approx_dual(f, a, tol)
    u0 = analysis_matrix(canonical.dual)
    canonical_norm = operator_norm(u0) ** 2

    trial_norms = []
    min_margin = math.inf
    frobenius_residual = 0.0
    frobenius_unique = True
    for trial in range(trials):
        rng = stream_generator(seed, 'minimal_norm_audit', trial)
        theta = random_kernel_theta(f, rng, rng.uniform(0.1, 2.0), tol)
        report = build_approx_dual(f, make_params(f, a, theta), tol)
        u_theta = analysis_matrix(report.dual)
        trial_norms.append(operator_norm(u_theta) ** 2)

        samples = complex_gaussian(rng, (f.get_dim(), POINTWISE_SAMPLES))
        sample_norms = np.sum(np.abs(samples) ** 2, axis=0)
        margins = (np.sum(np.abs(u_theta @ samples) ** 2, axis=0) - np.sum(np.abs(u0 @ samples) ** 2, axis=0))
        min_margin = min(min_margin, float(np.min(margins / sample_norms)))

        theta_fro = np.linalg.norm(report.params.Theta) ** 2
        excess_fro = np.linalg.norm(u_theta) ** 2 - np.linalg.norm(u0) ** 2
        frobenius_residual = max(frobenius_residual, abs(excess_fro - theta_fro))
        if theta_fro > DOMINANCE_TOL and excess_fro <= 0.0:
            frobenius_unique = False

    gap = canonical_norm - lower_bound
    flagged = gap > DOMINANCE_TOL * max(1.0, canonical_norm)
    if flagged:
        logger.warning("Minimal-norm equality fails: canonical %.12g vs lower bound %.12g (gap %.3e).",
                       canonical_norm, lower_bound, gap)

    return MinimalNormAudit(
        lower_bound=lower_bound,
        canonical_norm=canonical_norm,
        trial_norms=tuple(trial_norms),
        equality_gap=gap,
        equality_flagged=flagged,
        lower_bound_holds=canonical_norm >= lower_bound - LOWER_BOUND_TOL and all(
            n >= lower_bound - LOWER_BOUND_TOL for n in trial_norms),
        dominance_holds=all(n >= canonical_norm - DOMINANCE_TOL * max(1.0, canonical_norm) for n in trial_norms)
                        and min_margin >= -DOMINANCE_TOL,
        min_pointwise_margin=min_margin,
        frobenius_residual=frobenius_residual,
        frobenius_unique=frobenius_unique,
    )


def bessel_to_theta(f: Frame, w: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    Theta = P_ker(T_f) W*, the parameter matching the Bessel sequence with synthesis W (d x N). With it, dual vector n
    becomes A* S^-1 phi_n + W delta_n - sum_j <S^-1 phi_n, phi_j> W delta_j.
    """
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (f.get_dim(), f.get_size()):
        raise InputError(f"W must be {f.get_dim()} x {f.get_size()}. Got shape {w.shape}.")
    return kernel_projection(synthesis_matrix(f), adjoint(w), tol)


def bessel_sum_dual(f: Frame, a: CMatrix, w: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> Frame:
    """
    Evaluates the Bessel-sequence form of the approximate dual term by term (forms the N x N Gram matrix, so this is
    for small frames).
    """
    w = np.asarray(w, dtype=np.complex128)
    t = synthesis_matrix(f)
    s_inv = inverse_frame_operator(f, tol)
    gram = adjoint(t) @ s_inv @ t  # gram[j, n] = <S^-1 phi_n, phi_j>
    return Frame.from_synthesis(adjoint(np.asarray(a)) @ s_inv @ t + w - w @ gram)


def same_excess_check(f: Frame, report: ApproxDualReport, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> bool:
    return excess(f, tol) == excess(report.dual, tol)


def riesz_dual_check(b: CMatrix, a: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> tuple[float, bool]:
    """
    For the Riesz basis (B e_n)_n the approximately duals with Theta = 0 are (A* (B*)^-1 e_n)_n.

    :param b: invertible d x d matrix
    :param a: operator with ||I - a|| < 1
    :return: (deviation of the built dual from the closed form, whether the dual is again a Riesz basis)
    """
    b = np.asarray(b, dtype=np.complex128)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise InputError(f"B must be square. Got shape {b.shape}.")
    f = Frame.from_synthesis(b)
    report = canonical_approx_dual(f, a, tol)
    closed_form = adjoint(np.asarray(a)) @ np.linalg.inv(adjoint(b))
    deviation = operator_norm(synthesis_matrix(report.dual) - closed_form)
    dual_bounds = frame_bounds(report.dual, tol)
    return deviation, dual_bounds.is_frame() and excess(report.dual, tol) == 0


def with_theta(params: ApproxDualParams, theta: CMatrix) -> ApproxDualParams:
    """
    Copy of params with a new Theta, marked unvalidated.
    """
    return replace(params, Theta=np.asarray(theta, dtype=np.complex128), validated=False)
