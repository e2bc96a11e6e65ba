"""
Perturbation of frames and of their approximately dual frames.

Every inequality is checked through a BoundAudit: a named (lhs, rhs) pair with a precondition flag. A failed
precondition gives the not-applicable verdict, which is never counted as a violation.

Large frames (N in the tens of thousands) are handled without N x N matrices: projections onto ker(T) go through
`numeric_kernel.kernel_projection`, and subspace gaps through orthonormal range bases. Only `gamma_inverse` and
`best_approx_bessel_form` need full kernel bases or Gram matrices and are meant for small frames.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from approx_dual import (ApproxDualParams, ApproxDualReport, bessel_sum_dual, bessel_to_theta, build_approx_dual,
                         check_contraction, dual_synthesis, make_params, validate_params)
from frame_core import (Frame, FrameBounds, analysis_matrix, check_same_shape, frame_bounds, inverse_frame_operator,
                        is_dual_pair, require_frame, synthesis_matrix)
from framekit_errors import GapHypothesisError, InconsistentThetaError, InputError, PreconditionError
from numeric_kernel import (CMatrix, DEFAULT_TOLERANCE, TolerancePolicy, adjoint, as_cmatrix, kernel_basis,
                            kernel_projection, operator_norm, range_basis, smallest_singular_value)
from util.rng import complex_gaussian, stream_generator

logger = logging.getLogger(__name__)

AUDIT_REL = 1e-9
OPTIMALITY_REL = 1e-10

HOLDS = 'holds'
VIOLATED = 'violated'
NOT_APPLICABLE = 'not-applicable'

DEVIATION_KINDS = ('canonical-ad', 'canonical-dual', 'd-quad', 'c-quad')
C_QUAD_NOTE = ("c-quadratic audits use q_0 (the canonical-dual weighting) although the result is stated under "
               "q_Lambda < 1; the displayed constants only involve q_0.")


@dataclass(frozen=True)
class BoundAudit:
    name: str
    lhs: float
    rhs: float
    preconditions_met: bool
    holds: bool
    slack: float
    note: str = field(default='', compare=False)
    report_only: bool = field(default=False, compare=False)

    def verdict(self) -> str:
        if not self.preconditions_met:
            return NOT_APPLICABLE
        return HOLDS if self.holds else VIOLATED

    def as_dict(self) -> dict:
        """
        JSON form. Non-finite numbers become None so the output stays strict JSON.
        """
        return {
            'name': self.name,
            'lhs': _finite_or_none(self.lhs),
            'rhs': _finite_or_none(self.rhs),
            'preconditions_met': self.preconditions_met,
            'holds': self.holds,
            'slack': _finite_or_none(self.slack),
        }


def _finite_or_none(value: float) -> float | None:
    return float(value) if math.isfinite(value) else None


def make_audit(name: str, lhs: float, rhs: float, preconditions_met: bool = True, rel: float = AUDIT_REL,
               note: str = '', report_only: bool = False) -> BoundAudit:
    """
    :param name: audit id, dotted (family.variant)
    :param lhs: measured quantity
    :param rhs: bound it must not exceed
    :param preconditions_met: false turns the audit into a not-applicable record
    :param rel: relative slack allowed on rhs
    :param note: free-text remark carried alongside, not serialized
    :param report_only: measured for information; never decides an exit code
    """
    lhs, rhs = float(lhs), float(rhs)
    holds = preconditions_met and lhs <= rhs + rel * max(1.0, abs(rhs))
    if preconditions_met and not holds and not report_only:
        logger.warning("Audit %s violated: lhs %.12g > rhs %.12g", name, lhs, rhs)
    return BoundAudit(name, lhs, rhs, preconditions_met, holds, rhs - lhs, note, report_only)


def not_applicable(name: str, lhs: float = math.nan, rhs: float = math.nan, note: str = '') -> BoundAudit:
    return make_audit(name, lhs, rhs, preconditions_met=False, note=note)


def mu_below_root(mu: float, m: float, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> bool:
    """
    mu < sqrt(m), with mu = sqrt(m) up to rounding counted as equality.
    """
    return mu < math.sqrt(m) * (1.0 - tol.rank_cutoff_rel)


@dataclass(frozen=True)
class ClosenessReport:
    q: float
    q_weighted: float
    q0: float
    mu: float
    lower_opt: float
    upper_opt: float
    dual_upper: float
    d_quad_flag: bool
    c_quad_flag: bool


@dataclass(frozen=True)
class GapReport:
    delta_xy: float
    delta_yx: float
    Delta: float
    isomorphic_projections: bool


def closeness(f: Frame, g: Frame, dual_for_weight: Frame | None = None,
              tol: TolerancePolicy = DEFAULT_TOLERANCE) -> ClosenessReport:
    """
    Quadratic closeness q = sum ||f_n - g_n||^2, the weighted closeness q_Lambda = sum ||f_n - g_n|| ||lambda_n|| for a
    dual (lambda_n) of f, its canonical-dual version q_0 and mu = ||T_f - T_g||.

    :param f: frame
    :param g: perturbed family, same shape
    :param dual_for_weight: dual frame of f weighting q_Lambda; None means the canonical dual
    :param tol: tolerance policy
    :return: ClosenessReport
    """
    check_same_shape(f, g)
    bounds = require_frame(f, tol)
    difference = f.get_vectors() - g.get_vectors()
    difference_norms = np.linalg.norm(difference, axis=1)
    canonical_norms = np.linalg.norm(inverse_frame_operator(f, tol) @ synthesis_matrix(f), axis=0)

    q = float(np.sum(difference_norms ** 2))
    q0 = float(np.dot(difference_norms, canonical_norms))
    if dual_for_weight is None:
        q_weighted = q0
        dual_upper = 1.0 / bounds.lower_opt
    else:
        check_same_shape(f, dual_for_weight)
        if not is_dual_pair(f, dual_for_weight, tol):
            raise InputError("The weighting family is not a dual frame of the original frame.")
        q_weighted = float(np.dot(difference_norms, np.linalg.norm(dual_for_weight.get_vectors(), axis=1)))
        dual_upper = frame_bounds(dual_for_weight, tol).upper_opt

    # m <= q is part of both definitions; the weighted closeness must also stay below 1
    quadratic = bounds.lower_opt <= q
    mu = operator_norm(difference)
    logger.debug("Closeness: q=%.12g, q_weighted=%.12g, q0=%.12g, mu=%.12g", q, q_weighted, q0, mu)
    return ClosenessReport(q, q_weighted, q0, mu, bounds.lower_opt, bounds.upper_opt, dual_upper,
                           quadratic and q_weighted < 1.0, quadratic and q0 < 1.0)


def gap_between_bases(bx: CMatrix, by: CMatrix) -> float:
    """
    delta(X, Y) = ||(I - P_Y) B_X|| for orthonormal bases B_X, B_Y.
    """
    if bx.shape[1] == 0:
        return 0.0
    residual = bx - by @ (adjoint(by) @ bx)
    return min(max(operator_norm(residual), 0.0), 1.0)


def subspace_gap(x_span: CMatrix, y_span: CMatrix, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> GapReport:
    """
    One-sided gaps both ways and the symmetric gap between the column spans of x_span and y_span.
    """
    x_span = as_cmatrix(x_span, allow_empty=True)
    y_span = as_cmatrix(y_span, allow_empty=True)
    if x_span.shape[0] != y_span.shape[0]:
        raise InputError(f"Spans live in different spaces: {x_span.shape[0]} vs {y_span.shape[0]} rows.")
    bx = range_basis(x_span, tol)
    by = range_basis(y_span, tol)
    delta_xy = gap_between_bases(bx, by)
    delta_yx = gap_between_bases(by, bx)
    big_delta = max(delta_xy, delta_yx)
    return GapReport(delta_xy, delta_yx, big_delta, big_delta < 1.0)


def analysis_range_gap(f: Frame, g: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> GapReport:
    check_same_shape(f, g)
    return subspace_gap(analysis_matrix(f), analysis_matrix(g), tol)


def gap_bound_audit(f: Frame, g: Frame, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> BoundAudit:
    """
    delta(ran U_f, ran U_g) <= ||T_f - T_g|| / sqrt(m_f).
    """
    check_same_shape(f, g)
    name = 'analysis_gap'
    bounds = frame_bounds(f, tol)
    if not bounds.is_frame():
        return not_applicable(name)
    gap = analysis_range_gap(f, g, tol)
    mu = operator_norm(f.get_vectors() - g.get_vectors())
    return make_audit(name, gap.delta_xy, mu / math.sqrt(bounds.lower_opt))


def _perturbed_frame_audits(prefix: str, applicable: bool, g: Frame, lower: float, upper: float,
                            tol: TolerancePolicy, note: str = '') -> list[BoundAudit]:
    if not applicable:
        return [not_applicable(f'{prefix}.lower', lower, math.nan, note),
                not_applicable(f'{prefix}.upper', math.nan, upper, note)]
    g_bounds = frame_bounds(g, tol)
    return [make_audit(f'{prefix}.lower', lower, g_bounds.lower_opt, note=note),
            make_audit(f'{prefix}.upper', g_bounds.upper_opt, upper, note=note)]


def perturbed_frame_audit(f: Frame, g: Frame, variant: str, dual_for_weight: Frame | None = None,
                          tol: TolerancePolicy = DEFAULT_TOLERANCE) -> list[BoundAudit]:
    """
    Predicted frame bounds of the perturbed family and the bound on Delta(ran U_f, ran U_g), per closeness variant.

    :param f: frame
    :param g: perturbed family
    :param variant: 'mu', 'd-quad' (weighted by dual_for_weight) or 'c-quad' (canonical weighting)
    :param dual_for_weight: dual of f for the d-quad variant; None means the canonical dual
    :param tol: tolerance policy
    :return: list of audits, the not-applicable ones included
    """
    if variant not in ('mu', 'd-quad', 'c-quad'):
        raise InputError(f"Unknown closeness variant '{variant}'. Expected 'mu', 'd-quad' or 'c-quad'.")
    report = closeness(f, g, dual_for_weight, tol)
    m, upper_f, q = report.lower_opt, report.upper_opt, report.q
    sqrt_m = math.sqrt(m)

    def gap():
        return analysis_range_gap(f, g, tol).Delta

    if variant == 'mu':
        prefix = 'perturbed_frame.mu'
        applicable = mu_below_root(report.mu, m, tol)
        audits = _perturbed_frame_audits(prefix, applicable, g, (sqrt_m - report.mu) ** 2,
                                         (math.sqrt(upper_f) + report.mu) ** 2, tol)
        if applicable:
            audits.append(make_audit(f'{prefix}.gap', gap(), report.mu / (sqrt_m - report.mu)))
        else:
            audits.append(not_applicable(f'{prefix}.gap'))
        return audits

    upper_prediction = upper_f * (1.0 + math.sqrt(q / upper_f)) ** 2
    if variant == 'c-quad':
        prefix = 'perturbed_frame.c_quad'
        applicable = report.c_quad_flag
        audits = _perturbed_frame_audits(prefix, applicable, g, m * (1.0 - report.q0) ** 2, upper_prediction, tol)
        if applicable:
            audits.append(make_audit(f'{prefix}.gap', gap(), math.sqrt(q / m) / (1.0 - report.q0)))
        else:
            audits.append(not_applicable(f'{prefix}.gap'))
        return audits

    prefix = 'perturbed_frame.d_quad'
    q_l, upper_dual = report.q_weighted, report.dual_upper
    applicable = report.d_quad_flag
    audits = _perturbed_frame_audits(prefix, applicable, g, (1.0 - q_l) ** 2 / upper_dual, upper_prediction, tol)
    if not applicable:
        return audits + [not_applicable(f'{prefix}.gap_small_dual'), not_applicable(f'{prefix}.gap_large_dual')]
    delta = gap()
    if math.sqrt(m * upper_dual) <= 1.0 - q_l:
        return audits + [make_audit(f'{prefix}.gap_small_dual', delta, math.sqrt(q / m)),
                         not_applicable(f'{prefix}.gap_large_dual')]
    return audits + [not_applicable(f'{prefix}.gap_small_dual'),
                     make_audit(f'{prefix}.gap_large_dual', delta, math.sqrt(q * upper_dual) / (1.0 - q_l))]


def _kernel_part(t: CMatrix, synthesis: CMatrix, tol: TolerancePolicy) -> CMatrix:
    # synthesis @ P_ker(t), computed as (P_ker(t) synthesis*)*
    return adjoint(kernel_projection(t, adjoint(synthesis), tol))


def dual_difference_terms(f: Frame, g: Frame, p1: ApproxDualParams, p2: ApproxDualParams,
                          tol: TolerancePolicy = DEFAULT_TOLERANCE) -> tuple[CMatrix, list[CMatrix]]:
    """
    Left side T_{g_ad} - T_{f_ad} and the four summands of its expansion
    T_{f_ad}(U_f - U_g)T_{g~} + Theta_2* - T_{f_ad} P_ker(T_g) - (A_1* - A_2*) T_{g~}, where g~ is the canonical dual
    of g. The third and fourth summands come with their signs applied.
    """
    check_same_shape(f, g)
    p1 = p1 if p1.validated else validate_params(f, p1, tol)
    p2 = p2 if p2.validated else validate_params(g, p2, tol)
    t_f, t_g = synthesis_matrix(f), synthesis_matrix(g)
    f_ad = dual_synthesis(f, p1, tol)
    g_ad = dual_synthesis(g, p2, tol)
    g_canonical = inverse_frame_operator(g, tol) @ t_g

    summands = [
        (f_ad @ (adjoint(t_f) - adjoint(t_g))) @ g_canonical,
        adjoint(p2.Theta),
        -_kernel_part(t_g, f_ad, tol),
        -(adjoint(p1.A) - adjoint(p2.A)) @ g_canonical,
    ]
    return g_ad - f_ad, summands


def dual_difference_residual(f: Frame, g: Frame, p1: ApproxDualParams, p2: ApproxDualParams,
                             tol: TolerancePolicy = DEFAULT_TOLERANCE) -> tuple[float, float]:
    """
    :return: (||left - right||, scale) where scale is the largest norm among the left side and the summands
    """
    left, summands = dual_difference_terms(f, g, p1, p2, tol)
    residual = operator_norm(left - sum(summands))
    scale = max([operator_norm(left)] + [operator_norm(s) for s in summands])
    return residual, scale


def dual_difference_audit(f: Frame, g: Frame, p1: ApproxDualParams, p2: ApproxDualParams,
                          tol: TolerancePolicy = DEFAULT_TOLERANCE) -> BoundAudit:
    residual, scale = dual_difference_residual(f, g, p1, p2, tol)
    return make_audit('dual_difference_identity', residual, tol.identity_residual_rel * max(scale, 1.0), rel=0.0)


def theta_ba(f: Frame, g: Frame, p1: ApproxDualParams, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    P_ker(T_g) U_{f_ad}: the Theta that makes the approximate dual of g closest to the given dual of f.
    """
    check_same_shape(f, g)
    require_frame(g, tol)
    p1 = p1 if p1.validated else validate_params(f, p1, tol)
    return kernel_projection(synthesis_matrix(g), adjoint(dual_synthesis(f, p1, tol)), tol)


@dataclass(frozen=True, eq=False)
class BestApproximation:
    report: ApproxDualReport
    theta: CMatrix
    distance: float
    lambda_bound: BoundAudit
    optimality: BoundAudit
    projector_identity: BoundAudit


def lambda_bound(mu: float, m: float, a1_norm: float, theta_norm: float, a_gap: float) -> float:
    """
    mu/(sqrt(m) - mu) * (||A_1||/sqrt(m) + ||Theta|| + ||A_1 - A_2||/mu), written without dividing by mu.
    """
    sqrt_m = math.sqrt(m)
    return (mu * (a1_norm / sqrt_m + theta_norm) + a_gap) / (sqrt_m - mu)


def best_approx_dual(f: Frame, g: Frame, p1: ApproxDualParams, a2: CMatrix, trials: int = 100, seed: int = 0,
                     tol: TolerancePolicy = DEFAULT_TOLERANCE) -> BestApproximation:
    """
    Builds the approximate dual of g with Theta = theta_ba(f, g, p1) and operator a2, and audits it against the dual
    of f given by p1.

    Optimality is checked two ways: against `trials` random kernel-valued Lambda (plus Lambda = 0), and through the
    exact value ||(A_2* T_{g~} - T_{f_ad}) P_ran(U_g)|| of the minimal distance.

    :param f: frame
    :param g: perturbed frame with ||T_f - T_g|| < sqrt(m_f)
    :param p1: (A_1, Theta) for f
    :param a2: A_2 with ||I - A_2|| < 1
    :param trials: random competitors for the optimality audit
    :param seed: master seed
    :param tol: tolerance policy
    :return: BestApproximation
    """
    check_same_shape(f, g)
    bounds = require_frame(f, tol)
    mu = operator_norm(f.get_vectors() - g.get_vectors())
    if not mu_below_root(mu, bounds.lower_opt, tol):
        raise PreconditionError(f"mu = {mu:.12g} is not below sqrt(m) = {math.sqrt(bounds.lower_opt):.12g}.")
    p1 = p1 if p1.validated else validate_params(f, p1, tol)
    a2 = np.asarray(a2, dtype=np.complex128)
    check_contraction(a2, tol)

    theta = theta_ba(f, g, p1, tol)
    report = build_approx_dual(g, make_params(g, a2, theta), tol)
    f_ad = dual_synthesis(f, p1, tol)
    g_ad = synthesis_matrix(report.dual)
    distance = operator_norm(g_ad - f_ad)

    bound = lambda_bound(mu, bounds.lower_opt, operator_norm(p1.A), operator_norm(p1.Theta),
                         operator_norm(p1.A - a2))
    lambda_audit = make_audit('best_approx.lambda', distance, bound)

    t_g = synthesis_matrix(g)
    base = adjoint(a2) @ inverse_frame_operator(g, tol) @ t_g - f_ad
    competitor = operator_norm(base)  # Lambda = 0
    kernel = kernel_basis(t_g, tol)
    if kernel.shape[1] == 0:
        # Lambda = 0 is the only kernel-valued choice
        trials = 0
    for trial in range(trials):
        rng = stream_generator(seed, 'best_approx_dual', trial)
        lam = kernel @ complex_gaussian(rng, (kernel.shape[1], g.get_dim()))
        lam *= rng.uniform(0.1, 3.0) / operator_norm(lam)
        competitor = min(competitor, operator_norm(base + adjoint(lam)))
    optimality = make_audit('best_approx.optimality', distance, competitor, rel=OPTIMALITY_REL)

    expected = operator_norm(base @ range_basis(analysis_matrix(g), tol))
    identity = make_audit('best_approx.projector_identity', abs(distance - expected) / max(1.0, distance), 0.0,
                          rel=OPTIMALITY_REL)
    logger.debug("Best approximation: distance %.12g, lambda %.12g, best competitor %.12g", distance, bound,
                 competitor)
    return BestApproximation(report, report.params.Theta, distance, lambda_audit, optimality, identity)


def best_approx_bessel_form(f: Frame, g: Frame, p1: ApproxDualParams, a2: CMatrix,
                            tol: TolerancePolicy = DEFAULT_TOLERANCE) -> tuple[Frame, BoundAudit]:
    """
    The best-approximating dual of g written through the Bessel sequence W = T_{f_ad}: its vectors are
    A_2* S_g^-1 g_n + W delta_n - sum_j <S_g^-1 g_n, g_j> W delta_j. Forms an N x N Gram matrix.

    :return: (dual from the Bessel form, audit of its distance to the Theta_ba construction)
    """
    p1 = p1 if p1.validated else validate_params(f, p1, tol)
    w = dual_synthesis(f, p1, tol)
    bessel_dual = bessel_sum_dual(g, a2, w, tol)
    params = make_params(g, a2, bessel_to_theta(g, w, tol))
    direct = build_approx_dual(g, params, tol).dual
    deviation = operator_norm(synthesis_matrix(bessel_dual) - synthesis_matrix(direct))
    scale = max(1.0, operator_norm(synthesis_matrix(direct)))
    return bessel_dual, make_audit('best_approx.bessel_form', deviation / scale, 0.0, rel=OPTIMALITY_REL)


def canonical_not_best_check(f: Frame, g: Frame, a1: CMatrix, a2: CMatrix,
                             tol: TolerancePolicy = DEFAULT_TOLERANCE) -> tuple[float, float, BoundAudit]:
    """
    Distance from the canonical approximate dual of f to (a) the canonical approximate dual of g and (b) the
    Theta_ba dual of g. (b) never exceeds (a); (a) is usually strictly larger.

    :return: (canonical distance, best distance, audit best <= canonical)
    """
    check_same_shape(f, g)
    name = 'best_approx.beats_canonical'
    if not frame_bounds(g, tol).is_frame():
        return math.nan, math.nan, not_applicable(name)
    p1 = validate_params(f, make_params(f, a1), tol)
    f_ad = dual_synthesis(f, p1, tol)
    canonical = build_approx_dual(g, make_params(g, a2), tol)
    best = build_approx_dual(g, make_params(g, a2, theta_ba(f, g, p1, tol)), tol)
    canonical_distance = operator_norm(synthesis_matrix(canonical.dual) - f_ad)
    best_distance = operator_norm(synthesis_matrix(best.dual) - f_ad)
    return canonical_distance, best_distance, make_audit(name, best_distance, canonical_distance,
                                                        rel=OPTIMALITY_REL)


def _canonical_ad_synthesis(f: Frame, a: CMatrix, tol: TolerancePolicy) -> CMatrix:
    return adjoint(np.asarray(a, dtype=np.complex128)) @ inverse_frame_operator(f, tol) @ synthesis_matrix(f)


def deviation_bound_audit(kind: str, f: Frame, g: Frame, a1: CMatrix, a2: CMatrix,
                          dual_for_weight: Frame | None = None, theta: CMatrix | None = None,
                          tol: TolerancePolicy = DEFAULT_TOLERANCE) -> list[BoundAudit]:
    """
    Deviation bounds between approximate duals of a frame f and of its perturbation g.

    :param kind: 'canonical-ad' (canonical approximate duals, two bounds), 'canonical-dual' (canonical dual of f
        against the canonical approximate dual of g with operator a2; a1 is ignored), 'd-quad' or 'c-quad'
    :param f: frame
    :param g: perturbed family
    :param a1: operator for f
    :param a2: operator for g
    :param dual_for_weight: dual of f weighting q_Lambda for 'd-quad'
    :param theta: kernel-valued Theta for f, used by the rho and upsilon bounds (zero when omitted)
    :param tol: tolerance policy
    :return: list of audits
    """
    if kind not in DEVIATION_KINDS:
        raise InputError(f"Unknown deviation kind '{kind}'. Expected one of {', '.join(DEVIATION_KINDS)}.")
    a1 = np.asarray(a1, dtype=np.complex128)
    a2 = np.asarray(a2, dtype=np.complex128)
    eps1 = check_contraction(a1, tol)
    eps2 = check_contraction(a2, tol)
    report = closeness(f, g, dual_for_weight, tol)
    m, mu, q = report.lower_opt, report.mu, report.q
    sqrt_m, sqrt_q = math.sqrt(m), math.sqrt(report.q)
    a1_norm, a_gap = operator_norm(a1), operator_norm(a1 - a2)

    def canonical_distance(first: CMatrix) -> float:
        return operator_norm(_canonical_ad_synthesis(g, a2, tol) - _canonical_ad_synthesis(f, first, tol))

    if kind == 'canonical-ad':
        names = ('canonical_ad_deviation.first', 'canonical_ad_deviation.second')
        if not mu_below_root(mu, m, tol):
            return [not_applicable(n) for n in names]
        lhs = canonical_distance(a1)
        first = 2 * mu * a1_norm / (sqrt_m * (sqrt_m - mu)) + a_gap / (sqrt_m - mu)
        second = (2 * mu / (sqrt_m * (sqrt_m - mu)) + eps1 * (2 * mu + sqrt_m) / (sqrt_m * (sqrt_m - mu))
                  + eps2 / (sqrt_m - mu))
        return [make_audit(names[0], lhs, first), make_audit(names[1], lhs, second)]

    if kind == 'canonical-dual':
        name = 'canonical_dual_deviation'
        if not mu_below_root(mu, m, tol):
            return [not_applicable(name)]
        lhs = canonical_distance(np.eye(f.get_dim()))
        rhs = (2 * mu * operator_norm(a2) + eps2 * sqrt_m) / (sqrt_m * (sqrt_m - mu))
        return [make_audit(name, lhs, rhs)]

    theta = np.zeros((f.get_size(), f.get_dim()), dtype=np.complex128) if theta is None else theta
    p1 = validate_params(f, make_params(f, a1, theta), tol)
    theta_norm = operator_norm(p1.Theta)
    inner = sqrt_q * (a1_norm / sqrt_m + theta_norm) + a_gap

    def best_distance() -> float:
        best = build_approx_dual(g, make_params(g, a2, theta_ba(f, g, p1, tol)), tol)
        return operator_norm(synthesis_matrix(best.dual) - dual_synthesis(f, p1, tol))

    if kind == 'c-quad':
        names = ('c_quad.upsilon', 'c_quad.canonical')
        if not report.c_quad_flag:
            return [not_applicable(n, note=C_QUAD_NOTE) for n in names]
        factor = 1.0 / (sqrt_m * (1.0 - report.q0))
        return [make_audit(names[0], best_distance(), factor * inner, note=C_QUAD_NOTE),
                make_audit(names[1], canonical_distance(a1), factor * (2 * a1_norm * math.sqrt(q / m) + a_gap),
                           note=C_QUAD_NOTE)]

    names = ('d_quad.rho', 'd_quad.canonical_small_dual', 'd_quad.canonical_large_dual')
    q_l, upper_dual = report.q_weighted, report.dual_upper
    if not report.d_quad_flag:
        return [not_applicable(n) for n in names]
    factor = math.sqrt(upper_dual) / (1.0 - q_l)
    audits = [make_audit(names[0], best_distance(), factor * inner)]
    lhs = canonical_distance(a1)
    if math.sqrt(m * upper_dual) <= 1.0 - q_l:
        audits += [make_audit(names[1], lhs, (2 * sqrt_q * a1_norm + sqrt_m * a_gap) / m), not_applicable(names[2])]
    else:
        audits += [not_applicable(names[1]),
                   make_audit(names[2], lhs, factor * (2 * a1_norm * math.sqrt(q / m) + a_gap))]
    return audits


def _require_gamma_hypothesis(f: Frame, g: Frame, tol: TolerancePolicy) -> FrameBounds:
    check_same_shape(f, g)
    bounds = require_frame(f, tol)
    mu = operator_norm(f.get_vectors() - g.get_vectors())
    if mu >= math.sqrt(bounds.lower_opt) / 2:
        raise PreconditionError(f"mu = {mu:.12g} is not below sqrt(m)/2 = {math.sqrt(bounds.lower_opt) / 2:.12g}.")
    return bounds


def gamma_map(f: Frame, g: Frame, p: ApproxDualParams,
              tol: TolerancePolicy = DEFAULT_TOLERANCE) -> ApproxDualParams:
    """
    (A, Theta) for f -> (A, Theta_ba) for g. One-to-one between the approximate-dual parameters of f and g when
    ||T_f - T_g|| < sqrt(m_f)/2.
    """
    _require_gamma_hypothesis(f, g, tol)
    p = p if p.validated else validate_params(f, p, tol)
    return validate_params(g, make_params(g, p.A, theta_ba(f, g, p, tol)), tol)


def gamma_inverse(f: Frame, g: Frame, lam: CMatrix, a: CMatrix,
                  tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    Recovers Theta in ker(T_f) with P_ker(T_g)(U_f S_f^-1 A + Theta) = lam by inverting P_ker(T_g) restricted to
    ker(T_f) in orthonormal kernel bases.

    :param f: frame
    :param g: perturbed frame
    :param lam: kernel-valued Theta for g (N x d); projected onto ker(T_g) first
    :param a: operator with ||I - a|| < 1
    :param tol: tolerance policy
    :return: Theta (N x d)
    """
    _require_gamma_hypothesis(f, g, tol)
    a = np.asarray(a, dtype=np.complex128)
    check_contraction(a, tol)
    lam = np.asarray(lam, dtype=np.complex128)
    if lam.shape != (f.get_size(), f.get_dim()):
        raise InputError(f"Lambda must be {f.get_size()} x {f.get_dim()}. Got shape {lam.shape}.")

    t_f, t_g = synthesis_matrix(f), synthesis_matrix(g)
    projected = kernel_projection(t_g, lam, tol)
    if operator_norm(projected - lam) > tol.identity_residual_rel * max(1.0, operator_norm(lam)):
        raise InconsistentThetaError("Lambda is not kernel-valued for the perturbed frame.")

    basis_f = kernel_basis(t_f, tol)
    basis_g = kernel_basis(t_g, tol)
    if basis_f.shape[1] != basis_g.shape[1]:
        raise GapHypothesisError(f"Kernels differ in dimension: {basis_f.shape[1]} vs {basis_g.shape[1]}.")
    if basis_f.shape[1] == 0:
        return np.zeros_like(lam)

    restricted = adjoint(basis_g) @ basis_f
    if smallest_singular_value(restricted) <= tol.rank_cutoff_rel:
        raise GapHypothesisError("P_ker(T_g) restricted to ker(T_f) is numerically singular.")
    canonical_part = kernel_projection(t_g, analysis_matrix(f) @ inverse_frame_operator(f, tol) @ a, tol)
    coefficients = scipy.linalg.solve(restricted, adjoint(basis_g) @ (projected - canonical_part))
    return basis_f @ coefficients


def gamma_round_trip_audit(f: Frame, g: Frame, p: ApproxDualParams, seed: int = 0,
                           tol: TolerancePolicy = DEFAULT_TOLERANCE) -> list[BoundAudit]:
    """
    Both compositions of the parameter bijection against identity: Theta -> Gamma -> inverse, and a random Lambda ->
    inverse -> Gamma.
    """
    names = ('gamma.round_trip', 'gamma.inverse_round_trip')
    check_same_shape(f, g)
    bounds = frame_bounds(f, tol)
    mu = operator_norm(f.get_vectors() - g.get_vectors())
    if not bounds.is_frame() or mu >= math.sqrt(bounds.lower_opt) / 2:
        return [not_applicable(n) for n in names]

    p = p if p.validated else validate_params(f, p, tol)
    image = gamma_map(f, g, p, tol)
    recovered = gamma_inverse(f, g, image.Theta, p.A, tol)
    forward = operator_norm(recovered - p.Theta) / max(1.0, operator_norm(p.Theta))

    rng = stream_generator(seed, 'gamma_round_trip_audit')
    lam = kernel_projection(synthesis_matrix(g), complex_gaussian(rng, (g.get_size(), g.get_dim())), tol)
    theta = gamma_inverse(f, g, lam, p.A, tol)
    back = gamma_map(f, g, make_params(f, p.A, theta), tol)
    backward = operator_norm(back.Theta - lam) / max(1.0, operator_norm(lam))
    return [make_audit(names[0], forward, 0.0), make_audit(names[1], backward, 0.0)]
