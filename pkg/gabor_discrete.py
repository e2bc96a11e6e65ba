"""
Discrete Gabor systems on the cyclic group Z_L.

A system (L, a, b, g) generates the L/a * L/b vectors E_{mb} T_{na} g with entries
e^{2 pi i m b j / L} g[(j - na) mod L], ordered with the time-shift index n outer and the modulation index m
inner. That order is part of the file format.

The frame operator of such a system only has the diagonals j - l = k L/b, filled with (L/b) G_k[j], where
G_k[j] = sum_n g[j - na] conj(g[j - na - kL/b]). The correlation bounds below are therefore row-sum (Gershgorin)
bounds of S.
"""
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from approx_dual import ApproxDualReport, bessel_to_theta, build_approx_dual, check_contraction, make_params
from frame_core import (Frame, frame_bounds, frame_norm_distance, frame_operator, inverse_frame_operator,
                        reconstruction_operator, require_frame, synthesis_matrix)
from framekit_errors import InputError, LatticeError, PreconditionError, StructureError
from numeric_kernel import CMatrix, DEFAULT_TOLERANCE, TolerancePolicy, adjoint, operator_norm
from perturbation import BoundAudit, best_approx_dual, make_audit, not_applicable

logger = logging.getLogger(__name__)

COMMUTATION_REL = 1e-9
WALNUT_NOTE = ("The correlation bound built from the infimum is the lower frame-bound estimate and the one built from "
               "the supremum is the upper estimate.")
WIENER_NOTE = ("Discrete Wiener proxies use the constant 2L/b for the continuous 2/b; both constants and both the "
               "linear and squared norm are reported.")


@dataclass(frozen=True, eq=False)
class GaborSystem:
    L: int
    a: int
    b: int
    window: np.ndarray

    def __post_init__(self):
        for name in ('L', 'a', 'b'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise LatticeError(f"{name} must be a positive integer. Got {value!r}.")
        if self.L % self.a != 0:
            raise LatticeError(f"Time step a = {self.a} does not divide L = {self.L}.")
        if self.L % self.b != 0:
            raise LatticeError(f"Frequency step b = {self.b} does not divide L = {self.L}.")

        window = np.array(self.window, dtype=np.complex128)
        if window.shape != (self.L,):
            raise InputError(f"Window must have length L = {self.L}. Got shape {window.shape}.")
        if not np.all(np.isfinite(window)):
            raise InputError("Window contains NaN or Inf entries.")
        window.setflags(write=False)
        object.__setattr__(self, 'window', window)

    def shift_count(self) -> int:
        return self.L // self.a

    def modulation_count(self) -> int:
        return self.L // self.b

    def size(self) -> int:
        return self.shift_count() * self.modulation_count()

    def redundancy(self) -> float:
        return self.L / (self.a * self.b)

    def with_window(self, window) -> 'GaborSystem':
        return replace(self, window=window)


@dataclass(frozen=True, eq=False)
class WalnutReport:
    correlations: np.ndarray
    lower_est: float
    upper_est: float
    note: str = WALNUT_NOTE


@dataclass(frozen=True, eq=False)
class GaborDualWindow:
    window: np.ndarray
    report: ApproxDualReport
    structure_residual: float
    two_route_deviation: float


def build_gabor_frame(system: GaborSystem) -> Frame:
    """
    :return: Frame of dimension L with the (L/a)(L/b) vectors E_{mb} T_{na} g, n outer and m inner
    """
    j = np.arange(system.L)
    shifted = np.stack([np.roll(system.window, n * system.a) for n in range(system.shift_count())])
    modulations = np.exp(2j * np.pi * np.outer(np.arange(system.modulation_count()) * system.b, j) / system.L)
    vectors = (shifted[:, None, :] * modulations[None, :, :]).reshape(-1, system.L)
    return Frame(vectors)


def _window_synthesis(system: GaborSystem, window) -> CMatrix:
    return synthesis_matrix(build_gabor_frame(system.with_window(window)))


def shift_operator(L: int, step: int) -> CMatrix:
    """
    Cyclic translation (T x)[j] = x[(j - step) mod L] as a permutation matrix.
    """
    return np.roll(np.eye(L, dtype=np.complex128), step, axis=0)


def modulation_operator(L: int, step: int) -> CMatrix:
    """
    (E x)[j] = e^{2 pi i step j / L} x[j].
    """
    return np.diag(np.exp(2j * np.pi * step * np.arange(L) / L))


def correlation_functions(system: GaborSystem) -> np.ndarray:
    """
    :return: b x L array, row k is G_k[j] = sum_n g[(j - na) mod L] conj(g[(j - na - kL/b) mod L])
    """
    g = system.window
    j = np.arange(system.L)
    base = (j[None, :] - system.a * np.arange(system.shift_count())[:, None]) % system.L
    period = system.L // system.b
    rows = [np.sum(g[base] * np.conj(g[(base - k * period) % system.L]), axis=0) for k in range(system.b)]
    return np.array(rows)


def walnut_report(system: GaborSystem) -> WalnutReport:
    """
    upper_est = (L/b) max_j sum_k |G_k[j]| and lower_est = (L/b) min_j (G_0[j] - sum_{k != 0} |G_k[j]|), clamped at 0.
    """
    correlations = correlation_functions(system)
    factor = system.L / system.b
    magnitudes = np.abs(correlations)
    upper = factor * float(np.max(np.sum(magnitudes, axis=0)))
    lower = factor * float(np.min(correlations[0].real - np.sum(magnitudes[1:], axis=0)))
    return WalnutReport(correlations, max(lower, 0.0), upper)


def walnut_sandwich_audit(system: GaborSystem, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> list[BoundAudit]:
    report = walnut_report(system)
    bounds = frame_bounds(build_gabor_frame(system), tol)
    return [make_audit('walnut.lower', report.lower_est, bounds.lower_opt, note=report.note),
            make_audit('walnut.upper', bounds.upper_opt, report.upper_est, note=report.note)]


def envelope_audit(system: GaborSystem, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> BoundAudit:
    """
    max_j sum_n |g[j - na]|^2 <= (b/L) M_opt.
    """
    envelope = float(np.max(correlation_functions(system)[0].real))
    upper = frame_bounds(build_gabor_frame(system), tol).upper_opt
    return make_audit('gabor.envelope', envelope, system.b / system.L * upper)


def wiener_norm(g, L: int, a: int) -> float:
    """
    Sum over the L/a blocks [ka, (k+1)a) of max |g[j]| on the block.
    """
    if a < 1 or L % a != 0:
        raise LatticeError(f"Block length a = {a} does not divide L = {L}.")
    g = np.asarray(g, dtype=np.complex128)
    if g.shape != (L,):
        raise InputError(f"Expected a vector of length {L}. Got shape {g.shape}.")
    return float(np.sum(np.max(np.abs(g).reshape(L // a, a), axis=1)))


def correlation_r(system: GaborSystem, g2) -> float:
    """
    Upper correlation estimate of the system generated by g1 - g2; dominates ||T_{g1} - T_{g2}||^2.
    """
    g2 = np.asarray(g2, dtype=np.complex128)
    if g2.shape != system.window.shape:
        raise InputError(f"Windows differ in shape: {system.window.shape} vs {g2.shape}.")
    return walnut_report(system.with_window(system.window - g2)).upper_est


def commutation_residual(system: GaborSystem, a: CMatrix) -> float:
    """
    Largest of ||A T - T A|| and ||A E - E A|| for the generators T (shift by a) and E (modulation by b),
    relative to max(1, ||A||).
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.shape != (system.L, system.L):
        raise InputError(f"A must be {system.L} x {system.L}. Got shape {a.shape}.")
    shift = shift_operator(system.L, system.a)
    modulation = modulation_operator(system.L, system.b)
    residual = max(operator_norm(a @ shift - shift @ a), operator_norm(a @ modulation - modulation @ a))
    return residual / max(1.0, operator_norm(a))


def require_commuting(system: GaborSystem, a: CMatrix, rel: float = COMMUTATION_REL) -> None:
    residual = commutation_residual(system, a)
    if residual > rel:
        raise StructureError(f"Operator does not commute with the time-frequency shifts (residual {residual:.3e}).")


def commuting_operator(system: GaborSystem, scalar: complex | None = None,
                       coefficients: list[complex] | None = None,
                       tol: TolerancePolicy = DEFAULT_TOLERANCE) -> CMatrix:
    """
    A = scalar * I, or A = sum_k coefficients[k] S^k with S the frame operator of the system.

    :param system: Gabor system
    :param scalar: multiple of the identity
    :param coefficients: polynomial coefficients in S, constant term first
    :param tol: tolerance policy
    :return: A with ||I - A|| < 1, commuting with the lattice generators
    """
    if (scalar is None) == (coefficients is None):
        raise InputError("Give exactly one of a scalar or polynomial coefficients.")
    if scalar is not None:
        a = complex(scalar) * np.eye(system.L, dtype=np.complex128)
    else:
        if len(coefficients) == 0:
            raise InputError("Polynomial needs at least one coefficient.")
        s = frame_operator(build_gabor_frame(system))
        a = np.zeros((system.L, system.L), dtype=np.complex128)
        power = np.eye(system.L, dtype=np.complex128)
        for c in coefficients:
            a += complex(c) * power
            power = power @ s
    check_contraction(a, tol)
    require_commuting(system, a)
    return a


def optimal_scaling_coefficients(system: GaborSystem, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> list[float]:
    """
    [0, 2/(m + M)]: the multiple of S closest to the identity, with ||I - A|| = (M - m)/(M + m).
    """
    bounds = require_frame(build_gabor_frame(system), tol)
    return [0.0, 2.0 / (bounds.lower_opt + bounds.upper_opt)]


def gabor_approx_dual_window(system: GaborSystem, a: CMatrix, h=None,
                             tol: TolerancePolicy = DEFAULT_TOLERANCE) -> GaborDualWindow:
    """
    g_ad = A* S^-1 g + h - sum_{m,n} <S^-1 g, E_{mb} T_{na} g> E_{mb} T_{na} h.

    The window is also built at family level, as the approximate dual with Theta = P_ker(T) W* where W synthesizes
    the Gabor system of h; two_route_deviation compares the two.

    :param system: Gabor system generating a frame
    :param a: operator commuting with the lattice, ||I - a|| < 1
    :param h: Bessel generator, zero when omitted
    :param tol: tolerance policy
    :return: GaborDualWindow
    """
    f = build_gabor_frame(system)
    if not frame_bounds(f, tol).is_frame():
        raise PreconditionError("The Gabor system does not generate a frame.")
    a = np.asarray(a, dtype=np.complex128)
    check_contraction(a, tol)
    require_commuting(system, a)
    h = np.zeros(system.L, dtype=np.complex128) if h is None else np.asarray(h, dtype=np.complex128)
    if h.shape != (system.L,):
        raise InputError(f"h must have length {system.L}. Got shape {h.shape}.")

    canonical_window = inverse_frame_operator(f, tol) @ system.window
    w = _window_synthesis(system, h)
    coefficients = adjoint(synthesis_matrix(f)) @ canonical_window
    window = adjoint(a) @ canonical_window + h - w @ coefficients

    report = build_approx_dual(f, make_params(f, a, bessel_to_theta(f, w, tol)), tol)
    window_family = build_gabor_frame(system.with_window(window))
    structure_residual = operator_norm(reconstruction_operator(f, window_family) - a)
    deviation = frame_norm_distance(window_family, report.dual)
    logger.debug("Approximate dual window: structure residual %.3e, two-route deviation %.3e", structure_residual,
                 deviation)
    return GaborDualWindow(window, report, structure_residual, deviation)


def alternate_dual_window(system: GaborSystem, dual_window, a: CMatrix,
                          tol: TolerancePolicy = DEFAULT_TOLERANCE) -> tuple[np.ndarray, float]:
    """
    With h = S g_d for a dual window g_d the general formula collapses to g_ad = A* S^-1 g - g + S g_d.

    :return: (window from the short formula, entrywise deviation from the general formula)
    """
    f = build_gabor_frame(system)
    dual_window = np.asarray(dual_window, dtype=np.complex128)
    if dual_window.shape != (system.L,):
        raise InputError(f"Dual window must have length {system.L}. Got shape {dual_window.shape}.")
    dual_family = build_gabor_frame(system.with_window(dual_window))
    if operator_norm(reconstruction_operator(f, dual_family) - np.eye(system.L)) > tol.identity_residual_rel:
        raise PreconditionError("The given window does not generate a dual frame of the system.")

    s = frame_operator(f)
    a = np.asarray(a, dtype=np.complex128)
    short = adjoint(a) @ inverse_frame_operator(f, tol) @ system.window - system.window + s @ dual_window
    general = gabor_approx_dual_window(system, a, s @ dual_window, tol).window
    return short, float(np.max(np.abs(short - general)))


def gabor_best_approx_window(system: GaborSystem, g2, g1_ad, a2: CMatrix,
                             tol: TolerancePolicy = DEFAULT_TOLERANCE) -> np.ndarray:
    """
    g2_ad = A_2* S_2^-1 g2 + g1_ad - sum_{m,n} <S_2^-1 g2, E T g2> E T g1_ad: the window whose Gabor system is the
    best approximation of the system of g1_ad among approximate duals of the system of g2.
    """
    system2 = system.with_window(g2)
    f2 = build_gabor_frame(system2)
    require_frame(f2, tol)
    a2 = np.asarray(a2, dtype=np.complex128)
    require_commuting(system2, a2)
    canonical_window = inverse_frame_operator(f2, tol) @ system2.window
    w = _window_synthesis(system, g1_ad)
    return adjoint(a2) @ canonical_window + np.asarray(g1_ad) - w @ (adjoint(synthesis_matrix(f2)) @ canonical_window)


def _envelope(window: np.ndarray, system: GaborSystem) -> float:
    return float(np.max(correlation_functions(system.with_window(window))[0].real))


def _cad_bound(mu: float, m: float, a1_norm: float, a_gap: float) -> float:
    sqrt_m = math.sqrt(m)
    return 2 * mu * a1_norm / (sqrt_m * (sqrt_m - mu)) + a_gap / (sqrt_m - mu)


def wiener_proxies(system: GaborSystem, g2) -> dict[str, float]:
    norm = wiener_norm(system.window - np.asarray(g2, dtype=np.complex128), system.L, system.a)
    discrete, continuous = 2 * system.L / system.b, 2 / system.b
    return {
        'wiener_linear': discrete * norm,
        'wiener_squared': discrete * norm ** 2,
        'wiener_linear_unscaled': continuous * norm,
        'wiener_squared_unscaled': continuous * norm ** 2,
    }


def gabor_perturbation_audit(system: GaborSystem, g2, a1: CMatrix, a2: CMatrix, h=None, trials: int = 20,
                             seed: int = 0, tol: TolerancePolicy = DEFAULT_TOLERANCE) -> list[BoundAudit]:
    """
    Audits the perturbation g1 -> g2 of a Gabor frame with r the upper correlation estimate of g1 - g2:
    lower frame bound (sqrt(m) - sqrt(r))^2 of the perturbed system, the envelope of the canonical approximate dual
    window difference, and the window-level best approximation against the family-level one. The same checks are
    repeated with r replaced by each discrete Wiener proxy that is below m and dominates r.

    :param system: Gabor system of g1, generating a frame
    :param g2: perturbed window
    :param a1: operator for g1, commuting with the lattice
    :param a2: operator for g2, commuting with the lattice
    :param h: Bessel generator of the approximate dual of g1, zero when omitted
    :param trials: random competitors in the best-approximation optimality check
    :param seed: master seed
    :param tol: tolerance policy
    :return: list of audits; proxy dominations are report-only
    """
    g2 = np.asarray(g2, dtype=np.complex128)
    system2 = system.with_window(g2)
    f1, f2 = build_gabor_frame(system), build_gabor_frame(system2)
    m1 = require_frame(f1, tol).lower_opt
    a1 = np.asarray(a1, dtype=np.complex128)
    a2 = np.asarray(a2, dtype=np.complex128)
    check_contraction(a1, tol)
    check_contraction(a2, tol)
    require_commuting(system, a1)
    require_commuting(system, a2)

    r = correlation_r(system, g2)
    mu = frame_norm_distance(f1, f2)
    audits = [make_audit('gabor.bessel_domination', mu, math.sqrt(r))]
    a1_norm, a_gap = operator_norm(a1), operator_norm(a1 - a2)
    factor = system.b / system.L

    def bound_audits(prefix: str, value: float) -> list[BoundAudit]:
        names = (f'{prefix}.lower_bound', f'{prefix}.envelope_deviation', f'{prefix}.best_approx')
        if value >= m1:
            return [not_applicable(n) for n in names]
        root = math.sqrt(value)
        lower = make_audit(names[0], (math.sqrt(m1) - root) ** 2, frame_bounds(f2, tol).lower_opt)
        difference = (adjoint(a1) @ inverse_frame_operator(f1, tol) @ system.window
                      - adjoint(a2) @ inverse_frame_operator(f2, tol) @ g2)
        envelope = make_audit(names[1], _envelope(difference, system),
                              factor * _cad_bound(root, m1, a1_norm, a_gap) ** 2)
        return [lower, envelope, make_audit(names[2], best_deviation(), 0.0)]

    cache = {}

    def best_deviation() -> float:
        if 'best' not in cache:
            g1_ad = gabor_approx_dual_window(system, a1, h, tol)
            window = gabor_best_approx_window(system, g2, g1_ad.window, a2, tol)
            best = best_approx_dual(f1, f2, g1_ad.report.params, a2, trials, seed, tol)
            window_family = build_gabor_frame(system2.with_window(window))
            scale = max(1.0, operator_norm(synthesis_matrix(best.report.dual)))
            cache['best'] = frame_norm_distance(window_family, best.report.dual) / scale
            cache['audits'] = [replace(best.lambda_bound, name='gabor.best_approx.lambda'),
                               replace(best.optimality, name='gabor.best_approx.optimality')]
        return cache['best']

    audits += bound_audits('gabor', r)
    audits += cache.get('audits', [not_applicable('gabor.best_approx.lambda'),
                                   not_applicable('gabor.best_approx.optimality')])

    for name, proxy in wiener_proxies(system, g2).items():
        audits.append(make_audit(f'gabor.{name}.domination', r, proxy, report_only=True, note=WIENER_NOTE))
        if name.endswith('_unscaled'):
            continue
        if proxy < m1 and r <= proxy:
            audits += bound_audits(f'gabor.{name}', proxy)
        else:
            audits += [not_applicable(f'gabor.{name}.{part}', note=WIENER_NOTE)
                       for part in ('lower_bound', 'envelope_deviation', 'best_approx')]
    return audits
