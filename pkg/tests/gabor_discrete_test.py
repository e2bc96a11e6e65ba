import math

import numpy as np
import pytest

from data.frame_io import load_sample_gabor
from data.instance_generators import random_gabor_system, random_window_perturbation
from frame_core import frame_bounds, frame_operator
from framekit_errors import ContractionError, InputError, LatticeError, PreconditionError, StructureError
from gabor_discrete import (GaborSystem, alternate_dual_window, build_gabor_frame, commutation_residual,
                            commuting_operator, correlation_functions, envelope_audit, gabor_approx_dual_window,
                            gabor_perturbation_audit, optimal_scaling_coefficients, require_commuting,
                            walnut_report, walnut_sandwich_audit, wiener_norm, wiener_proxies)
from numeric_kernel import operator_norm
from perturbation import NOT_APPLICABLE, VIOLATED
from util.rng import complex_gaussian, stream_generator

LENGTHS = [8, 12, 16]
TRIALS_PER_LENGTH = 5
MIN_BOUND_RATIO = 1e-3


def well_conditioned_system(rng, length: int) -> GaborSystem:
    while True:
        system = random_gabor_system(rng, length)
        bounds = frame_bounds(build_gabor_frame(system))
        if bounds.lower_opt >= MIN_BOUND_RATIO * bounds.upper_opt:
            return system


def system_generator():
    for length in LENGTHS:
        for trial in range(TRIALS_PER_LENGTH):
            rng = stream_generator(42, f'gabor_test_{length}', trial)
            yield well_conditioned_system(rng, length), rng


def system_id_generator(instance) -> str:
    system, _ = instance
    return f'L={system.L} a={system.a} b={system.b}'


@pytest.fixture(scope='module')
def tight():
    return load_sample_gabor('gabor_tight_l4')


def test_gabor_system_tightSampleHasFrameOperatorTwoI(tight):
    f = build_gabor_frame(tight)
    bounds = frame_bounds(f)

    assert f.get_size() == tight.size() == 8
    assert tight.redundancy() == 2.0
    assert operator_norm(frame_operator(f) - 2 * np.eye(4)) < 1e-14
    assert bounds.lower_opt == pytest.approx(2.0) and bounds.upper_opt == pytest.approx(2.0)


def test_walnut_report_tightSampleIsExact(tight):
    report = walnut_report(tight)

    assert report.correlations.shape == (1, 4)
    assert report.lower_est == pytest.approx(2.0, abs=1e-14)
    assert report.upper_est == pytest.approx(2.0, abs=1e-14)


def test_envelope_audit_tightSampleIsAttained(tight):
    audit = envelope_audit(tight)

    assert audit.lhs == pytest.approx(0.5, abs=1e-14)
    assert audit.rhs == pytest.approx(0.5, abs=1e-14)
    assert audit.holds


def test_gabor_approx_dual_window_identityGivesCanonicalDualWindow(tight):
    dual = gabor_approx_dual_window(tight, np.eye(4))

    assert np.allclose(dual.window, tight.window / 2, atol=1e-14)
    assert np.allclose(dual.window, np.array([1, 1, 0, 0]) / (2 * math.sqrt(2)), atol=1e-14)
    assert dual.report.is_alternate_dual
    assert dual.two_route_deviation < 1e-12


def test_alternate_dual_window_canonicalDualCollapsesToItself(tight):
    short, deviation = alternate_dual_window(tight, tight.window / 2, np.eye(4))

    assert np.allclose(short, tight.window / 2, atol=1e-14)
    assert deviation < 1e-12


def test_alternate_dual_window_rejectsNonDualWindow(tight):
    with pytest.raises(PreconditionError):
        alternate_dual_window(tight, tight.window, np.eye(4))


@pytest.mark.parametrize('L, a, b', [(6, 4, 1), (6, 1, 4), (6, 0, 1)], ids=['a', 'b', 'zero'])
def test_gabor_system_rejectsNonDividingLattice(L, a, b):
    with pytest.raises(LatticeError):
        GaborSystem(L, a, b, np.ones(L))


def test_gabor_system_rejectsWrongWindowLength():
    with pytest.raises(InputError):
        GaborSystem(4, 2, 1, np.ones(3))


def test_wiener_norm_sumsBlockMaxima():
    assert wiener_norm([1.0, -2.0, 0.0, 3.0j], 4, 2) == pytest.approx(5.0)
    with pytest.raises(LatticeError):
        wiener_norm(np.ones(4), 4, 3)


def test_wiener_proxies_reportBothConstants(tight):
    proxies = wiener_proxies(tight, np.zeros(4))
    norm = wiener_norm(tight.window, 4, 2)

    assert proxies['wiener_linear'] == pytest.approx(8 * norm)
    assert proxies['wiener_squared_unscaled'] == pytest.approx(2 * norm ** 2)


def test_commuting_operator_rejectsBadArguments(tight):
    with pytest.raises(InputError):
        commuting_operator(tight)
    with pytest.raises(InputError):
        commuting_operator(tight, scalar=1.0, coefficients=[1.0])
    with pytest.raises(ContractionError):
        commuting_operator(tight, scalar=2.0)


def test_require_commuting_rejectsGenericMatrix(tight):
    a = np.diag([1.0, 0.9, 0.8, 0.7])

    with pytest.raises(StructureError):
        require_commuting(tight, a)


@pytest.mark.parametrize('instance', system_generator(), ids=system_id_generator)
def test_walnut_sandwich_audit_holds(instance):
    system, _ = instance
    audits = walnut_sandwich_audit(system) + [envelope_audit(system)]

    assert all(a.holds for a in audits), [(a.name, a.lhs, a.rhs) for a in audits]
    assert correlation_functions(system).shape == (system.b, system.L)


@pytest.mark.parametrize('instance', system_generator(), ids=system_id_generator)
def test_optimal_scaling_coefficients_commuteAndContract(instance):
    system, _ = instance
    a = commuting_operator(system, coefficients=optimal_scaling_coefficients(system))
    bounds = frame_bounds(build_gabor_frame(system))
    expected = (bounds.upper_opt - bounds.lower_opt) / (bounds.upper_opt + bounds.lower_opt)

    assert commutation_residual(system, a) < 1e-9
    assert operator_norm(np.eye(system.L) - a) == pytest.approx(expected, abs=1e-9)


@pytest.mark.parametrize('instance', system_generator(), ids=system_id_generator)
def test_gabor_approx_dual_window_windowAndFamilyRoutesAgree(instance):
    system, rng = instance
    a = commuting_operator(system, scalar=rng.uniform(0.2, 1.8))
    dual = gabor_approx_dual_window(system, a, complex_gaussian(rng, (system.L,)))

    assert dual.structure_residual < 1e-9 * max(1.0, operator_norm(a))
    assert dual.two_route_deviation < 1e-8, f"two-route deviation {dual.two_route_deviation}"


@pytest.mark.parametrize('instance', system_generator(), ids=system_id_generator)
def test_gabor_perturbation_audit_holdsOnRandomSystems(instance):
    system, rng = instance
    m = frame_bounds(build_gabor_frame(system)).lower_opt
    g2 = random_window_perturbation(rng, system, rng.uniform(0.0, 0.5) * math.sqrt(m / system.L))
    a1 = commuting_operator(system, scalar=rng.uniform(0.2, 1.8))
    a2 = commuting_operator(system, coefficients=optimal_scaling_coefficients(system))
    audits = gabor_perturbation_audit(system, g2, a1, a2, trials=10, seed=3)
    violated = [a for a in audits if a.verdict() == VIOLATED and not a.report_only]

    assert not violated, [(a.name, a.lhs, a.rhs) for a in violated]
    assert audits[0].name == 'gabor.bessel_domination' and audits[0].holds


def test_gabor_perturbation_audit_unperturbedWindowIsExact(tight):
    audits = gabor_perturbation_audit(tight, tight.window, np.eye(4), np.eye(4), trials=5)

    assert all(a.verdict() != NOT_APPLICABLE for a in audits)
    assert all(a.holds for a in audits), [(a.name, a.lhs, a.rhs) for a in audits if not a.holds]
    assert audits[0].lhs == pytest.approx(0.0, abs=1e-14)


@pytest.fixture(scope='module')
def critical():
    # a * b = L: the Gabor system is a basis and the analysis operator has a trivial kernel
    for trial in range(20):
        window = complex_gaussian(stream_generator(42, 'critical_gabor_test', trial), (8,))
        system = GaborSystem(8, 4, 2, window / np.linalg.norm(window))
        bounds = frame_bounds(build_gabor_frame(system))
        if bounds.lower_opt >= MIN_BOUND_RATIO * bounds.upper_opt:
            return system
    pytest.fail("no well-conditioned critically sampled window")


def test_gabor_approx_dual_window_criticalLatticeIgnoresBesselGenerator(critical):
    rng = stream_generator(42, 'critical_dual_test')
    a = commuting_operator(critical, scalar=0.7)
    with_h = gabor_approx_dual_window(critical, a, complex_gaussian(rng, (8,)))
    without_h = gabor_approx_dual_window(critical, a)

    assert np.linalg.norm(with_h.window - without_h.window) < 1e-9
    assert with_h.two_route_deviation < 1e-8


def test_gabor_perturbation_audit_criticalLatticeHasNoViolations(critical):
    rng = stream_generator(42, 'critical_perturbation_test')
    m = frame_bounds(build_gabor_frame(critical)).lower_opt
    g2 = random_window_perturbation(rng, critical, 0.3 * math.sqrt(m / critical.L))
    a1 = commuting_operator(critical, scalar=0.8)
    a2 = commuting_operator(critical, coefficients=optimal_scaling_coefficients(critical))
    audits = gabor_perturbation_audit(critical, g2, a1, a2, trials=10, seed=3)
    violated = [a for a in audits if a.verdict() == VIOLATED and not a.report_only]

    assert not violated, [(a.name, a.lhs, a.rhs) for a in violated]
