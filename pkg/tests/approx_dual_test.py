import logging

import numpy as np
import pytest

from approx_dual import (ApproxDualParams, bessel_sum_dual, bessel_to_theta, build_approx_dual, canonical_approx_dual,
                         check_contraction, make_params, minimal_norm_audit, random_admissible_operator,
                         random_kernel_theta, riesz_dual_check, same_excess_check, validate_params, with_theta)
from data.frame_io import load_sample_frame
from data.instance_generators import random_frame, random_params
from frame_core import Frame, excess, synthesis_matrix
from framekit_errors import ContractionError, InputError
from numeric_kernel import operator_norm
from util.rng import stream_generator

TRIALS = 25


def instance_generator():
    for trial in range(TRIALS):
        rng = stream_generator(42, 'approx_dual_test', trial)
        dim = int(rng.integers(2, 7))
        f = random_frame(rng, dim, int(rng.integers(dim, 15)))
        yield f, random_params(rng, f, rng.uniform(0.1, 2.0))


def instance_id_generator(instance) -> str:
    f, _ = instance
    return f'd={f.get_dim()} N={f.get_size()}'


@pytest.fixture(scope='module')
def mercedes():
    return load_sample_frame('mercedes')


@pytest.mark.parametrize('a', [2.0 * np.eye(2), np.zeros((2, 2)), np.diag([1.0, 2.0])], ids=['2I', 'zero', 'edge'])
def test_check_contraction_rejectsNormAtLeastOne(a):
    with pytest.raises(ContractionError):
        check_contraction(a)


def test_check_contraction_rejectsNonSquare():
    with pytest.raises(InputError):
        check_contraction(np.ones((2, 3)))


def test_validate_params_flagsNearBoundary(mercedes, caplog):
    a = np.diag([1.0, 1e-13])
    with caplog.at_level(logging.WARNING):
        params = validate_params(mercedes, make_params(mercedes, a))

    assert params.near_boundary
    assert 'flagged' in caplog.text


def test_validate_params_projectsThetaOntoKernel(mercedes):
    theta = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
    params = validate_params(mercedes, make_params(mercedes, None, theta))

    assert params.validated
    assert params.projection_residual > 0.0
    assert operator_norm(synthesis_matrix(mercedes) @ params.Theta) < 1e-14


def test_validate_params_rejectsWrongShapes(mercedes):
    with pytest.raises(InputError):
        validate_params(mercedes, ApproxDualParams(np.eye(3), np.zeros((3, 2))))
    with pytest.raises(InputError):
        validate_params(mercedes, ApproxDualParams(np.eye(2), np.zeros((2, 2))))


@pytest.mark.parametrize('instance', instance_generator(), ids=instance_id_generator)
def test_build_approx_dual_reconstructionEqualsA(instance):
    f, params = instance
    report = build_approx_dual(f, params)

    assert report.reconstruction_residual < 1e-9 * max(1.0, operator_norm(params.A)), \
        f"||T U_ad - A|| = {report.reconstruction_residual}"
    assert report.rate == pytest.approx(operator_norm(np.eye(f.get_dim()) - params.A), abs=1e-9)
    assert report.rate < 1.0


@pytest.mark.parametrize('instance', instance_generator(), ids=instance_id_generator)
def test_build_approx_dual_preservesExcess(instance):
    f, params = instance
    report = build_approx_dual(f, params)

    assert same_excess_check(f, report), f"excess {excess(f)} vs {excess(report.dual)}"


def test_build_approx_dual_identityAndZeroThetaIsCanonicalDual(mercedes):
    report = build_approx_dual(mercedes, make_params(mercedes))

    assert report.is_alternate_dual
    assert np.allclose(report.dual.get_vectors(), mercedes.get_vectors() / 1.5, atol=1e-14)


def test_canonical_approx_dual_isAStarTimesCanonicalDual(mercedes):
    a = np.array([[0.9, 0.1], [0.0, 1.2]])
    report = canonical_approx_dual(mercedes, a)
    expected = np.conj(a).T @ synthesis_matrix(mercedes) / 1.5

    assert operator_norm(synthesis_matrix(report.dual) - expected) < 1e-14
    assert not report.is_alternate_dual


def test_random_admissible_operator_staysInsideUnitBall():
    rng = stream_generator(1, 'admissible')
    for _ in range(20):
        assert operator_norm(np.eye(4) - random_admissible_operator(4, rng)) < 1.0


def test_random_kernel_theta_isKernelValuedWithRequestedNorm():
    rng = stream_generator(1, 'kernel_theta')
    f = random_frame(rng, 3, 8)
    theta = random_kernel_theta(f, rng, 1.7)

    assert operator_norm(theta) == pytest.approx(1.7, rel=1e-12)
    assert operator_norm(synthesis_matrix(f) @ theta) < 1e-12


def test_minimal_norm_audit_counterexampleIsFlaggedNotFailed(caplog):
    f = load_sample_frame('e1e1e2')
    with caplog.at_level(logging.WARNING):
        record = minimal_norm_audit(f, np.diag([0.9, 1.0]), trials=20, seed=42)

    assert record.equality_gap == pytest.approx(0.19, abs=1e-10)
    assert record.equality_flagged
    assert record.lower_bound_holds
    assert record.dominance_holds
    assert 'equality fails' in caplog.text


@pytest.mark.parametrize('instance', instance_generator(), ids=instance_id_generator)
def test_minimal_norm_audit_lowerBoundAndDominanceHold(instance):
    f, params = instance
    record = minimal_norm_audit(f, params.A, trials=10, seed=7)

    assert record.lower_bound_holds, f"lower bound {record.lower_bound} vs {record.canonical_norm}"
    assert record.dominance_holds, f"pointwise margin {record.min_pointwise_margin}"
    assert record.frobenius_residual < 1e-9


def test_minimal_norm_audit_scalarOperatorAttainsLowerBound(mercedes):
    record = minimal_norm_audit(mercedes, 0.8 * np.eye(2), trials=5, seed=3)

    assert not record.equality_flagged
    assert record.equality_gap == pytest.approx(0.0, abs=1e-12)


def test_minimal_norm_audit_rejectsZeroTrials(mercedes):
    with pytest.raises(InputError):
        minimal_norm_audit(mercedes, np.eye(2), trials=0, seed=0)


@pytest.mark.parametrize('instance', instance_generator(), ids=instance_id_generator)
def test_bessel_sum_dual_matchesThetaRoute(instance):
    f, params = instance
    rng = stream_generator(5, 'bessel_test', f.get_size())
    w = rng.standard_normal((f.get_dim(), f.get_size()))
    direct = build_approx_dual(f, make_params(f, params.A, bessel_to_theta(f, w)))
    term_by_term = bessel_sum_dual(f, params.A, w)

    assert operator_norm(synthesis_matrix(direct.dual) - synthesis_matrix(term_by_term)) < 1e-9


def test_bessel_to_theta_rejectsWrongShape(mercedes):
    with pytest.raises(InputError):
        bessel_to_theta(mercedes, np.zeros((3, 2)))


def test_riesz_dual_check_matchesClosedForm():
    b = np.array([[2.0, 1.0], [0.5, 1.0j]])
    deviation, is_riesz = riesz_dual_check(b, np.array([[0.9, 0.2], [0.0, 1.1]]))

    assert deviation < 1e-12
    assert is_riesz


def test_with_theta_marksParamsUnvalidated(mercedes):
    params = validate_params(mercedes, make_params(mercedes))
    updated = with_theta(params, np.ones((3, 2)))

    assert params.validated and not updated.validated
    assert np.array_equal(params.A, updated.A)


@pytest.fixture(scope='module')
def riesz():
    return Frame(np.diag([2.0, 1.0]))


def test_validate_params_rieszBasisAcceptsBesselTheta(riesz):
    w = np.array([[1.0, -2.0j], [0.5, 3.0]])
    theta = bessel_to_theta(riesz, w)
    params = validate_params(riesz, make_params(riesz, np.diag([0.9, 1.2]), theta))

    assert not np.any(theta)
    assert not np.any(params.Theta)
    assert params.theta_residual == 0.0


def test_build_approx_dual_rieszBasisHasOnlyCanonicalChoice(riesz):
    rng = stream_generator(42, 'riesz_test')
    a = random_admissible_operator(2, rng)
    report = build_approx_dual(riesz, make_params(riesz, a, rng.standard_normal((2, 2))))
    canonical = canonical_approx_dual(riesz, a)

    assert operator_norm(synthesis_matrix(report.dual) - synthesis_matrix(canonical.dual)) < 1e-12
    assert report.reconstruction_residual < 1e-12
    assert operator_norm(synthesis_matrix(bessel_sum_dual(riesz, a, rng.standard_normal((2, 2))))
                         - synthesis_matrix(canonical.dual)) < 1e-12
