import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from data.frame_io import load_sample_frame
from frame_core import (Frame, analysis_matrix, canonical_dual, excess, frame_bounds, frame_norm_distance,
                        frame_operator, inverse_frame_operator, is_dual_pair, is_frame, reconstruction_operator,
                        require_frame, synthesis_matrix)
from framekit_errors import InputError, NotAFrameError
from numeric_kernel import operator_norm

ENTRIES = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False, allow_subnormal=False)

# (sample, lower bound, upper bound, tight, excess)
SAMPLES = [
    ('onb3', 1.0, 1.0, True, 0),
    ('mercedes', 1.5, 1.5, True, 1),
    ('e1e1e2', 1.0, 2.0, False, 1),
]


def sample_id_generator(sample) -> str:
    return sample[0] if isinstance(sample, tuple) else str(sample)


@pytest.fixture(scope='module')
def mercedes():
    return load_sample_frame('mercedes')


@pytest.mark.parametrize('sample', SAMPLES, ids=sample_id_generator)
def test_frame_bounds_matchKnownSamples(sample):
    name, lower, upper, tight, extra = sample
    bounds = frame_bounds(load_sample_frame(name))

    assert bounds.lower_opt == pytest.approx(lower, abs=1e-12), f"lower bound of {name}"
    assert bounds.upper_opt == pytest.approx(upper, abs=1e-12), f"upper bound of {name}"
    assert bounds.tight == tight


@pytest.mark.parametrize('sample', SAMPLES, ids=sample_id_generator)
def test_excess_matchesKnownSamples(sample):
    name, _, _, _, extra = sample

    assert excess(load_sample_frame(name)) == extra


@pytest.mark.parametrize('vectors', [[1.0, 2.0], [[np.nan, 0.0]], [[1.0, np.inf]], np.zeros((0, 2))],
                         ids=['1d', 'nan', 'inf', 'empty'])
def test_frame_rejectsMalformedVectors(vectors):
    with pytest.raises(InputError):
        Frame(vectors)


def test_frame_rejectsDeclaredDimensionMismatch():
    with pytest.raises(InputError):
        Frame([[1.0, 0.0]], dim=3)


def test_frame_vectorsAreReadOnly(mercedes):
    with pytest.raises(ValueError):
        mercedes.get_vectors()[0, 0] = 5.0


def test_frame_fromSynthesisUsesColumnsAsVectors():
    t = np.array([[1.0, 2.0, 3.0], [0.0, 1.0j, 0.0]])
    f = Frame.from_synthesis(t)

    assert f.get_dim() == 2 and f.get_size() == 3
    assert np.array_equal(synthesis_matrix(f), t)
    assert np.array_equal(analysis_matrix(f), np.conj(t).T)


def test_frame_bounds_nonSpanningFamilyHasZeroLowerBound():
    f = Frame([[1.0, 0.0], [2.0, 0.0]])

    assert frame_bounds(f).lower_opt == 0.0
    assert not is_frame(f)
    with pytest.raises(NotAFrameError):
        require_frame(f)
    with pytest.raises(NotAFrameError):
        inverse_frame_operator(f)


def test_frame_operator_isHermitian(mercedes):
    s = frame_operator(mercedes)

    assert operator_norm(s - np.conj(s).T) == 0.0
    assert operator_norm(s - 1.5 * np.eye(2)) < 1e-14


def test_canonical_dual_tightFrameIsScaledCopy(mercedes):
    dual = canonical_dual(mercedes)

    assert np.allclose(dual.get_vectors(), mercedes.get_vectors() / 1.5, atol=1e-14)
    assert is_dual_pair(mercedes, dual)


def test_reconstruction_operator_canonicalDualGivesIdentity():
    f = load_sample_frame('e1e1e2')
    residual = operator_norm(reconstruction_operator(f, canonical_dual(f)) - np.eye(2))

    assert residual < 1e-14, f"||T U~ - I|| = {residual}"


def test_frame_norm_distance_rejectsShapeMismatch(mercedes):
    with pytest.raises(InputError):
        frame_norm_distance(mercedes, load_sample_frame('onb3'))


def test_frame_norm_distance_isOperatorNormOfDifference(mercedes):
    shifted = Frame(mercedes.get_vectors() + np.array([[0.0, 0.0], [0.0, 0.0], [0.5, 0.0]]))

    assert frame_norm_distance(mercedes, shifted) == pytest.approx(0.5, abs=1e-14)


def complex_rows(draw, rows: int, cols: int) -> np.ndarray:
    re = draw(arrays(np.float64, (rows, cols), elements=ENTRIES))
    im = draw(arrays(np.float64, (rows, cols), elements=ENTRIES))
    return re + 1j * im


@st.composite
def frames_with_vector(draw, max_dim: int = 4, max_extra: int = 4):
    # an orthonormal basis plus arbitrary extra vectors always spans C^d
    dim = draw(st.integers(1, max_dim))
    extra = complex_rows(draw, draw(st.integers(0, max_extra)), dim)
    x = complex_rows(draw, 1, dim)[0]
    return Frame(np.vstack([np.eye(dim), extra])), x


@st.composite
def family_triples(draw, max_dim: int = 4, max_size: int = 6):
    dim = draw(st.integers(1, max_dim))
    size = draw(st.integers(1, max_size))
    return tuple(Frame(complex_rows(draw, size, dim)) for _ in range(3))


@seed(20240611)
@settings(max_examples=60, deadline=None)
@given(frames_with_vector())
def test_canonical_dual_dualOfDualIsOriginal(instance):
    f, _ = instance
    twice = canonical_dual(canonical_dual(f))

    assert frame_norm_distance(twice, f) <= 1e-8 * max(1.0, operator_norm(synthesis_matrix(f)))


@seed(20240611)
@settings(max_examples=60, deadline=None)
@given(frames_with_vector())
def test_frame_operator_rayleighQuotientStaysWithinBounds(instance):
    f, x = instance
    bounds = frame_bounds(f)
    energy = np.vdot(x, frame_operator(f) @ x).real
    norm_sq = np.vdot(x, x).real
    slack = 1e-9 * bounds.upper_opt * max(1.0, norm_sq)

    assert bounds.lower_opt * norm_sq <= energy + slack, "lower frame inequality"
    assert energy <= bounds.upper_opt * norm_sq + slack, "upper frame inequality"


@seed(20240611)
@settings(max_examples=60, deadline=None)
@given(family_triples())
def test_frame_norm_distance_satisfiesTriangleInequality(triple):
    f, g, h = triple
    scale = max(1.0, frame_norm_distance(f, g), frame_norm_distance(g, h))

    assert frame_norm_distance(f, h) <= frame_norm_distance(f, g) + frame_norm_distance(g, h) + 1e-12 * scale
    assert frame_norm_distance(f, g) == pytest.approx(frame_norm_distance(g, f), rel=1e-12, abs=1e-12)
