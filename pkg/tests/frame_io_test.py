import csv

import numpy as np
import pytest

from approx_dual import validate_params
from data.frame_io import (SUMMARY_FIELDS, frame_from_json, gabor_from_json, gabor_to_json, load_sample_gabor,
                           pairs_to_array, params_from_json, read_frame, read_json, write_audit_csv, write_frame,
                           write_json, write_summary_csv)
from frame_core import Frame
from framekit_errors import ContractionError, InputError, LatticeError
from perturbation import make_audit, not_applicable
from util.rng import complex_gaussian, stream_generator


@pytest.fixture
def random_frame():
    return Frame(complex_gaussian(stream_generator(42, 'frame_io_test'), (7, 3)))


def test_write_frame_roundTripIsExact(random_frame, tmp_path):
    path = tmp_path / 'frame.json'
    write_frame(random_frame, path)

    assert np.array_equal(read_frame(path).get_vectors(), random_frame.get_vectors())


def test_write_json_isDeterministicWithSortedKeysAndTrailingNewline(tmp_path):
    first, second = tmp_path / 'a.json', tmp_path / 'b.json'
    write_json({'zeta': 1, 'alpha': [0.1, 2.5]}, first)
    write_json({'alpha': [0.1, 2.5], 'zeta': 1}, second)
    text = first.read_text()

    assert first.read_bytes() == second.read_bytes()
    assert text.index('alpha') < text.index('zeta')
    assert text.endswith('}\n')


def test_write_json_rejectsNonFiniteNumbers(tmp_path):
    with pytest.raises(ValueError):
        write_json({'x': float('inf')}, tmp_path / 'x.json')


def test_read_json_reportsMalformedFile(tmp_path):
    path = tmp_path / 'broken.json'
    path.write_text('{"dim": 2, "vectors": [[1.0, 0.0]')

    with pytest.raises(InputError):
        read_json(path)


@pytest.mark.parametrize('obj', [
    {'vectors': [[[1.0, 0.0]]]},
    {'dim': 1},
    {'dim': True, 'vectors': [[[1.0, 0.0]]]},
    {'dim': 1.0, 'vectors': [[[1.0, 0.0]]]},
    {'dim': 2, 'vectors': [[1.0, 0.0]]},
    {'dim': 2, 'vectors': [[[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]]]},
    [1, 2],
], ids=['no dim', 'no vectors', 'bool dim', 'float dim', 'plain reals', 'ragged', 'not an object'])
def test_frame_from_json_rejectsMalformedObjects(obj):
    with pytest.raises(InputError):
        frame_from_json(obj)


def test_pairs_to_array_decodesComplexEntries():
    arr = pairs_to_array([[1.0, 2.0], [0.0, -1.0]], 'v')

    assert np.array_equal(arr, np.array([1 + 2j, -1j]))


def test_params_from_json_defaultsToIdentityAndZero():
    f = Frame(np.eye(2))
    params = params_from_json({}, f)

    assert np.array_equal(params.A, np.eye(2))
    assert not np.any(params.Theta)


def test_params_from_json_leavesValidationToCaller():
    f = Frame(np.eye(2))
    params = params_from_json({'A': [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [2.0, 0.0]]]}, f)

    assert not params.validated
    with pytest.raises(ContractionError):
        validate_params(f, params)


def test_gabor_to_json_roundTripsTightSample():
    system = load_sample_gabor('gabor_tight_l4')
    decoded = gabor_from_json(gabor_to_json(system))

    assert (decoded.L, decoded.a, decoded.b) == (4, 2, 1)
    assert np.array_equal(decoded.window, system.window)


def test_gabor_from_json_rejectsBadLattice():
    with pytest.raises(LatticeError):
        gabor_from_json({'L': 4, 'a': 3, 'b': 1, 'window': [[1.0, 0.0]] * 4})


def test_write_summary_csv_writesFieldsInOrder(tmp_path):
    path = tmp_path / 'summary.csv'
    rows = [{'name': 'gap', 'applicable': 3, 'holds': 3, 'violated': 0, 'not_applicable': 1, 'report_only': False,
             'extra': 'dropped'}]
    write_summary_csv(rows, path)

    with open(path, newline='') as f:
        read = list(csv.DictReader(f))
    assert list(read[0]) == SUMMARY_FIELDS
    assert read[0]['name'] == 'gap' and read[0]['holds'] == '3'


def test_write_audit_csv_keepsFullPrecision(tmp_path):
    path = tmp_path / 'audits.csv'
    write_audit_csv([make_audit('gap', 0.1 + 0.2, 1.0), not_applicable('mu')], path)

    lines = path.read_text().splitlines()
    assert lines[0] == 'name,lhs,rhs,holds'
    assert lines[1] == 'gap,0.30000000000000004,1.0,True'
    assert lines[2].startswith('mu,nan,nan,')
