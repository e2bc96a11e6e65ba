from pathlib import Path

import numpy as np
import pytest

from framekit_errors import InputError
from numeric_kernel import DEFAULT_TOLERANCE
from util.config import TOLERANCE_ENV, RunConfig, tolerance_from_environment
from util.project_path import prepare_output_dir, project_path, sample_path
from util.rng import stream_generator


def test_tolerance_from_environment_unsetKeepsDefault():
    assert tolerance_from_environment(environ={}) is DEFAULT_TOLERANCE
    assert tolerance_from_environment(environ={TOLERANCE_ENV: ' '}) is DEFAULT_TOLERANCE


def test_tolerance_from_environment_overridesIdentityResidual():
    tol = tolerance_from_environment(environ={TOLERANCE_ENV: '1e-6'})

    assert tol.identity_residual_rel == 1e-6
    assert tol.rank_cutoff_rel == DEFAULT_TOLERANCE.rank_cutoff_rel


@pytest.mark.parametrize('raw', ['tight', '0', '1.5', '-1e-9'])
def test_tolerance_from_environment_rejectsInvalidValues(raw):
    with pytest.raises(InputError):
        tolerance_from_environment(environ={TOLERANCE_ENV: raw})


def test_run_config_validatesFields():
    with pytest.raises(InputError):
        RunConfig(trials=0)
    with pytest.raises(InputError):
        RunConfig(format='xml')
    assert RunConfig(output_path='out').output_path == Path('out')


def test_stream_generator_streamsAreIndependentAndReproducible():
    a = stream_generator(42, 'one', 3).standard_normal(4)

    assert np.array_equal(a, stream_generator(42, 'one', 3).standard_normal(4))
    assert not np.array_equal(a, stream_generator(42, 'two', 3).standard_normal(4))
    assert not np.array_equal(a, stream_generator(42, 'one', 4).standard_normal(4))
    with pytest.raises(ValueError):
        stream_generator(42, 'one', -1)


def test_project_path_rejectsAbsolutePath():
    with pytest.raises(ValueError):
        project_path('/etc/passwd')


def test_sample_path_rejectsUnknownSample():
    with pytest.raises(ValueError):
        sample_path('no_such_sample')


def test_prepare_output_dir_rejectsExistingFile(tmp_path):
    path = tmp_path / 'file'
    path.write_text('x')

    with pytest.raises(NotADirectoryError):
        prepare_output_dir(path)
    assert prepare_output_dir(tmp_path / 'a' / 'b').is_dir()
