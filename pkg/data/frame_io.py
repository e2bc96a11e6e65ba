"""
JSON and CSV codecs. Complex numbers are written as [re, im] pairs of Python floats, so json emits the shortest
decimal that round-trips. Every file is written with indent=4 and sorted keys, which keeps reruns byte-identical.
"""
import csv
import json
from pathlib import Path

import numpy as np

from approx_dual import ApproxDualParams, make_params
from frame_core import Frame
from framekit_errors import InputError
from gabor_discrete import GaborSystem
from perturbation import BoundAudit
from util.project_path import sample_path

SUMMARY_FIELDS = ['name', 'applicable', 'holds', 'violated', 'not_applicable', 'report_only']


def complex_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def vector_to_pairs(v) -> list[list[float]]:
    return [complex_to_pair(z) for z in np.asarray(v, dtype=np.complex128)]


def matrix_to_pairs(m) -> list[list[list[float]]]:
    return [vector_to_pairs(row) for row in np.asarray(m, dtype=np.complex128)]


def pairs_to_array(data, what: str) -> np.ndarray:
    """
    Decodes nested lists whose innermost level is [re, im] pairs.

    :param data: decoded JSON value
    :param what: name used in error messages
    :return: complex array with one dimension less than the pair nesting
    """
    try:
        arr = np.array(data, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InputError(f"{what} is not a rectangular array of numbers.") from e
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise InputError(f"{what} must be built from [re, im] pairs.")
    arr = arr[..., 0] + 1j * arr[..., 1]
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what} contains non-finite entries.")
    return arr


def _require_keys(obj, keys: list[str], what: str) -> None:
    if not isinstance(obj, dict):
        raise InputError(f"{what} must be a JSON object.")
    missing = [k for k in keys if k not in obj]
    if missing:
        raise InputError(f"{what} is missing field(s): {', '.join(missing)}.")


def _int_field(obj: dict, key: str, what: str) -> int:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{what} field '{key}' must be an integer. Got {value!r}.")
    return value


def frame_to_json(f: Frame) -> dict:
    return {'dim': f.get_dim(), 'vectors': matrix_to_pairs(f.get_vectors())}


def frame_from_json(obj) -> Frame:
    _require_keys(obj, ['dim', 'vectors'], 'Frame')
    vectors = pairs_to_array(obj['vectors'], 'Frame vectors')
    if vectors.ndim != 2:
        raise InputError(f"Frame vectors must be a list of vectors. Got {vectors.ndim} levels of nesting.")
    return Frame(vectors, dim=_int_field(obj, 'dim', 'Frame'))


def params_to_json(params: ApproxDualParams) -> dict:
    return {'A': matrix_to_pairs(params.A), 'Theta': matrix_to_pairs(params.Theta)}


def params_from_json(obj, f: Frame) -> ApproxDualParams:
    """
    Both fields are optional: A defaults to the identity and Theta to zero.
    """
    if not isinstance(obj, dict):
        raise InputError("Params must be a JSON object.")
    a = pairs_to_array(obj['A'], 'A') if 'A' in obj else None
    theta = pairs_to_array(obj['Theta'], 'Theta') if 'Theta' in obj else None
    return make_params(f, a, theta)


def gabor_to_json(system: GaborSystem) -> dict:
    return {'L': system.L, 'a': system.a, 'b': system.b, 'window': vector_to_pairs(system.window)}


def gabor_from_json(obj) -> GaborSystem:
    _require_keys(obj, ['L', 'a', 'b', 'window'], 'Gabor system')
    window = pairs_to_array(obj['window'], 'Window')
    if window.ndim != 1:
        raise InputError("Window must be a flat list of [re, im] pairs.")
    return GaborSystem(*(_int_field(obj, k, 'Gabor system') for k in ('L', 'a', 'b')), window)


def audits_to_json(audits: list[BoundAudit]) -> list[dict]:
    return [a.as_dict() for a in audits]


def write_json(obj, path: Path | str) -> None:
    with open(path, 'w') as f:
        json.dump(obj, f, indent=4, sort_keys=True, allow_nan=False)
        f.write('\n')


def read_json(path: Path | str):
    with open(path, 'r') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"{path} is not valid JSON: {e.msg} (line {e.lineno}).") from e


def read_frame(path: Path | str) -> Frame:
    return frame_from_json(read_json(path))


def write_frame(f: Frame, path: Path | str) -> None:
    write_json(frame_to_json(f), path)


def read_gabor(path: Path | str) -> GaborSystem:
    return gabor_from_json(read_json(path))


def write_summary_csv(rows: list[dict], path: Path | str) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=SUMMARY_FIELDS, lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in SUMMARY_FIELDS})


def write_audit_csv(audits: list[BoundAudit], path: Path | str) -> None:
    """
    Flat (name, lhs, rhs, holds) projection of an audit batch for spreadsheets.
    """
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['name', 'lhs', 'rhs', 'holds'])
        for audit in audits:
            writer.writerow([audit.name, repr(audit.lhs), repr(audit.rhs), audit.holds])


def load_sample_frame(name: str) -> Frame:
    return read_frame(sample_path(name))


def load_sample_gabor(name: str) -> GaborSystem:
    return read_gabor(sample_path(name))
