"""
Instance generators: the block-diagonal exam pair, the replicated-basis pair and seeded random frames, parameters and
Gabor systems for the audit corpus.
"""
import logging

import numpy as np
import scipy.stats

from approx_dual import ApproxDualParams, make_params, random_admissible_operator, random_kernel_theta
from frame_core import Frame, frame_bounds, is_frame
from framekit_errors import InputError
from gabor_discrete import GaborSystem, build_gabor_frame
from numeric_kernel import DEFAULT_TOLERANCE, TolerancePolicy, operator_norm
from util.rng import complex_gaussian

logger = logging.getLogger(__name__)

MAX_EXAM_BLOCKS = 10
MAX_ATTEMPTS = 100

Q_LIMIT = 13 / 12
Q0_LIMIT = 7 / 12


def exam_size(blocks: int) -> int:
    """
    sum_{n=1}^{K} 4^n
    """
    return (4 ** (blocks + 1) - 4) // 3


def exam_pair(blocks: int) -> tuple[Frame, Frame, dict]:
    """
    Frames of C^K built from K blocks: block n repeats e_n / 2^n exactly 4^n times. In the perturbed frame the first
    vector of each block is scaled by 3 (block 1) or 2 (later blocks).

    :param blocks: K, between 1 and MAX_EXAM_BLOCKS
    :return: (original, perturbed, metadata with the finite and limiting closeness values)
    """
    if not 1 <= blocks <= MAX_EXAM_BLOCKS:
        raise InputError(f"Block count must lie in [1, {MAX_EXAM_BLOCKS}]. Got {blocks}.")

    counts = 4 ** np.arange(1, blocks + 1)
    scales = 0.5 ** np.arange(1, blocks + 1)
    rows = np.repeat(np.arange(blocks), counts)
    original = np.zeros((rows.size, blocks), dtype=np.complex128)
    original[np.arange(rows.size), rows] = np.repeat(scales, counts)

    perturbed = original.copy()
    firsts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    factors = np.full(blocks, 2.0)
    factors[0] = 3.0
    perturbed[firsts, np.arange(blocks)] *= factors

    tail = 4.0 ** -blocks / 3
    metadata = {
        'blocks': blocks,
        'size': int(rows.size),
        'q': Q_LIMIT - tail,
        'q0': Q0_LIMIT - tail,
        'q_limit': Q_LIMIT,
        'q0_limit': Q0_LIMIT,
        'q_tail': tail,
        'q0_tail': tail,
        'mu': 1.0,
        'original_bounds': [1.0, 1.0],
        'perturbed_bounds': [3.0 if blocks == 1 else 1.0 + 3.0 * 4.0 ** -blocks, 3.0],
    }
    logger.info("Generated exam pair with %d blocks and %d vectors", blocks, rows.size)
    return Frame(original), Frame(perturbed), metadata


def random_frame(rng: np.random.Generator, dim: int, size: int,
                 tol: TolerancePolicy = DEFAULT_TOLERANCE) -> Frame:
    if size < dim:
        raise InputError(f"A frame for C^{dim} needs at least {dim} vectors. Got {size}.")
    for _ in range(MAX_ATTEMPTS):
        f = Frame(complex_gaussian(rng, (size, dim)))
        if is_frame(f, tol):
            return f
    raise RuntimeError(f"Could not draw a frame for C^{dim} with {size} vectors.")


def random_perturbation(rng: np.random.Generator, f: Frame, mu: float) -> Frame:
    """
    f plus a random family E with ||T_E|| = mu.
    """
    e = complex_gaussian(rng, (f.get_size(), f.get_dim()))
    return Frame(f.get_vectors() + mu * e / operator_norm(e))


def random_params(rng: np.random.Generator, f: Frame, theta_norm: float = 1.0,
                  tol: TolerancePolicy = DEFAULT_TOLERANCE) -> ApproxDualParams:
    a = random_admissible_operator(f.get_dim(), rng)
    return make_params(f, a, random_kernel_theta(f, rng, theta_norm, tol))


def replicated_pair(rng: np.random.Generator, dim: int, copies: int, stretch: float) -> tuple[Frame, Frame]:
    """
    Tight frame (bound 1) repeating each vector of a random orthonormal basis `copies` times at scale 1/sqrt(copies),
    and the same family with the first copy of each basis vector scaled by 1 + stretch.

    With c = copies/dim: q = stretch^2 / c and q_0 = stretch / c, so stretch in [sqrt(c), c) gives m <= q and q_0 < 1.
    """
    unitary = scipy.stats.unitary_group.rvs(dim, random_state=rng)
    rows = np.repeat(np.arange(dim), copies)
    original = unitary[rows] / np.sqrt(copies)
    perturbed = original.copy()
    perturbed[np.arange(dim) * copies] *= 1.0 + stretch
    return Frame(original), Frame(perturbed)


def random_gabor_system(rng: np.random.Generator, length: int,
                        tol: TolerancePolicy = DEFAULT_TOLERANCE) -> GaborSystem:
    """
    Random unit-norm window on a random lattice with a*b <= L that generates a frame.
    """
    divisors = [k for k in range(1, length + 1) if length % k == 0]
    lattices = [(a, b) for a in divisors for b in divisors if a * b <= length and a < length and b < length]
    for _ in range(MAX_ATTEMPTS):
        a, b = lattices[rng.integers(len(lattices))]
        window = complex_gaussian(rng, (length,))
        system = GaborSystem(length, a, b, window / np.linalg.norm(window))
        if frame_bounds(build_gabor_frame(system), tol).is_frame():
            return system
    raise RuntimeError(f"Could not draw a Gabor frame of length {length}.")


def random_window_perturbation(rng: np.random.Generator, system: GaborSystem, size: float) -> np.ndarray:
    delta = complex_gaussian(rng, (system.L,))
    return system.window + size * delta / np.linalg.norm(delta)
