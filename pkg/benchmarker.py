import timeit

import numpy as np
from tabulate import tabulate

# noinspection PyUnresolvedReferences
from approx_dual import random_admissible_operator
# noinspection PyUnresolvedReferences
from data.instance_generators import exam_pair, random_frame, random_gabor_system, random_params, random_perturbation, \
    random_window_perturbation
# noinspection PyUnresolvedReferences
from gabor_discrete import commuting_operator, gabor_perturbation_audit
# noinspection PyUnresolvedReferences
from perturbation import best_approx_dual, deviation_bound_audit, dual_difference_audit, perturbed_frame_audit
from util.rng import stream_generator

# Block-diagonal exam pair at the size where q is within 1e-4 of its limit
exam_phi, exam_psi, _ = exam_pair(8)
exam_identity = np.eye(8)

rng = stream_generator(42, 'benchmarker')
small_f = random_frame(rng, 6, 14)
small_g = random_perturbation(rng, small_f, 0.3)
small_p1 = random_params(rng, small_f)
small_p2 = random_params(rng, small_g)
small_a2 = random_admissible_operator(6, rng)

gabor_system = random_gabor_system(rng, 16)
gabor_g2 = random_window_perturbation(rng, gabor_system, 0.05)
gabor_a = commuting_operator(gabor_system, scalar=1.0)

exam_c_quad_stmt = """
perturbed_frame_audit(exam_phi, exam_psi, 'c-quad')
deviation_bound_audit('c-quad', exam_phi, exam_psi, exam_identity, exam_identity)
"""

dual_difference_stmt = """
dual_difference_audit(small_f, small_g, small_p1, small_p2)
"""

best_approx_stmt = """
best_approx_dual(small_f, small_g, small_p1, small_a2, trials=100)
"""

gabor_stmt = """
gabor_perturbation_audit(gabor_system, gabor_g2, gabor_a, gabor_a)
"""

iterations = 1
repetitions = 5  # default

rows = []
for name, stmt, number in [['Exam pair c-quad (K=8)', exam_c_quad_stmt, iterations],
                           ['Difference identity (d=6, N=14)', dual_difference_stmt, 100 * iterations],
                           ['Best approximation, 100 competitors', best_approx_stmt, iterations],
                           ['Gabor perturbation (L=16)', gabor_stmt, iterations]]:
    results = timeit.repeat(stmt=stmt, number=number, repeat=repetitions, globals=globals())
    rows.append([name, min([r / number for r in results])])

print(f"Iterations:\t\t{iterations}")
print(f"Repetitions:\t{repetitions}")
print()
print(tabulate(rows, headers=['Workload', 'Min Time (s)']))
