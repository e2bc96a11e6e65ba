"""
Command-line entry point.

    python3.12 framekit.py frame analyze data/samples/mercedes.json
    python3.12 framekit.py generate exam --blocks 8 -o exam
    python3.12 framekit.py perturb audit exam/phi.json exam/psi.json --kinds c-quad
    python3.12 framekit.py gabor analyze data/samples/gabor_tight_l4.json
    python3.12 framekit.py corpus --seed 42 --trials 100 -o corpus

Exit codes: 0 ok, 1 an audit was violated, 2 input error, 3 nothing applicable.
"""
import argparse
import logging
import sys
from pathlib import Path

import numpy as np
from tabulate import tabulate

from approx_dual import make_params
from audit_corpus import run_corpus, write_corpus
from data.frame_io import (audits_to_json, frame_to_json, matrix_to_pairs, pairs_to_array, params_from_json, read_frame,
                           read_gabor, read_json, vector_to_pairs, write_audit_csv, write_frame, write_json)
from data.instance_generators import exam_pair
from frame_core import Frame, canonical_dual, excess, frame_bounds
from framekit_errors import FrameKitError, InputError
from gabor_discrete import (alternate_dual_window, build_gabor_frame, commuting_operator, envelope_audit,
                            gabor_approx_dual_window, gabor_perturbation_audit, optimal_scaling_coefficients,
                            walnut_report, walnut_sandwich_audit)
from numeric_kernel import TolerancePolicy, operator_norm
from perturbation import (C_QUAD_NOTE, BoundAudit, NOT_APPLICABLE, VIOLATED, best_approx_bessel_form,
                          best_approx_dual, canonical_not_best_check, closeness, deviation_bound_audit,
                          dual_difference_audit, gamma_round_trip_audit, gap_bound_audit, mu_below_root,
                          not_applicable, perturbed_frame_audit)
from util.config import FORMATS, RunConfig, tolerance_from_environment
from util.project_path import prepare_output_dir

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INPUT = 2
EXIT_NOTHING_APPLICABLE = 3

AUDIT_KINDS = ('gap', 'mu', 'd-quad', 'c-quad', 'dual-identity', 'canonical-ad', 'canonical-dual', 'best-approx',
               'gamma')
# paths that form N x N matrices are skipped above this many vectors
GRAM_SIZE_LIMIT = 4096
GRAM_NOTE = f"Skipped: needs N x N matrices and N exceeds {GRAM_SIZE_LIMIT}."


def audit_exit_code(audits: list[BoundAudit]) -> int:
    checked = [a for a in audits if not a.report_only]
    if any(a.verdict() == VIOLATED for a in checked):
        return EXIT_VIOLATED
    if all(a.verdict() == NOT_APPLICABLE for a in checked):
        return EXIT_NOTHING_APPLICABLE
    return EXIT_OK


def print_audits(audits: list[BoundAudit]) -> None:
    print(tabulate([[a.name, a.lhs, a.rhs, a.verdict()] for a in audits], headers=['Audit', 'LHS', 'RHS', 'Verdict'],
                   floatfmt='.6g'))


def parse_kinds(raw: str) -> list[str]:
    kinds = [k.strip() for k in raw.split(',') if k.strip()]
    if 'all' in kinds:
        return list(AUDIT_KINDS)
    unknown = [k for k in kinds if k not in AUDIT_KINDS]
    if unknown or not kinds:
        raise InputError(f"Unknown audit kind(s): {', '.join(unknown) or raw!r}. Expected {', '.join(AUDIT_KINDS)} "
                         f"or all.")
    return kinds


def read_window(path: str) -> np.ndarray:
    """
    A window file is either a bare list of [re, im] pairs or an object with a "window" field.
    """
    data = read_json(path)
    if isinstance(data, dict):
        if 'window' not in data:
            raise InputError(f"{path} has no 'window' field.")
        data = data['window']
    window = pairs_to_array(data, 'Window')
    if window.ndim != 1:
        raise InputError("Window must be a flat list of [re, im] pairs.")
    return window


def cmd_frame_analyze(args, tol: TolerancePolicy) -> int:
    f = read_frame(args.input)
    bounds = frame_bounds(f, tol)
    report = {
        'dim': f.get_dim(),
        'size': f.get_size(),
        'lower_opt': bounds.lower_opt,
        'upper_opt': bounds.upper_opt,
        'tight': bounds.tight,
        'is_frame': bounds.is_frame(),
        'excess': excess(f, tol),
    }
    if args.emit_dual and bounds.is_frame():
        report['canonical_dual'] = frame_to_json(canonical_dual(f, tol))

    print(tabulate([[k, report[k]] for k in ('dim', 'size', 'lower_opt', 'upper_opt', 'tight', 'excess')],
                   headers=['Quantity', 'Value'], floatfmt='.12g'))
    if not bounds.is_frame():
        logger.warning("%s does not span C^%d; reporting m_opt = 0.", args.input, f.get_dim())
    if args.output:
        write_json(report, args.output)
    return EXIT_OK


def _params_for(args, f: Frame):
    if args.params is None:
        return make_params(f), np.eye(f.get_dim(), dtype=np.complex128)
    obj = read_json(args.params)
    p1 = params_from_json(obj, f)
    a2 = pairs_to_array(obj['A2'], 'A2') if 'A2' in obj else np.eye(f.get_dim(), dtype=np.complex128)
    return p1, a2


def perturb_audits(f: Frame, g: Frame, kinds: list[str], p1, a2, dual_for_weight: Frame | None, trials: int,
                   seed: int, tol: TolerancePolicy) -> list[BoundAudit]:
    small = f.get_size() <= GRAM_SIZE_LIMIT
    g_is_frame = frame_bounds(g, tol).is_frame()
    audits = []
    for kind in kinds:
        if kind == 'gap':
            audits.append(gap_bound_audit(f, g, tol))
        elif kind == 'mu':
            audits += perturbed_frame_audit(f, g, 'mu', tol=tol)
        elif kind in ('d-quad', 'c-quad'):
            weight = dual_for_weight if kind == 'd-quad' else None
            audits += perturbed_frame_audit(f, g, kind, weight, tol)
            audits += deviation_bound_audit(kind, f, g, p1.A, a2, weight, p1.Theta, tol)
        elif kind in ('canonical-ad', 'canonical-dual'):
            audits += deviation_bound_audit(kind, f, g, p1.A, a2, theta=p1.Theta, tol=tol)
        elif kind == 'dual-identity':
            if g_is_frame:
                audits.append(dual_difference_audit(f, g, p1, make_params(g, a2), tol))
            else:
                audits.append(not_applicable('dual_difference_identity'))
        elif kind == 'best-approx':
            mu = operator_norm(f.get_vectors() - g.get_vectors())
            if mu_below_root(mu, frame_bounds(f, tol).lower_opt, tol):
                best = best_approx_dual(f, g, p1, a2, trials, seed, tol)
                audits += [best.lambda_bound, best.optimality, best.projector_identity]
            else:
                audits += [not_applicable(n) for n in ('best_approx.lambda', 'best_approx.optimality',
                                                       'best_approx.projector_identity')]
            if small and g_is_frame:
                audits.append(best_approx_bessel_form(f, g, p1, a2, tol)[1])
                audits.append(canonical_not_best_check(f, g, p1.A, a2, tol)[2])
            else:
                audits += [not_applicable('best_approx.bessel_form', note=GRAM_NOTE),
                           not_applicable('best_approx.beats_canonical', note=GRAM_NOTE)]
        elif kind == 'gamma':
            if small:
                audits += gamma_round_trip_audit(f, g, p1, seed, tol)
            else:
                audits += [not_applicable(n, note=GRAM_NOTE) for n in ('gamma.round_trip',
                                                                       'gamma.inverse_round_trip')]
    return audits


def cmd_perturb_audit(args, tol: TolerancePolicy) -> int:
    f, g = read_frame(args.frame_a), read_frame(args.frame_b)
    kinds = parse_kinds(args.kinds)
    p1, a2 = _params_for(args, f)
    weight = read_frame(args.dual_weight) if args.dual_weight else None

    report = closeness(f, g, weight, tol)
    g_bounds = frame_bounds(g, tol)
    metrics = {
        'q': report.q, 'q_weighted': report.q_weighted, 'q0': report.q0, 'mu': report.mu,
        'lower_opt': report.lower_opt, 'upper_opt': report.upper_opt, 'dual_upper': report.dual_upper,
        'd_quad_flag': report.d_quad_flag, 'c_quad_flag': report.c_quad_flag,
        'perturbed_lower_opt': g_bounds.lower_opt, 'perturbed_upper_opt': g_bounds.upper_opt,
    }
    audits = perturb_audits(f, g, kinds, p1, a2, weight, args.trials, args.seed, tol)
    notes = sorted({a.note for a in audits if a.note})
    if 'c-quad' in kinds and C_QUAD_NOTE not in notes:
        notes.append(C_QUAD_NOTE)

    print_audits(audits)
    out = {'metrics': metrics, 'audits': audits_to_json(audits), 'notes': notes}
    if args.output:
        write_json(out, args.output)
        if args.csv:
            write_audit_csv(audits, Path(args.output).with_suffix('.csv'))
    return audit_exit_code(audits)


def cmd_generate_exam(args, tol: TolerancePolicy) -> int:
    phi, psi, metadata = exam_pair(args.blocks)
    out = prepare_output_dir(args.output)
    write_frame(phi, out / 'phi.json')
    write_frame(psi, out / 'psi.json')
    write_json(metadata, out / 'exam_metadata.json')
    print(tabulate([[k, metadata[k]] for k in ('blocks', 'size', 'q', 'q0', 'mu')], headers=['Quantity', 'Value'],
                   floatfmt='.12g'))
    return EXIT_OK


def _gabor_operator(system, scalar: float | None, optimal: bool, tol: TolerancePolicy):
    if optimal:
        return commuting_operator(system, coefficients=optimal_scaling_coefficients(system, tol), tol=tol)
    return commuting_operator(system, scalar=1.0 if scalar is None else scalar, tol=tol)


def cmd_gabor(args, tol: TolerancePolicy) -> int:
    system = read_gabor(args.system)
    if args.gabor_command == 'analyze':
        bounds = frame_bounds(build_gabor_frame(system), tol)
        walnut = walnut_report(system)
        audits = walnut_sandwich_audit(system, tol) + [envelope_audit(system, tol)]
        report = {
            'L': system.L, 'a': system.a, 'b': system.b, 'size': system.size(), 'redundancy': system.redundancy(),
            'lower_opt': bounds.lower_opt, 'upper_opt': bounds.upper_opt, 'tight': bounds.tight,
            'walnut': {'lower_est': walnut.lower_est, 'upper_est': walnut.upper_est, 'note': walnut.note,
                       'correlations': matrix_to_pairs(walnut.correlations)},
            'audits': audits_to_json(audits),
        }
        print_audits(audits)
        if args.output:
            write_json(report, args.output)
        return audit_exit_code(audits)

    if args.gabor_command == 'dual-window':
        a = _gabor_operator(system, args.scalar, args.optimal, tol)
        if args.dual is not None:
            window, deviation = alternate_dual_window(system, read_window(args.dual), a, tol)
            report = {'window': vector_to_pairs(window), 'two_route_deviation': deviation}
        else:
            h = read_window(args.h) if args.h else None
            result = gabor_approx_dual_window(system, a, h, tol)
            report = {'window': vector_to_pairs(result.window), 'rate': result.report.rate,
                      'structure_residual': result.structure_residual,
                      'two_route_deviation': result.two_route_deviation}
            window, deviation = result.window, result.two_route_deviation
        print(tabulate([[j, z] for j, z in enumerate(window)], headers=['j', 'g_ad[j]']))
        if args.output:
            write_json(report, args.output)
        return EXIT_OK if deviation <= tol.identity_residual_rel else EXIT_VIOLATED

    g2 = read_window(args.window)
    a1 = _gabor_operator(system, args.a1_scalar, False, tol)
    a2 = _gabor_operator(system, args.a2_scalar, args.optimal, tol)
    h = read_window(args.h) if args.h else None
    audits = gabor_perturbation_audit(system, g2, a1, a2, h, args.trials, args.seed, tol)
    print_audits(audits)
    if args.output:
        write_json({'audits': audits_to_json(audits), 'notes': sorted({a.note for a in audits if a.note})},
                   args.output)
    return audit_exit_code(audits)


def cmd_corpus(args, tol: TolerancePolicy) -> int:
    config = RunConfig(seed=args.seed, trials=args.trials, tolerance=tol, output_path=Path(args.output),
                       format=args.format, profile=args.profile)
    result = run_corpus(config)
    write_corpus(result, config)
    print(tabulate([[r['name'], r['applicable'], r['holds'], r['violated'], r['not_applicable'],
                     'yes' if r['report_only'] else ''] for r in result.summary],
                   headers=['Audit', 'Applicable', 'Holds', 'Violated', 'N/A', 'Report only']))
    return EXIT_VIOLATED if result.violated() > 0 else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Finite frames, approximately dual frames and perturbation-bound audits.",
        epilog="Set FRAMEKIT_TOL to override the identity residual tolerance (default 1e-9).",
        add_help=True)
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debug output to stderr.")
    commands = parser.add_subparsers(dest="command", required=True)

    frame = commands.add_parser("frame", help="Frame analysis.")
    frame_commands = frame.add_subparsers(dest="frame_command", required=True)
    analyze = frame_commands.add_parser("analyze", help="Bounds, tightness and excess of a frame file.")
    analyze.add_argument("input", metavar="frame", help="Frame JSON file.")
    analyze.add_argument("--emit-dual", action="store_true", dest="emit_dual",
                         help="Include the canonical dual in the report.")
    analyze.add_argument("-o", "--output", metavar="file", help="Write the JSON report here.")
    analyze.set_defaults(handler=cmd_frame_analyze)

    perturb = commands.add_parser("perturb", help="Perturbation audits.")
    perturb_commands = perturb.add_subparsers(dest="perturb_command", required=True)
    audit = perturb_commands.add_parser("audit", help="Audit a frame against its perturbation.")
    audit.add_argument("frame_a", metavar="A", help="Original frame JSON file.")
    audit.add_argument("frame_b", metavar="B", help="Perturbed frame JSON file.")
    audit.add_argument("--params", metavar="file",
                       help="JSON with A and Theta for the original frame and an optional A2; identity/zero default.")
    audit.add_argument("--dual-weight", metavar="file", dest="dual_weight",
                       help="Dual frame of A weighting q_Lambda for the d-quad audits; canonical dual by default.")
    audit.add_argument("--kinds", default="all", metavar="list",
                       help=f"Comma separated subset of {', '.join(AUDIT_KINDS)}, or all.")
    audit.add_argument("--trials", type=int, default=100, help="Random competitors in the optimality audit.")
    audit.add_argument("--seed", type=int, default=42)
    audit.add_argument("--csv", action="store_true", help="Also write a flat CSV next to the JSON report.")
    audit.add_argument("-o", "--output", metavar="file", help="Write the JSON audit batch here.")
    audit.set_defaults(handler=cmd_perturb_audit)

    generate = commands.add_parser("generate", help="Instance generation.")
    generate_commands = generate.add_subparsers(dest="generate_command", required=True)
    exam = generate_commands.add_parser("exam", help="Write the block-diagonal exam pair phi.json and psi.json.")
    exam.add_argument("--blocks", type=int, required=True, metavar="K", help="Number of blocks, 1 to 10.")
    exam.add_argument("-o", "--output", required=True, metavar="dir")
    exam.set_defaults(handler=cmd_generate_exam)

    gabor = commands.add_parser("gabor", help="Discrete Gabor systems.")
    gabor_commands = gabor.add_subparsers(dest="gabor_command", required=True)
    g_analyze = gabor_commands.add_parser("analyze", help="Frame bounds, correlation estimates and envelope.")
    g_analyze.add_argument("system", help="Gabor system JSON file.")
    g_analyze.add_argument("-o", "--output", metavar="file")
    g_analyze.set_defaults(handler=cmd_gabor)

    dual_window = gabor_commands.add_parser("dual-window", help="Approximately dual window.")
    dual_window.add_argument("system", help="Gabor system JSON file.")
    dual_window.add_argument("--scalar", type=float, help="A = scalar * I (default 1).")
    dual_window.add_argument("--optimal", action="store_true", help="A = 2/(m + M) S.")
    dual_window.add_argument("--h", metavar="file", help="Bessel generator window.")
    dual_window.add_argument("--dual", metavar="file", help="Dual window g_d; uses h = S g_d.")
    dual_window.add_argument("-o", "--output", metavar="file")
    dual_window.set_defaults(handler=cmd_gabor)

    g_perturb = gabor_commands.add_parser("perturb", help="Audit a window perturbation.")
    g_perturb.add_argument("system", help="Gabor system JSON file of the original window.")
    g_perturb.add_argument("window", help="Perturbed window file.")
    g_perturb.add_argument("--a1-scalar", type=float, dest="a1_scalar", help="A_1 = scalar * I (default 1).")
    g_perturb.add_argument("--a2-scalar", type=float, dest="a2_scalar", help="A_2 = scalar * I (default 1).")
    g_perturb.add_argument("--optimal", action="store_true", help="A_2 = 2/(m + M) S.")
    g_perturb.add_argument("--h", metavar="file", help="Bessel generator of the approximate dual of the original.")
    g_perturb.add_argument("--trials", type=int, default=20)
    g_perturb.add_argument("--seed", type=int, default=42)
    g_perturb.add_argument("-o", "--output", metavar="file")
    g_perturb.set_defaults(handler=cmd_gabor)

    corpus = commands.add_parser("corpus", help="Seeded randomized audit corpus.")
    corpus.add_argument("--seed", type=int, default=42)
    corpus.add_argument("--trials", type=int, default=100)
    corpus.add_argument("-o", "--output", default="corpus", metavar="dir")
    corpus.add_argument("--format", choices=FORMATS, default="json")
    corpus.add_argument("--profile", default="default", help="Corpus profile: default or small.")
    corpus.set_defaults(handler=cmd_corpus)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        tol = tolerance_from_environment()
        return args.handler(args, tol)
    except (FrameKitError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == '__main__':
    sys.exit(main())
