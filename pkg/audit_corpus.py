"""
Seeded randomized corpus: draws frames, perturbations, approximate-dual parameters and Gabor systems, runs every
audit on them and tallies the verdicts per audit name.
Every third frame pair is a replicated pair inside the quadratic closeness regime (m <= q, q_0 < 1), so the
quadratic rows get applicable instances next to the random perturbations.

Each trial draws from its own named streams (see util.rng), so a trial's instances do not depend on how many trials
run or in which order. Records are sorted by audit name, then trial index.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from approx_dual import (MinimalNormAudit, build_approx_dual, make_params, minimal_norm_audit,
                         random_admissible_operator)
from data.frame_io import audits_to_json, write_json, write_summary_csv
from data.instance_generators import (exam_pair, random_frame, random_gabor_system, random_params,
                                      random_perturbation, random_window_perturbation, replicated_pair)
from frame_core import Frame, excess, frame_bounds
from framekit_errors import InputError
from gabor_discrete import (build_gabor_frame, commuting_operator, envelope_audit, gabor_perturbation_audit,
                            optimal_scaling_coefficients, walnut_sandwich_audit)
from numeric_kernel import TolerancePolicy, operator_norm
from perturbation import (BoundAudit, HOLDS, NOT_APPLICABLE, VIOLATED, best_approx_bessel_form, best_approx_dual,
                          canonical_not_best_check, deviation_bound_audit, dual_difference_audit,
                          gamma_round_trip_audit, gap_bound_audit, make_audit, mu_below_root, not_applicable,
                          perturbed_frame_audit)
from util.config import RunConfig
from util.project_path import prepare_output_dir
from util.rng import stream_generator

logger = logging.getLogger(__name__)

# every third frame pair is drawn inside the quadratic closeness regime
QUADRATIC_EVERY = 3


@dataclass(frozen=True)
class CorpusProfile:
    dims: tuple[int, int] = (2, 6)
    max_size: int = 14
    gabor_lengths: tuple[int, ...] = (8, 12, 16)
    exam_blocks: tuple[int, ...] = (1, 2, 3, 4)
    minimal_norm_trials: int = 5
    optimality_trials: int = 20


PROFILES = {
    'default': CorpusProfile(),
    'small': CorpusProfile(dims=(2, 3), max_size=6, gabor_lengths=(8,), exam_blocks=(1, 2), minimal_norm_trials=2,
                           optimality_trials=5),
}


class AuditRecord(NamedTuple):
    trial: int
    audit: BoundAudit


@dataclass(frozen=True)
class CorpusResult:
    records: list[AuditRecord]
    summary: list[dict]

    def violated(self) -> int:
        return sum(row['violated'] for row in self.summary if not row['report_only'])


def minimal_norm_audits(f: Frame, a, trials: int, seed: int, tol: TolerancePolicy) -> list[BoundAudit]:
    return minimal_norm_rows(minimal_norm_audit(f, a, trials, seed, tol))


def minimal_norm_rows(record: MinimalNormAudit) -> list[BoundAudit]:
    smallest = min((record.canonical_norm,) + record.trial_norms)
    return [
        make_audit('minimal_norm.lower_bound', record.lower_bound, smallest),
        make_audit('minimal_norm.dominance', record.canonical_norm, min(record.trial_norms), rel=1e-10),
        make_audit('minimal_norm.pointwise', -record.min_pointwise_margin, 0.0, rel=1e-10),
        # a Theta != 0 that does not increase ||U||_F breaks uniqueness
        make_audit('minimal_norm.frobenius', record.frobenius_residual if record.frobenius_unique else math.inf, 0.0),
        make_audit('minimal_norm.equality', record.canonical_norm, record.lower_bound, rel=1e-10, report_only=True),
    ]


def frame_pair_audits(trial: int, config: RunConfig, profile: CorpusProfile) -> list[BoundAudit]:
    tol = config.tolerance
    rng = stream_generator(config.seed, 'corpus.frame_pair', trial)
    dim = int(rng.integers(profile.dims[0], profile.dims[1] + 1))
    quadratic = trial % QUADRATIC_EVERY == QUADRATIC_EVERY - 1
    if quadratic:
        # m <= q with q_0 < 1, where only the quadratic estimates apply
        ratio = int(rng.integers(2, 5))
        f, g = replicated_pair(rng, dim, dim * ratio, rng.uniform(math.sqrt(ratio), ratio * 0.98))
        m = frame_bounds(f, tol).lower_opt
    else:
        size = int(rng.integers(dim + 1, max(dim + 1, profile.max_size) + 1))
        f = random_frame(rng, dim, size, tol)
        m = frame_bounds(f, tol).lower_opt
        g = random_perturbation(rng, f, rng.uniform(0.02, 1.1) * math.sqrt(m))
    p1 = random_params(rng, f, rng.uniform(0.1, 2.0), tol)
    a2 = random_admissible_operator(dim, rng)

    audits = [gap_bound_audit(f, g, tol)]
    f_dual = build_approx_dual(f, p1, tol)
    audits.append(make_audit('approx_dual.excess_preserved', abs(excess(f, tol) - excess(f_dual.dual, tol)), 0.0))
    residual = f_dual.reconstruction_residual / max(1.0, operator_norm(p1.A))
    audits.append(make_audit('approx_dual.reconstruction', residual, 0.0, rel=tol.identity_residual_rel))
    audits += minimal_norm_audits(f, p1.A, profile.minimal_norm_trials, config.seed + trial, tol)

    # an alternate dual of f weights q_Lambda; regime pairs keep the canonical one so that q_Lambda = q_0 < 1
    weight = None if quadratic else build_approx_dual(f, make_params(f, None, p1.Theta), tol).dual
    audits += perturbed_frame_audit(f, g, 'mu', tol=tol)
    audits += perturbed_frame_audit(f, g, 'c-quad', tol=tol)
    audits += perturbed_frame_audit(f, g, 'd-quad', weight, tol)
    for kind in ('canonical-ad', 'canonical-dual', 'c-quad'):
        audits += deviation_bound_audit(kind, f, g, p1.A, a2, theta=p1.Theta, tol=tol)
    audits += deviation_bound_audit('d-quad', f, g, p1.A, a2, weight, p1.Theta, tol)

    if frame_bounds(g, tol).is_frame():
        audits.append(dual_difference_audit(f, g, p1, random_params(rng, g, rng.uniform(0.1, 2.0), tol), tol))
        audits.append(canonical_not_best_check(f, g, p1.A, a2, tol)[2])
    else:
        audits += [not_applicable('dual_difference_identity'), not_applicable('best_approx.beats_canonical')]

    best_names = ('best_approx.lambda', 'best_approx.optimality', 'best_approx.projector_identity',
                  'best_approx.bessel_form')
    if mu_below_root(operator_norm(f.get_vectors() - g.get_vectors()), m, tol):
        best = best_approx_dual(f, g, p1, a2, profile.optimality_trials, config.seed + trial, tol)
        audits += [best.lambda_bound, best.optimality, best.projector_identity,
                   best_approx_bessel_form(f, g, p1, a2, tol)[1]]
        audits.append(make_audit('approx_dual.excess_preserved_perturbed',
                                 abs(excess(g, tol) - excess(best.report.dual, tol)), 0.0))
    else:
        audits += [not_applicable(n) for n in best_names + ('approx_dual.excess_preserved_perturbed',)]
    audits += gamma_round_trip_audit(f, g, p1, config.seed + trial, tol)
    return audits


def closeness_pair_audits(trial: int, config: RunConfig, profile: CorpusProfile) -> list[BoundAudit]:
    """
    Pairs that are quadratically close with q >= m but q_0 < 1: replicated bases and the block exam pair.
    """
    tol = config.tolerance
    rng = stream_generator(config.seed, 'corpus.closeness_pair', trial)
    dim = int(rng.integers(max(2, profile.dims[0]), profile.dims[1] + 1))
    ratio = int(rng.integers(2, 5))
    stretch = rng.uniform(math.sqrt(ratio), ratio * 0.98)
    f, g = replicated_pair(rng, dim, dim * ratio, stretch)
    a1, a2 = random_admissible_operator(dim, rng), random_admissible_operator(dim, rng)

    blocks = profile.exam_blocks[trial % len(profile.exam_blocks)]
    exam_f, exam_g, _ = exam_pair(blocks)
    exam_a1 = random_admissible_operator(blocks, rng)

    audits = []
    for first, second, op1, op2 in ((f, g, a1, a2), (exam_f, exam_g, exam_a1, exam_a1)):
        audits += [_closeness(a) for a in perturbed_frame_audit(first, second, 'c-quad', tol=tol)]
        audits += [_closeness(a) for a in perturbed_frame_audit(first, second, 'd-quad', tol=tol)]
        audits += [_closeness(a) for a in deviation_bound_audit('c-quad', first, second, op1, op2, tol=tol)]
        audits += [_closeness(a) for a in deviation_bound_audit('d-quad', first, second, op1, op2, tol=tol)]
    return audits


def _closeness(audit: BoundAudit) -> BoundAudit:
    return replace(audit, name='closeness.' + audit.name)


def gabor_audits(trial: int, config: RunConfig, profile: CorpusProfile) -> list[BoundAudit]:
    tol = config.tolerance
    rng = stream_generator(config.seed, 'corpus.gabor', trial)
    length = profile.gabor_lengths[trial % len(profile.gabor_lengths)]
    system = random_gabor_system(rng, length, tol)
    m = frame_bounds(build_gabor_frame(system), tol).lower_opt
    g2 = random_window_perturbation(rng, system, rng.uniform(0.0, 0.5) * math.sqrt(m / length))

    a1 = commuting_operator(system, scalar=rng.uniform(0.2, 1.8), tol=tol)
    a2 = commuting_operator(system, coefficients=optimal_scaling_coefficients(system, tol), tol=tol)
    audits = walnut_sandwich_audit(system, tol) + [envelope_audit(system, tol)]
    audits += gabor_perturbation_audit(system, g2, a1, a2, trials=profile.optimality_trials,
                                       seed=config.seed + trial, tol=tol)
    return audits


def summarize(records: list[AuditRecord]) -> list[dict]:
    """
    Verdict counts per audit name, theorem-backed audits first, then the report-only ones.
    """
    rows: dict[str, dict] = {}
    for record in records:
        audit = record.audit
        row = rows.setdefault(audit.name, {'name': audit.name, 'applicable': 0, HOLDS: 0, VIOLATED: 0,
                                           'not_applicable': 0, 'report_only': audit.report_only})
        verdict = audit.verdict()
        if verdict == NOT_APPLICABLE:
            row['not_applicable'] += 1
        else:
            row['applicable'] += 1
            row[verdict] += 1
    return sorted(rows.values(), key=lambda r: (r['report_only'], r['name']))


def run_corpus(config: RunConfig) -> CorpusResult:
    if config.profile not in PROFILES:
        raise InputError(f"Unknown corpus profile '{config.profile}'. Expected one of {', '.join(PROFILES)}.")
    profile = PROFILES[config.profile]

    records = []
    for trial in range(config.trials):
        for generator in (frame_pair_audits, closeness_pair_audits, gabor_audits):
            records += [AuditRecord(trial, audit) for audit in generator(trial, config, profile)]
        logger.info("Corpus trial %d/%d done", trial + 1, config.trials)

    records.sort(key=lambda r: (r.audit.name, r.trial))
    return CorpusResult(records, summarize(records))


def write_corpus(result: CorpusResult, config: RunConfig) -> None:
    """
    Writes audits.json (every record, with its trial index) and summary.json; summary.csv too for the csv-summary
    format.
    """
    out = prepare_output_dir(config.output_path)
    entries = []
    for record, entry in zip(result.records, audits_to_json([r.audit for r in result.records])):
        entry['trial'] = record.trial
        entries.append(entry)
    write_json(entries, out / 'audits.json')
    write_json({'seed': config.seed, 'trials': config.trials, 'profile': config.profile,
                'violated': result.violated(), 'audits': result.summary}, out / 'summary.json')
    if config.format == 'csv-summary':
        write_summary_csv(result.summary, out / 'summary.csv')
