"""
Experiment execution: one case per (time lattice, frequency lattice, task).
"""
import logging
from dataclasses import dataclass, field

from django.db import models
from django.utils import timezone

from .exceptions import (
    LatticeMismatchError,
    NotAFrameError,
    NotParsevalError,
    NotTightError,
    ResidualExceededError,
)
from .density import completeness_sweep, completeness_verdict
from .gabor import (
    GaborSystem,
    delta_window,
    gabor_atoms,
    random_window,
    window_from_values,
)
from .group import annihilator, subgroup_to_json
from .rdual import adjoint_rdual_witness, verify_critical_rdual
from .spectral import (
    Convention,
    canonical_parseval,
    excess_deficit,
    frame_bounds,
    verify_bessel_duality,
    verify_duality,
    verify_tight_orthogonal,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PRECONDITION_ERRORS = (LatticeMismatchError, NotAFrameError, NotParsevalError, NotTightError)


class Task(models.TextChoices):
    DUALITY = 'duality', 'Frame bounds equal adjoint Riesz bounds'
    TIGHT = 'tight', 'Tight frame iff orthogonal adjoint system'
    RDUAL43 = 'rdual43', 'Critically sampled R-dual identity'
    RDUAL41 = 'rdual41', 'R-dual witness for tight frames'
    DENSITY = 'density', 'Completeness functional sweep'
    COMPLETENESS = 'completeness', 'Complete systems have d <= 1'
    EXCESS = 'excess', 'Excess and deficit'
    BESSEL = 'bessel', 'Bessel bounds of a system and its adjoint'


class WindowKind(models.TextChoices):
    DELTA = 'delta', 'Delta at the identity'
    RANDOM = 'random', 'Seeded random window'
    VALUES = 'values', 'Explicit values'
    CANONICAL_PARSEVAL = 'canonical_parseval', 'Canonical Parseval window'


class CaseStatus(models.TextChoices):
    PASS = 'pass', 'Pass'
    FAIL = 'fail', 'Fail'
    SKIPPED = 'skipped', 'Skipped: precondition'


DEFAULT_PARSEVAL_BASE = {'kind': WindowKind.RANDOM.value, 'seed': 0}


def build_window(descriptor, group, time_lattice=None, freq_lattice=None):
    """
    Window from its JSON descriptor. canonical_parseval tightens its base
    window on the given lattice pair and raises NotAFrameError when it can't.
    """
    kind = WindowKind(descriptor['kind'])
    if kind == WindowKind.DELTA:
        return delta_window(group)
    if kind == WindowKind.RANDOM:
        return random_window(group, descriptor['seed'])
    if kind == WindowKind.VALUES:
        return window_from_values(group, descriptor['values'])
    base = build_window(descriptor.get('base') or DEFAULT_PARSEVAL_BASE, group)
    return canonical_parseval(GaborSystem(base, time_lattice, freq_lattice), Convention.PAPER)


# ============================================
# CASES
# ============================================

@dataclass(eq=False)
class Case:
    time_lattice: object
    freq_lattice: object
    window: dict
    task: str
    status: str = CaseStatus.PASS
    reason: str = ''
    tolerance: float = 0.0
    result: object = None

    @property
    def sort_key(self):
        return (*self.time_lattice.sort_key, *self.freq_lattice.sort_key, self.task)

    @property
    def passed(self):
        return self.status != CaseStatus.FAIL

    @property
    def time_generators(self):
        return subgroup_to_json(self.time_lattice)['generators']

    @property
    def freq_generators(self):
        return subgroup_to_json(self.freq_lattice)['generators']


@dataclass(eq=False)
class Experiment:
    group: object
    window: dict
    time_lattices: list
    freq_lattices: list
    tasks: list
    tol: float
    theta_grid: list = None

    def lattice_pairs(self):
        return [(lam, gam) for lam in self.time_lattices for gam in self.freq_lattices]


@dataclass(eq=False)
class Report:
    group: object
    cases: list
    timestamp: str = field(default_factory=lambda: timezone.now().isoformat())
    schema_version: int = SCHEMA_VERSION

    @property
    def summary(self):
        counts = {status.value: 0 for status in CaseStatus}
        for case in self.cases:
            counts[CaseStatus(case.status).value] += 1
        return counts

    @property
    def passed(self):
        return all(case.passed for case in self.cases)


# ============================================
# TASK HANDLERS
# ============================================
# Each handler returns (holds, result); precondition failures raise.

def _duality(experiment, g, lam, gam):
    verdict = verify_duality(g, lam, gam, experiment.tol)
    return verdict.holds, verdict


def _tight(experiment, g, lam, gam):
    verdict = verify_tight_orthogonal(g, lam, gam, experiment.tol)
    return verdict.holds, verdict


def _rdual43(experiment, g, lam, gam):
    if gam != annihilator(lam):
        raise LatticeMismatchError('The frequency lattice is not the annihilator of the time lattice.')
    residual = verify_critical_rdual(g, lam, gam, experiment.tol)
    return residual.holds, residual


def _rdual41(experiment, g, lam, gam):
    report = frame_bounds(GaborSystem(g, lam, gam), Convention.PAPER, experiment.tol)
    if not (report.is_frame and report.is_tight):
        raise NotTightError('The window does not generate a tight frame on this lattice pair.')
    witness = adjoint_rdual_witness(g, lam, gam, tol=experiment.tol)
    holds = witness.unitarity_defect <= experiment.tol and witness.w_gram_defect <= experiment.tol
    return holds, witness


def _density(experiment, g, lam, gam):
    sweep = completeness_sweep(g, lam, gam, experiment.theta_grid)
    holds = sweep.max_identity_defect <= experiment.tol and sweep.bounded and sweep.reaches_limit
    return holds, sweep


def _completeness(experiment, g, lam, gam):
    verdict = completeness_verdict(g, lam, gam)
    return verdict.holds and verdict.counting_witness, verdict


def _excess(experiment, g, lam, gam):
    sys = GaborSystem(g, lam, gam)
    counts = excess_deficit(gabor_atoms(sys))
    frame = frame_bounds(sys, Convention.RAW)
    holds = (
        counts.excess == counts.atom_count - counts.rank
        and counts.deficit >= 0
        and (counts.deficit == 0) == frame.is_frame
    )
    return holds, counts


def _bessel(experiment, g, lam, gam):
    verdict = verify_bessel_duality(g, lam, gam, experiment.tol)
    return verdict.holds, verdict


HANDLERS = {
    Task.DUALITY: _duality,
    Task.TIGHT: _tight,
    Task.RDUAL43: _rdual43,
    Task.RDUAL41: _rdual41,
    Task.DENSITY: _density,
    Task.COMPLETENESS: _completeness,
    Task.EXCESS: _excess,
    Task.BESSEL: _bessel,
}


def run_case(experiment, g, lam, gam, task):
    case = Case(lam, gam, experiment.window, Task(task).value, tolerance=experiment.tol)
    try:
        holds, case.result = HANDLERS[Task(task)](experiment, g, lam, gam)
    except ResidualExceededError as exc:
        case.status, case.reason = CaseStatus.FAIL, str(exc)
    except PRECONDITION_ERRORS as exc:
        case.status, case.reason = CaseStatus.SKIPPED, f"precondition: {exc}"
        logger.warning("Skipped %s on |Lambda|=%d |Gamma|=%d: %s", task, lam.order, gam.order, exc)
    else:
        case.status = CaseStatus.PASS if holds else CaseStatus.FAIL
        if not holds:
            logger.warning("Verdict failed: %s on |Lambda|=%d |Gamma|=%d", task, lam.order, gam.order)
    return case


def run_experiment(experiment):
    """
    Run every task on every lattice pair, sequentially; cases come back sorted.
    """
    shared = None
    if experiment.window['kind'] != WindowKind.CANONICAL_PARSEVAL:
        shared = build_window(experiment.window, experiment.group)
    cases = []
    for lam, gam in experiment.lattice_pairs():
        try:
            window = shared if shared is not None else build_window(
                experiment.window, experiment.group, lam, gam
            )
        except NotAFrameError as exc:
            for task in experiment.tasks:
                case = Case(lam, gam, experiment.window, Task(task).value, tolerance=experiment.tol)
                case.status, case.reason = CaseStatus.SKIPPED, f"precondition: {exc}"
                cases.append(case)
            continue
        for task in experiment.tasks:
            logger.info("Running %s on |Lambda|=%d |Gamma|=%d", task, lam.order, gam.order)
            cases.append(run_case(experiment, window, lam, gam, task))
    cases.sort(key=lambda case: case.sort_key)
    return Report(experiment.group, cases)


def sweep_experiment(experiment):
    """
    Completeness sweeps for every lattice pair, as (time lattice, freq lattice, sweep).
    """
    results = []
    for lam, gam in sorted(
        experiment.lattice_pairs(), key=lambda pair: (*pair[0].sort_key, *pair[1].sort_key)
    ):
        try:
            g = build_window(experiment.window, experiment.group, lam, gam)
        except NotAFrameError as exc:
            logger.warning("Skipped sweep on |Lambda|=%d |Gamma|=%d: %s", lam.order, gam.order, exc)
            continue
        results.append((lam, gam, completeness_sweep(g, lam, gam, experiment.theta_grid)))
    return results
