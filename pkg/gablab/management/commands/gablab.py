import csv
import json

from django.core.management.base import BaseCommand, CommandError

from gablab.exceptions import GablabError
from gablab.group import (
    Side,
    annihilator,
    elem_to_json,
    enumerate_subgroups,
    group_to_json,
    make_group,
    section,
    subgroup_to_json,
)
from gablab.runner import Task, run_experiment, sweep_experiment
from gablab.serializers import ExperimentSpecSerializer, ReportSerializer

INPUT_ERROR = 2
VERDICT_FAILED = 1

SWEEP_COLUMNS = (
    'time_lattice', 'freq_lattice', 'theta', 'inner_product', 'psi', 'bound_1_over_d',
    'identity_defect',
)


class Command(BaseCommand):
    help = 'Verify Gabor duality statements on finite abelian groups.'

    def add_arguments(self, parser):
        subparsers = parser.add_subparsers(dest='subcommand', required=True)

        run = subparsers.add_parser('run', help='Run an experiment spec and write a JSON report.')
        run.add_argument('spec', help='Path to the experiment spec (JSON).')
        run.add_argument('--out', required=True, help='Path of the JSON report.')
        run.add_argument(
            '--hashes-only', action='store_true',
            help='Replace witness matrices by their SHA-256 digests.',
        )

        enumerate_ = subparsers.add_parser('enumerate', help='List the subgroups of a group.')
        enumerate_.add_argument('--moduli', required=True, help='Comma-separated moduli, e.g. 4,3.')

        sweep = subparsers.add_parser('sweep', help='Write the completeness sweep as CSV.')
        sweep.add_argument('spec', help='Path to the experiment spec (JSON).')
        sweep.add_argument('--out', required=True, help='Path of the CSV file.')

    def handle(self, *args, **options):
        handlers = {
            'run': self.handle_run,
            'enumerate': self.handle_enumerate,
            'sweep': self.handle_sweep,
        }
        try:
            handlers[options['subcommand']](options)
        except GablabError as exc:
            raise CommandError(str(exc), returncode=INPUT_ERROR)

    # ============================================
    # HELPERS
    # ============================================

    def load_experiment(self, path):
        try:
            with open(path, encoding='utf-8') as handle:
                data = json.load(handle)
        except OSError as exc:
            raise CommandError(f"Cannot read {path}: {exc}", returncode=INPUT_ERROR)
        except json.JSONDecodeError as exc:
            raise CommandError(f"{path} is not valid JSON: {exc}", returncode=INPUT_ERROR)

        serializer = ExperimentSpecSerializer(data=data)
        if not serializer.is_valid():
            raise CommandError(
                f"Invalid experiment spec: {json.dumps(serializer.errors)}",
                returncode=INPUT_ERROR,
            )
        return serializer.to_experiment()

    def write(self, path, text):
        try:
            with open(path, 'w', encoding='utf-8', newline='') as handle:
                handle.write(text)
        except OSError as exc:
            raise CommandError(f"Cannot write {path}: {exc}", returncode=INPUT_ERROR)

    # ============================================
    # SUBCOMMANDS
    # ============================================

    def handle_run(self, options):
        experiment = self.load_experiment(options['spec'])
        report = run_experiment(experiment)
        context = {'hashes_only': options['hashes_only']}
        data = ReportSerializer(report, context=context).data
        self.write(options['out'], json.dumps(data, indent=2) + '\n')

        summary = report.summary
        self.stdout.write(
            f"{len(report.cases)} cases: {summary['pass']} passed, "
            f"{summary['fail']} failed, {summary['skipped']} skipped"
        )
        if not report.passed:
            raise CommandError(
                f"{summary['fail']} verdicts failed, see {options['out']}.",
                returncode=VERDICT_FAILED,
            )
        self.stdout.write(self.style.SUCCESS(f"Report written to {options['out']}"))

    def handle_enumerate(self, options):
        try:
            moduli = [int(n) for n in options['moduli'].split(',') if n.strip()]
        except ValueError:
            raise CommandError(
                f"Moduli must be comma-separated integers, got {options['moduli']!r}.",
                returncode=INPUT_ERROR,
            )
        group = make_group(moduli)
        listing = []
        for subgroup in enumerate_subgroups(group, Side.PRIMAL):
            perp = annihilator(subgroup)
            listing.append({
                'order': subgroup.order,
                'generators': subgroup_to_json(subgroup)['generators'],
                'elements': [elem_to_json(e) for e in subgroup.elements],
                'annihilator': {
                    'order': perp.order,
                    'elements': [elem_to_json(e) for e in perp.elements],
                },
                'section': [elem_to_json(r) for r in section(subgroup).reps],
            })
        data = {'group': group_to_json(group), 'subgroups': listing}
        self.stdout.write(json.dumps(data, indent=2))

    def handle_sweep(self, options):
        experiment = self.load_experiment(options['spec'])
        if not {Task.DENSITY, Task.COMPLETENESS} & set(experiment.tasks):
            raise CommandError(
                'A sweep needs the density or the completeness task in the spec.',
                returncode=INPUT_ERROR,
            )
        results = sweep_experiment(experiment)

        rows = []
        for lam, gam, sweep in results:
            time_json = json.dumps(subgroup_to_json(lam)['generators'], separators=(',', ':'))
            freq_json = json.dumps(subgroup_to_json(gam)['generators'], separators=(',', ':'))
            rows.extend((time_json, freq_json, *row) for row in sweep.rows())
            # Incomplete systems keep psi below 1 in the limit
            note = '' if sweep.complete else ' (incomplete: limit psi(P) < 1)'
            self.stdout.write(
                f"Lambda={time_json} Gamma={freq_json}: final psi={sweep.psi_values[-1]!r}, "
                f"psi(P)={sweep.psi_limit!r}, 1/d={sweep.d_inverse}{note}"
            )

        try:
            with open(options['out'], 'w', encoding='utf-8', newline='') as handle:
                writer = csv.writer(handle)
                writer.writerow(SWEEP_COLUMNS)
                writer.writerows(rows)
        except OSError as exc:
            raise CommandError(f"Cannot write {options['out']}: {exc}", returncode=INPUT_ERROR)
        self.stdout.write(self.style.SUCCESS(f"{len(rows)} rows written to {options['out']}"))
