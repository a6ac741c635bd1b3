"""
Run the oracle suite and print a JSON pass/fail summary.

Usage:
    python manage.py conformance --trials 500 --seed 0
"""
import json

from django.core.management.base import CommandError

from tcq.conformance import OracleConfig, run_suite

from ._base import TCQCommand, tcq_setting


class Command(TCQCommand):
    help = 'Run the brute-force and round-trip oracle suite'

    def add_arguments(self, parser):
        parser.add_argument('--trials', type=int, default=500, help='Trials per check (default: 500)')
        parser.add_argument('--seed', type=int, default=0, help='RNG seed (default: 0)')
        parser.add_argument('--json', action='store_true', help='Print only the JSON summary')

    def run(self, **options):
        if not tcq_setting('CONFORMANCE_ENABLED'):
            raise CommandError('conformance checks are disabled (TCQ CONFORMANCE_ENABLED)', returncode=2)

        summary = run_suite(OracleConfig(trials=options['trials'], seed=options['seed']))
        if not options['json']:
            for check in summary['checks']:
                mark = self.style.SUCCESS('PASS') if check['passed'] else self.style.ERROR('FAIL')
                self.stdout.write(f'{mark} {check["name"]} ({check["trials"]} trials)')
        self.stdout.write(json.dumps(summary, indent=None if options['json'] else 2))

        if not summary['passed']:
            raise CommandError('conformance suite failed', returncode=1)
