"""
Check the soft-quantization derivative against finite differences.

Usage:
    python manage.py softquant_check --sigma 4 --trials 10000
"""
from django.core.management.base import CommandError

from tcq.conformance import GRADIENT_TOLERANCE, OracleConfig, check_gradients

from ._base import TCQCommand


class Command(TCQCommand):
    help = 'Compare the closed-form soft-quantization derivative with central differences'

    def add_arguments(self, parser):
        parser.add_argument('--sigma', type=float, default=None,
                            help='Fixed softness sigma (default: random in [0.5, 50] per trial)')
        parser.add_argument('--trials', type=int, default=10000, help='Random points (default: 10000)')
        parser.add_argument('--seed', type=int, default=0, help='RNG seed (default: 0)')
        parser.add_argument('--max-rate', type=int, default=3, help='Largest codebook rate drawn (default: 3)')

    def run(self, **options):
        config = OracleConfig(trials=options['trials'], seed=options['seed'], max_rate=options['max_rate'])
        result = check_gradients(config, sigma=options['sigma'])

        worst = result.detail['max_relative_error']
        self.stdout.write(f'Trials: {result.trials} '
                          f'(skipped near codewords: {result.detail["skipped_near_codewords"]})')
        self.stdout.write(f'Max relative error: {worst:.3e} (tolerance {GRADIENT_TOLERANCE:g})')
        if not result.passed:
            for failure in result.failures[:10]:
                self.stdout.write(self.style.ERROR(f'  {failure}'))
            raise CommandError(f'{len(result.failures)} gradient mismatches', returncode=1)
        self.stdout.write(self.style.SUCCESS('✓ Analytic derivative matches finite differences'))
