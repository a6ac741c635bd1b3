"""
Rate-distortion sweep of TCQ and the scalar quantizer.

Usage:
    python manage.py rd_sweep --rates 1,2,3,4 --csv rd.csv
"""
from tcq.benchmark import reports_to_frame, run_rd_sweep, tracked_run
from tcq.exceptions import SourceSpecError

from ._base import TCQCommand, add_source_arguments, spec_from_options, tcq_setting


def parse_rates(text):
    try:
        rates = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise SourceSpecError(f"rates must be a comma-separated list of integers, got '{text}'") from None
    if not rates:
        raise SourceSpecError('rate list is empty')
    return rates


class Command(TCQCommand):
    help = 'Sweep TCQ and SQ over several rates and write one CSV row per (quantizer, R)'

    def add_arguments(self, parser):
        parser.add_argument('--rates', type=str, default='1,2,3,4', help='Comma-separated rates (default: 1,2,3,4)')
        add_source_arguments(parser)

    def run(self, **options):
        spec = spec_from_options(options)
        trellis = options['trellis'] or tcq_setting('BENCHMARK_TRELLIS')
        rates = parse_rates(options['rates'])

        def compute():
            return run_rd_sweep(
                spec, rates,
                csv_path=options['csv'],
                method=options['method'],
                trellis=trellis,
                entropy_model=options['entropy'],
                workers=options['workers'] or tcq_setting('WORKERS'),
                peak=options['peak'],
                sigma=options['sigma'],
            )

        if options['save']:
            run, reports = tracked_run(spec, trellis, compute)
        else:
            run, reports = None, compute()

        self.stdout.write(reports_to_frame(reports).to_string(index=False))
        if options['csv']:
            self.stdout.write(self.style.SUCCESS(f'✓ Wrote {len(reports)} rows -> {options["csv"]}'))
        if run is not None:
            self.stdout.write(self.style.SUCCESS(f'✓ Saved run {run.run_id}'))
