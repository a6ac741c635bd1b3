"""
Paired TCQ vs scalar quantizer comparison at one rate.

Usage:
    python manage.py compare --source uniform --rate 4 --samples 1048576 --seqlen 4096 --seed 7
    python manage.py compare --rate 2 --sigma 40
"""
from tcq.benchmark import reports_to_frame, run_compare, tracked_run, write_rd_csv

from ._base import TCQCommand, add_source_arguments, spec_from_options, tcq_setting


class Command(TCQCommand):
    help = 'Compare TCQ against the scalar quantizer on identical samples'

    def add_arguments(self, parser):
        parser.add_argument('--rate', type=int, required=True, help='Bits per symbol R (1-8)')
        add_source_arguments(parser)

    def run(self, **options):
        spec = spec_from_options(options)
        trellis = options['trellis'] or tcq_setting('BENCHMARK_TRELLIS')

        def compute():
            return list(run_compare(
                spec, options['rate'],
                method=options['method'],
                trellis=trellis,
                entropy_model=options['entropy'],
                workers=options['workers'] or tcq_setting('WORKERS'),
                peak=options['peak'],
                sigma=options['sigma'],
            ))

        if options['save']:
            run, (tcq, sq) = tracked_run(spec, trellis, compute)
        else:
            run, (tcq, sq) = None, compute()

        self.stdout.write(reports_to_frame([tcq, sq]).to_string(index=False))
        self.stdout.write(f'Header overhead: {tcq.header_overhead_bits} bits '
                          f'({tcq.overhead_per_symbol:.6f} bits/symbol)')
        gain = tcq.snr_db - sq.snr_db
        style = self.style.SUCCESS if gain > 0 else self.style.WARNING
        self.stdout.write(style(f'TCQ - SQ SNR: {gain:+.3f} dB'))
        if tcq.soft_mse is not None:
            self.stdout.write(f'Soft quantizer MSE (sigma={options["sigma"]:g}): {tcq.soft_mse:.6g}')

        if options['csv']:
            write_rd_csv(options['csv'], [tcq, sq])
            self.stdout.write(f'  CSV -> {options["csv"]}')
        if run is not None:
            self.stdout.write(self.style.SUCCESS(f'✓ Saved run {run.run_id}'))
