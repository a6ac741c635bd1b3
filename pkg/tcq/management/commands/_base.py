"""
Shared plumbing for the TCQ management commands.

Validation errors (TCQError, unreadable inputs) leave with exit code 2;
anything else propagates and exits 1.
"""
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from tcq.entropy import TensorShape
from tcq.exceptions import TCQError
from tcq.sources import SOURCE_KINDS, TENSOR_FORMATS, SourceSpec

DEFAULTS = {
    'DEFAULT_TRELLIS': 'default4',
    'BENCHMARK_TRELLIS': 'ungerboeck4',
    'DEFAULT_SEQLEN': 4096,
    'DEFAULT_SEED': 7,
    'V_MIN': -1.0,
    'V_MAX': 1.0,
    'WORKERS': 1,
    'CONFORMANCE_ENABLED': True,
}


def tcq_setting(key):
    return getattr(settings, 'TCQ', {}).get(key, DEFAULTS[key])


def parse_shape(text, num_symbols):
    """'C,H,W' or None (1,1,N)"""
    if text is None:
        return TensorShape(1, 1, num_symbols)
    return TensorShape.parse(text)


def add_bounds_arguments(parser):
    parser.add_argument('--vmin', type=float, default=None, help='Lower signal bound (default: TCQ V_MIN)')
    parser.add_argument('--vmax', type=float, default=None, help='Upper signal bound (default: TCQ V_MAX)')


def bounds_from_options(options):
    v_min = options['vmin'] if options['vmin'] is not None else tcq_setting('V_MIN')
    v_max = options['vmax'] if options['vmax'] is not None else tcq_setting('V_MAX')
    return v_min, v_max


def add_source_arguments(parser):
    parser.add_argument('--source', choices=SOURCE_KINDS, default='uniform', help='Sample source (default: uniform)')
    parser.add_argument('--samples', type=int, default=1 << 20, help='Number of samples N (default: 1048576)')
    parser.add_argument('--seqlen', type=int, default=None, help='Sequence length M (default: TCQ DEFAULT_SEQLEN)')
    parser.add_argument('--seed', type=int, default=None, help='RNG seed (default: TCQ DEFAULT_SEED)')
    parser.add_argument('--scale', type=float, default=None, help='Gaussian sigma / Laplacian scale')
    parser.add_argument('--path', type=str, default=None, help='Tensor or image file for --source file')
    parser.add_argument('--format', choices=TENSOR_FORMATS, default='raw_f32', help='File format for --source file')
    parser.add_argument('--method', type=int, choices=[1, 2], default=2,
                        help='Indexing method whose plane is entropy-coded (default: 2)')
    parser.add_argument('--entropy', type=str, default=None,
                        help='Also arithmetic-code the index planes with this model (static, order0, neighbor)')
    parser.add_argument('--trellis', type=str, default=None, help='Trellis (default: TCQ BENCHMARK_TRELLIS)')
    parser.add_argument('--workers', type=int, default=None, help='Worker threads (default: TCQ WORKERS)')
    parser.add_argument('--peak', type=float, default=None, help='PSNR peak (default: vmax - vmin)')
    parser.add_argument('--sigma', type=float, default=None,
                        help='Also report the soft quantizer MSE at this softness')
    parser.add_argument('--csv', type=str, default=None, help='Write the R-D rows to this CSV file')
    parser.add_argument('--save', action='store_true', help='Store the run in the database')
    add_bounds_arguments(parser)


def spec_from_options(options):
    v_min, v_max = bounds_from_options(options)
    return SourceSpec(
        kind=options['source'],
        samples=options['samples'],
        seqlen=options['seqlen'] or tcq_setting('DEFAULT_SEQLEN'),
        seed=options['seed'] if options['seed'] is not None else tcq_setting('DEFAULT_SEED'),
        v_min=v_min,
        v_max=v_max,
        scale=options['scale'],
        path=options['path'],
        format=options['format'],
    )


class TCQCommand(BaseCommand):
    """BaseCommand whose run() raises TCQError for bad input"""

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except TCQError as e:
            raise CommandError(str(e), returncode=2) from e
        except OSError as e:
            raise CommandError(f'{e.filename or "file"}: {e.strerror}', returncode=2) from e

    def run(self, **options):
        raise NotImplementedError('subclasses of TCQCommand must provide a run() method')
