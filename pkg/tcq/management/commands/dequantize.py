"""
Decode a .tcq bitstream back into a raw_f32 tensor.

Usage:
    python manage.py dequantize features.tcq restored.tnsr --shape 8,32,32
"""
from tcq.codebook import build_codebook
from tcq.indexing import decode, read_bitstream
from tcq.sources import write_tensor
from tcq.trellis import get_trellis, reconstruct

from ._base import TCQCommand, add_bounds_arguments, bounds_from_options, parse_shape, tcq_setting


class Command(TCQCommand):
    help = 'Decode a .tcq bitstream (method 1 or 2) into a raw_f32 tensor'

    def add_arguments(self, parser):
        parser.add_argument('input', type=str, help='Bitstream file')
        parser.add_argument('output', type=str, help='raw_f32 tensor file to write')
        parser.add_argument('--trellis', type=str, default=None, help='Trellis (default: TCQ DEFAULT_TRELLIS)')
        parser.add_argument('--shape', type=str, default=None, help='Output shape C,H,W (default: 1,1,N)')
        add_bounds_arguments(parser)

    def run(self, **options):
        bitstream = read_bitstream(options['input'])
        header = bitstream.header
        v_min, v_max = bounds_from_options(options)
        codebook = build_codebook(header.rate_bits, v_min, v_max)
        trellis = get_trellis(options['trellis'] or tcq_setting('DEFAULT_TRELLIS'))

        qs = decode(bitstream, codebook, trellis)
        values = reconstruct(qs, codebook, trellis)
        shape = parse_shape(options['shape'], len(values))
        write_tensor(options['output'], values, shape)

        self.stdout.write(self.style.SUCCESS(
            f'✓ Decoded {len(values)} symbols (R={header.rate_bits}, method {header.method}) -> {options["output"]}'
        ))
