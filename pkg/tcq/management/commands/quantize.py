"""
Quantize a tensor file into a .tcq bitstream.

Usage:
    python manage.py quantize features.tnsr features.tcq --rate 4 --method 2
"""
from tcq.codebook import build_codebook
from tcq.indexing import encode, write_bitstream
from tcq.sources import TENSOR_FORMATS, load_tensor
from tcq.trellis import get_trellis, viterbi_quantize

from ._base import TCQCommand, add_bounds_arguments, bounds_from_options, tcq_setting


class Command(TCQCommand):
    help = 'Trellis-quantize a raw_f32 tensor or PGM image into a .tcq bitstream'

    def add_arguments(self, parser):
        parser.add_argument('input', type=str, help='Tensor or image file')
        parser.add_argument('output', type=str, help='Bitstream file to write')
        parser.add_argument('--format', choices=TENSOR_FORMATS, default='raw_f32', help='Input format (default: raw_f32)')
        parser.add_argument('--rate', type=int, required=True, help='Bits per symbol R')
        parser.add_argument('--method', type=int, choices=[1, 2], default=2, help='Indexing method (default: 2)')
        parser.add_argument('--trellis', type=str, default=None, help='Trellis (default: TCQ DEFAULT_TRELLIS)')
        add_bounds_arguments(parser)

    def run(self, **options):
        v_min, v_max = bounds_from_options(options)
        codebook = build_codebook(options['rate'], v_min, v_max)
        trellis = get_trellis(options['trellis'] or tcq_setting('DEFAULT_TRELLIS'))

        matrix, shape = load_tensor(options['input'], options['format'])
        # Channels one after another, each feature map contiguous
        qs = viterbi_quantize(matrix.ravel(), codebook, trellis)
        bitstream = encode(qs, codebook, trellis, options['method'])
        write_bitstream(options['output'], bitstream)

        self.stdout.write(self.style.SUCCESS(
            f'✓ Quantized {len(qs)} symbols ({shape.channels}x{shape.height}x{shape.width}) '
            f'at R={codebook.rate_bits} with {trellis.name}, method {options["method"]}'
        ))
        self.stdout.write(f'  MSE: {qs.distortion / len(qs):.6g}')
        self.stdout.write(f'  Bitstream: {len(bitstream.to_bytes())} bytes -> {options["output"]}')
