"""
Arithmetic-code the index plane of a method-2 bitstream.

Usage:
    python manage.py entropy_encode features.tcq features.tcqe --model neighbor --shape 8,32,32
"""
from tcq.entropy import MODELS, entropy_encode_bitstream, write_container
from tcq.indexing import read_bitstream

from ._base import TCQCommand, parse_shape


class Command(TCQCommand):
    help = 'Entropy-code a method-2 .tcq bitstream into the method-3 container'

    def add_arguments(self, parser):
        parser.add_argument('input', type=str, help='Method-2 bitstream')
        parser.add_argument('output', type=str, help='Entropy-coded container to write')
        parser.add_argument('--model', choices=sorted(MODELS), default='neighbor',
                            help='Probability model (default: neighbor)')
        parser.add_argument('--shape', type=str, default=None, help='Index plane shape C,H,W (default: 1,1,N)')

    def run(self, **options):
        bitstream = read_bitstream(options['input'])
        shape = parse_shape(options['shape'], bitstream.header.num_symbols)
        container = entropy_encode_bitstream(bitstream, shape, options['model'])
        write_container(options['output'], container)

        before = len(bitstream.payload)
        after = len(container.payload)
        self.stdout.write(self.style.SUCCESS(
            f'✓ Entropy-coded {shape.size} symbols with the {options["model"]} model'
        ))
        self.stdout.write(f'  Payload: {before} -> {after} bytes '
                          f'({8 * after / shape.size:.4f} bits/symbol) -> {options["output"]}')
