"""
Recover the method-2 bitstream from an entropy-coded container.

Usage:
    python manage.py entropy_decode features.tcqe features.tcq
"""
from tcq.entropy import entropy_decode_container, read_container
from tcq.indexing import write_bitstream

from ._base import TCQCommand


class Command(TCQCommand):
    help = 'Decode a method-3 container back into its method-2 .tcq bitstream'

    def add_arguments(self, parser):
        parser.add_argument('input', type=str, help='Entropy-coded container')
        parser.add_argument('output', type=str, help='Method-2 bitstream to write')

    def run(self, **options):
        container = read_container(options['input'])
        bitstream = entropy_decode_container(container)
        write_bitstream(options['output'], bitstream)
        self.stdout.write(self.style.SUCCESS(
            f'✓ Decoded {bitstream.header.num_symbols} symbols -> {options["output"]}'
        ))
