import json
import os
import tempfile
from io import StringIO

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings

from tcq.benchmark import read_rd_csv
from tcq.entropy import TensorShape, read_container
from tcq.indexing import read_bitstream
from tcq.models import BenchmarkRun
from tcq.sources import load_tensor, write_tensor


class CommandTestMixin:

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def call(self, *args, **kwargs):
        out = StringIO()
        call_command(*args, stdout=out, **kwargs)
        return out.getvalue()


class FileCommandTests(CommandTestMixin, SimpleTestCase):

    def setUp(self):
        super().setUp()
        self.values = np.random.default_rng(0).uniform(-1, 1, size=(2, 4, 8))
        write_tensor(self.path('in.tnsr'), self.values, TensorShape(2, 4, 8))

    def test_quantize_dequantize_round_trip(self):
        out = self.call('quantize', self.path('in.tnsr'), self.path('in.tcq'), rate=3)
        self.assertIn('Quantized 64 symbols', out)
        header = read_bitstream(self.path('in.tcq')).header
        self.assertEqual((header.rate_bits, header.method, header.num_symbols), (3, 2, 64))

        self.call('dequantize', self.path('in.tcq'), self.path('out.tnsr'), shape='2,4,8')
        matrix, shape = load_tensor(self.path('out.tnsr'))
        self.assertEqual(shape, TensorShape(2, 4, 8))
        self.assertLess(np.mean((matrix.ravel() - self.values.ravel()) ** 2), 0.125 ** 2)

    def test_entropy_container_round_trip(self):
        self.call('quantize', self.path('in.tnsr'), self.path('in.tcq'), rate=2, method=2)
        out = self.call('entropy_encode', self.path('in.tcq'), self.path('in.tcqe'), model='order0', shape='2,4,8')
        self.assertIn('bits/symbol', out)
        self.assertEqual(read_container(self.path('in.tcqe')).shape, TensorShape(2, 4, 8))

        self.call('entropy_decode', self.path('in.tcqe'), self.path('back.tcq'))
        with open(self.path('in.tcq'), 'rb') as a, open(self.path('back.tcq'), 'rb') as b:
            self.assertEqual(a.read(), b.read())

    def test_method_one_cannot_be_entropy_coded(self):
        self.call('quantize', self.path('in.tnsr'), self.path('m1.tcq'), rate=2, method=1)
        with self.assertRaises(CommandError) as ctx:
            self.call('entropy_encode', self.path('m1.tcq'), self.path('m1.tcqe'))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_bad_input_exits_with_two(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('quantize', self.path('in.tnsr'), self.path('x.tcq'), rate=0)
        self.assertEqual(ctx.exception.returncode, 2)
        with self.assertRaises(CommandError) as ctx:
            self.call('dequantize', self.path('missing.tcq'), self.path('x.tnsr'))
        self.assertEqual(ctx.exception.returncode, 2)


class BenchmarkCommandTests(CommandTestMixin, TestCase):

    def test_compare(self):
        out = self.call('compare', rate=2, samples=8192, seqlen=4096)
        self.assertIn('TCQ - SQ SNR', out)
        self.assertIn('Header overhead: 16 bits', out)

    def test_rd_sweep_writes_csv_and_saves(self):
        csv_path = self.path('rd.csv')
        self.call('rd_sweep', rates='1,2', samples=8192, seqlen=4096, csv=csv_path, save=True)
        frame = read_rd_csv(csv_path)
        self.assertEqual(frame['quantizer'].tolist(), ['TCQ', 'SQ', 'TCQ', 'SQ'])
        run = BenchmarkRun.objects.get()
        self.assertEqual(run.results.count(), 4)
        self.assertEqual(run.trellis, 'ungerboeck4')

    def test_compare_with_wider_bounds_and_sigma(self):
        out = self.call('compare', rate=2, samples=8192, seqlen=4096, vmin=-2.0, vmax=2.0, sigma=40.0)
        self.assertIn('TCQ - SQ SNR', out)
        self.assertIn('Soft quantizer MSE (sigma=40)', out)

    def test_failed_sweep_is_saved_as_failed(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('rd_sweep', rates='9', samples=8192, seqlen=4096, save=True)
        self.assertEqual(ctx.exception.returncode, 2)
        run = BenchmarkRun.objects.get()
        self.assertEqual(run.status, 'failed')
        self.assertIn('got 9', run.error_message)

    def test_bad_source_options(self):
        for kwargs in ({'rates': '1,x'}, {'rates': '2', 'samples': 1000, 'seqlen': 4096}):
            with self.assertRaises(CommandError) as ctx:
                self.call('rd_sweep', **kwargs)
            self.assertEqual(ctx.exception.returncode, 2)


class OracleCommandTests(CommandTestMixin, SimpleTestCase):

    def test_conformance_json(self):
        out = self.call('conformance', trials=5, json=True)
        summary = json.loads(out)
        self.assertTrue(summary['passed'])
        self.assertEqual(len(summary['checks']), 6)

    @override_settings(TCQ={'CONFORMANCE_ENABLED': False})
    def test_conformance_can_be_disabled(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('conformance', trials=5)
        self.assertEqual(ctx.exception.returncode, 2)

    def test_softquant_check(self):
        out = self.call('softquant_check', trials=200, sigma=4.0)
        self.assertIn('Analytic derivative matches finite differences', out)
