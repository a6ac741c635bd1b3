import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from tcq.codebook import build_codebook
from tcq.entropy import (
    AdaptiveModel, ArithmeticDecoder, ArithmeticEncoder, EntropyContainer, NeighborContextModel, StaticModel,
    TensorShape, ac_decode, ac_encode, decode_plane, encode_plane, entropy_decode_container,
    entropy_encode_bitstream, make_model, read_container, traversal_indices, traversal_order, write_container,
)
from tcq.exceptions import EntropyError, EntropyStreamError
from tcq.indexing import METHOD_I, METHOD_II, encode
from tcq.trellis import default_trellis4, viterbi_quantize


class ModelTests(SimpleTestCase):

    def test_adaptive_counts_and_rescaling(self):
        model = AdaptiveModel(4)
        self.assertEqual(model.cumulative(), [0, 1, 2, 3, 4])
        model.update(2)
        self.assertEqual(model.cumulative(), [0, 1, 2, 4, 5])
        for _ in range(2 ** 15):
            model.update(0)
        self.assertLess(model.cumulative()[-1], 2 ** 15)
        self.assertGreaterEqual(min(model.freqs), 1)

    def test_neighbor_model_conditions_on_previous_symbol(self):
        model = NeighborContextModel(4)
        self.assertEqual(model.context, 0)
        model.update(3)
        self.assertEqual(model.context, 3)
        self.assertEqual(model.cumulative(), [0, 1, 2, 3, 4])
        model.update(1)
        self.assertEqual(model.context, 1)
        model.context = 3
        self.assertEqual(model.cumulative(), [0, 1, 3, 4, 5])

    def test_static_model_validation(self):
        with self.assertRaises(EntropyError):
            StaticModel(3, [1, 0, 1])
        with self.assertRaises(EntropyError):
            StaticModel(2, [2 ** 16, 1])

    def test_registry(self):
        self.assertIsInstance(make_model('neighbor', 8), NeighborContextModel)
        self.assertIsInstance(make_model(1, 8), StaticModel)
        with self.assertRaises(EntropyError):
            make_model('pixelcnn', 8)


class CoderTests(SimpleTestCase):

    def test_static_uniform_rate(self):
        symbols = np.random.default_rng(0).integers(0, 4, size=1000)
        data = ac_encode(symbols, StaticModel(4))
        self.assertGreaterEqual(len(data), 250)
        self.assertLessEqual(len(data), 254)
        np.testing.assert_array_equal(ac_decode(data, 1000, StaticModel(4)), symbols)

    def test_adaptive_run_compresses(self):
        symbols = np.full(1000, 3)
        data = ac_encode(symbols, AdaptiveModel(4))
        self.assertLess(len(data), 40)
        np.testing.assert_array_equal(ac_decode(data, 1000, AdaptiveModel(4)), symbols)

    def test_static_bound_at_large_n(self):
        symbols = np.random.default_rng(1).integers(0, 4, size=10 ** 5)
        data = ac_encode(symbols, StaticModel(4))
        self.assertLessEqual(len(data), 10 ** 5 * 2 // 8 + 4)

    def test_skewed_static_model_is_near_ideal(self):
        freqs = [1, 1, 2, 4]
        p = np.array(freqs) / 8
        symbols = np.random.default_rng(2).choice(4, size=10 ** 5, p=p)
        data = ac_encode(symbols, StaticModel(4, freqs))
        ideal_bits = float(-np.log2(p[symbols]).sum())
        self.assertLessEqual(8 * len(data), ideal_bits + 32 + 8 * math.ceil(math.log2(4)))
        np.testing.assert_array_equal(ac_decode(data, len(symbols), StaticModel(4, freqs)), symbols)

    def test_random_round_trips(self):
        rng = np.random.default_rng(3)
        names = ['static', 'order0', 'neighbor']
        for trial in range(10000):
            alphabet = 1 << int(rng.integers(1, 9))
            name = names[trial % 3]
            weights = rng.dirichlet(np.full(alphabet, 0.2))
            symbols = rng.choice(alphabet, size=int(rng.integers(1, 120)), p=weights)
            data = ac_encode(symbols, make_model(name, alphabet))
            np.testing.assert_array_equal(ac_decode(data, len(symbols), make_model(name, alphabet)), symbols)

    def test_deterministic(self):
        symbols = np.random.default_rng(4).integers(0, 16, size=500)
        self.assertEqual(ac_encode(symbols, NeighborContextModel(16)), ac_encode(symbols, NeighborContextModel(16)))

    def test_prefix_is_unaffected_by_later_symbols(self):
        rng = np.random.default_rng(5)
        prefix = rng.integers(0, 8, size=300)
        suffix = rng.integers(0, 8, size=300)
        streams = []
        for tail in (suffix, rng.permutation(suffix)):
            encoder, model = ArithmeticEncoder(), AdaptiveModel(8)
            for symbol in prefix.tolist():
                encoder.encode(symbol, model)
            emitted = bytes(encoder.bits)
            for symbol in tail.tolist():
                encoder.encode(symbol, model)
            streams.append((emitted, encoder.finish()))
        self.assertEqual(streams[0][0], streams[1][0])

        decoder, model = ArithmeticDecoder(streams[1][1]), AdaptiveModel(8)
        self.assertEqual([decoder.decode(model) for _ in range(300)], prefix.tolist())

    def test_symbol_outside_alphabet(self):
        with self.assertRaises(EntropyError):
            ac_encode([0, 4], StaticModel(4))

    def test_exhausted_stream(self):
        data = ac_encode(np.random.default_rng(6).integers(0, 4, size=400), StaticModel(4))
        with self.assertRaises(EntropyStreamError):
            ac_decode(data[:20], 400, StaticModel(4))


class TraversalTests(SimpleTestCase):

    def test_channels_innermost(self):
        self.assertEqual(traversal_order(TensorShape(2, 1, 2)), [(0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1)])

    def test_single_channel_raster(self):
        self.assertEqual(traversal_order(TensorShape(1, 2, 2)), [(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1)])

    def test_complete_and_matches_flat_indices(self):
        shape = TensorShape(3, 4, 5)
        order = traversal_order(shape)
        self.assertEqual(len(order), 60)
        self.assertEqual(len(set(order)), 60)
        flat = [c * 20 + i * 5 + j for c, i, j in order]
        self.assertEqual(traversal_indices(shape).tolist(), flat)

    def test_shape_validation(self):
        with self.assertRaises(EntropyError):
            TensorShape(0, 2, 2)
        with self.assertRaises(EntropyError):
            TensorShape.parse('4,4')
        self.assertEqual(TensorShape.parse('2,3,4').size, 24)


class PlaneTests(SimpleTestCase):

    def test_constant_plane(self):
        shape = TensorShape(4, 32, 32)
        plane = np.full(shape.size, 5)
        data = encode_plane(plane, shape, NeighborContextModel(16))
        self.assertLess(8 * len(data), 0.05 * shape.size * 4)
        np.testing.assert_array_equal(decode_plane(data, shape, NeighborContextModel(16)).ravel(), plane)

    def test_round_trip_keeps_layout(self):
        shape = TensorShape(3, 5, 7)
        plane = np.random.default_rng(7).integers(0, 8, size=(3, 5, 7))
        for name in ('static', 'order0', 'neighbor'):
            data = encode_plane(plane, shape, make_model(name, 8))
            np.testing.assert_array_equal(decode_plane(data, shape, make_model(name, 8)), plane)

    def test_size_mismatch(self):
        with self.assertRaises(EntropyError):
            encode_plane(np.zeros(10), TensorShape(1, 3, 3), StaticModel(2))


class ContainerTests(SimpleTestCase):

    def setUp(self):
        self.cb = build_codebook(3)
        self.t = default_trellis4()
        self.qs = viterbi_quantize(np.sin(np.linspace(0, 6, 2 * 8 * 8)), self.cb, self.t)
        self.bitstream = encode(self.qs, self.cb, self.t, METHOD_II)

    def test_layout_and_round_trip(self):
        shape = TensorShape(2, 8, 8)
        container = entropy_encode_bitstream(self.bitstream, shape, 'neighbor')
        data = container.to_bytes()
        self.assertEqual(data[:4], b'TCQ1')
        self.assertEqual(data[6], 3)
        self.assertEqual(data[12:25], b'\x00\x00\x00\x02\x00\x00\x00\x08\x00\x00\x00\x08\x03')

        restored = entropy_decode_container(EntropyContainer.from_bytes(data))
        self.assertEqual(restored, self.bitstream)

    def test_file_round_trip(self):
        container = entropy_encode_bitstream(self.bitstream, TensorShape(1, 1, 128), 'order0')
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'plane.tcqe')
            write_container(path, container)
            self.assertEqual(read_container(path), container)

    def test_rejects_method_one_and_bad_shapes(self):
        with self.assertRaises(EntropyError):
            entropy_encode_bitstream(encode(self.qs, self.cb, self.t, METHOD_I), TensorShape(1, 1, 128), 'order0')
        with self.assertRaises(EntropyError):
            entropy_encode_bitstream(self.bitstream, TensorShape(1, 1, 100), 'order0')
        with self.assertRaises(EntropyError):
            EntropyContainer.from_bytes(self.bitstream.to_bytes())
