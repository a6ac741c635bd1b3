from dataclasses import replace

import numpy as np
from django.test import SimpleTestCase

from tcq.codebook import Subset, Union, build_codebook, build_scalar_quantizer
from tcq.conformance import brute_force_tcq
from tcq.exceptions import PathConsistencyError, TrellisError
from tcq.trellis import (
    QuantizedSeq, check_path, default_trellis4, get_trellis, greedy_quantize, quantize_batch, reconstruct,
    trellis_states, ungerboeck4_trellis, validate, viterbi_quantize,
)


class TrellisSpecTests(SimpleTestCase):

    def test_shift_register_transitions(self):
        t = default_trellis4()
        self.assertEqual(t.next_state[0][1], 1)
        self.assertEqual(t.next_state[2][0], 0)
        self.assertEqual(t.next_state[3][1], 3)

    def test_state_one_offers_d0_or_d2(self):
        t = default_trellis4()
        self.assertEqual(t.subset[1][0], Subset.D2)
        self.assertEqual({t.subset[1][0], t.subset[1][1]}, {Subset.D0, Subset.D2})
        self.assertEqual(t.union_of, (Union.A0, Union.A0, Union.A1, Union.A1))

    def test_shipped_tables_are_valid(self):
        self.assertEqual(validate(default_trellis4()), [])
        self.assertEqual(validate(ungerboeck4_trellis()), [])

    def test_ungerboeck_branches_entering_a_state_share_a_union(self):
        t = ungerboeck4_trellis()
        for state, pairs in t.incoming().items():
            unions = {int(t.subset[pred][q]) % 2 for q, pred in pairs}
            self.assertEqual(len(unions), 1, state)

    def test_mixed_union_branches_are_reported(self):
        t = default_trellis4()
        bad = replace(t, subset=((Subset.D0, Subset.D1),) + t.subset[1:])
        self.assertIn('branches of state 0 span both unions', validate(bad))

    def test_incoming_branch_count_is_reported(self):
        t = default_trellis4()
        bad = replace(t, next_state=((0, 0),) + t.next_state[1:])
        self.assertTrue(any('incoming-branch count' in v for v in validate(bad)))
        with self.assertRaises(TrellisError):
            viterbi_quantize([0.0], build_codebook(2), bad)

    def test_branch_of(self):
        t = default_trellis4()
        self.assertEqual(t.branch_of(1, Subset.D2), 0)
        self.assertEqual(t.branch_of(1, Subset.D0), 1)
        with self.assertRaises(PathConsistencyError):
            t.branch_of(1, Subset.D1)

    def test_get_trellis(self):
        self.assertEqual(get_trellis('ungerboeck4').name, 'ungerboeck4')
        with self.assertRaises(TrellisError):
            get_trellis('eight-state')


class ViterbiTests(SimpleTestCase):

    def setUp(self):
        self.cb = build_codebook(2)
        self.t = default_trellis4()

    def test_codeword_sequence_on_self_loop(self):
        c1 = self.cb.points[0]
        qs = viterbi_quantize([c1, c1, c1], self.cb, self.t)
        self.assertEqual(qs.distortion, 0.0)
        self.assertEqual(qs.initial_state, 0)
        np.testing.assert_array_equal(qs.branch_bits, [0, 0, 0])
        np.testing.assert_array_equal(reconstruct(qs, self.cb, self.t), [c1, c1, c1])

    def test_single_symbol(self):
        qs = viterbi_quantize([0.0], self.cb, self.t)
        self.assertEqual(qs.distortion, 0.015625)
        # state 0 offers D0 (c=0.125) on q=0; smaller state wins the tie
        self.assertEqual(qs.initial_state, 0)
        self.assertEqual(qs.codeword_ids.tolist(), [4])

    def test_matches_brute_force(self):
        rng = np.random.default_rng(5)
        for trellis in (self.t, ungerboeck4_trellis()):
            for _ in range(100):
                cb = build_codebook(int(rng.integers(1, 3)))
                seq = rng.uniform(-1.0, 1.0, size=8)
                qs = viterbi_quantize(seq, cb, trellis)
                optimum, _ = brute_force_tcq(seq, cb, trellis)
                self.assertEqual(qs.distortion, optimum)

    def test_distortion_is_realized_squared_error(self):
        seq = np.random.default_rng(8).uniform(-1.0, 1.0, size=500)
        qs = viterbi_quantize(seq, self.cb, self.t)
        recon = reconstruct(qs, self.cb, self.t)
        self.assertAlmostEqual(qs.distortion, float(np.sum((seq - recon) ** 2)), places=10)
        check_path(qs, self.cb, self.t)

    def test_not_worse_than_greedy(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            seq = rng.uniform(-1.2, 1.2, size=int(rng.integers(1, 40)))
            viterbi = viterbi_quantize(seq, self.cb, self.t)
            greedy = greedy_quantize(seq, self.cb, self.t)
            check_path(greedy, self.cb, self.t)
            self.assertLessEqual(viterbi.distortion, greedy.distortion + 1e-12)

    def test_requantizing_a_reconstruction_is_lossless(self):
        seq = np.random.default_rng(10).uniform(-1.0, 1.0, size=300)
        qs = viterbi_quantize(seq, self.cb, self.t)
        again = viterbi_quantize(reconstruct(qs, self.cb, self.t), self.cb, self.t)
        self.assertEqual(again.distortion, 0.0)
        np.testing.assert_array_equal(again.codeword_ids, qs.codeword_ids)

    def test_rejects_empty_and_non_finite(self):
        with self.assertRaises(TrellisError):
            viterbi_quantize([], self.cb, self.t)
        with self.assertRaises(TrellisError):
            viterbi_quantize([0.0, np.nan], self.cb, self.t)


class BatchTests(SimpleTestCase):

    def setUp(self):
        self.cb = build_codebook(4)
        self.t = default_trellis4()

    def test_identical_rows_give_identical_paths(self):
        row = np.random.default_rng(1).uniform(-1.0, 1.0, size=64)
        first, second = quantize_batch(np.stack([row, row]), self.cb, self.t)
        self.assertEqual(first, second)
        self.assertEqual(first.distortion, second.distortion)

    def test_batch_matches_sequential(self):
        rows = np.random.default_rng(2).uniform(-1.0, 1.0, size=(37, 50))
        expected = [viterbi_quantize(row, self.cb, self.t) for row in rows]
        for workers in (1, 4):
            batch = quantize_batch(rows, self.cb, self.t, workers=workers, chunk_rows=8)
            self.assertEqual(batch, expected)
            self.assertEqual([qs.distortion for qs in batch], [qs.distortion for qs in expected])

    def test_beats_scalar_quantizer(self):
        rows = np.random.default_rng(3).uniform(-1.0, 1.0, size=(64, 1024))
        batch = quantize_batch(rows, self.cb, self.t)
        tcq_mse = sum(qs.distortion for qs in batch) / rows.size
        _, sq_values = build_scalar_quantizer(4).quantize_array(rows)
        self.assertLess(tcq_mse, np.mean((rows - sq_values) ** 2))

    def test_rejects_ragged_rows(self):
        with self.assertRaises(TrellisError):
            quantize_batch([[0.1, 0.2], [0.3]], self.cb, self.t)
        with self.assertRaises(TrellisError):
            quantize_batch(np.zeros((0, 4)), self.cb, self.t)


class PathTests(SimpleTestCase):

    def setUp(self):
        self.cb = build_codebook(2)
        self.t = default_trellis4()

    def test_reconstruct_hand_built_path(self):
        qs = QuantizedSeq(0, [2], [1])
        np.testing.assert_array_equal(reconstruct(qs, self.cb, self.t), [-0.375])

    def test_inconsistent_path_is_rejected(self):
        with self.assertRaises(PathConsistencyError):
            reconstruct(QuantizedSeq(0, [1], [0]), self.cb, self.t)
        with self.assertRaises(PathConsistencyError):
            reconstruct(QuantizedSeq(4, [0], [0]), self.cb, self.t)

    def test_state_replay(self):
        qs = QuantizedSeq(1, [0, 0, 0, 0], [1, 0, 0, 1])
        # 1 -> 3 -> 2 -> 0 -> 1
        np.testing.assert_array_equal(trellis_states(qs, self.t), [1, 3, 2, 0])

    def test_equality_ignores_distortion(self):
        a = QuantizedSeq(0, [0, 4], [0, 0], 0.5)
        self.assertEqual(a, QuantizedSeq(0, [0, 4], [0, 0]))
        self.assertNotEqual(a, QuantizedSeq(2, [0, 4], [0, 0]))
