import numpy as np
from django.test import SimpleTestCase

from tcq.codebook import (
    Subset, Union, build_codebook, build_scalar_quantizer, nearest_in_subset, nearest_in_union,
    scalar_quantize,
)
from tcq.exceptions import CodebookError


class BuildCodebookTests(SimpleTestCase):

    def test_rate_one_points_and_subsets(self):
        cb = build_codebook(1, -1.0, 1.0)
        self.assertEqual(cb.step, 0.5)
        np.testing.assert_array_equal(cb.points, [-0.75, -0.25, 0.25, 0.75])
        for subset, value in zip(Subset, [-0.75, -0.25, 0.25, 0.75]):
            np.testing.assert_array_equal(cb.points[cb.subset_members(subset)], [value])

    def test_rate_two_points_subsets_and_unions(self):
        cb = build_codebook(2, -1.0, 1.0)
        self.assertEqual(cb.step, 0.25)
        np.testing.assert_array_equal(
            cb.points, [-0.875, -0.625, -0.375, -0.125, 0.125, 0.375, 0.625, 0.875]
        )
        np.testing.assert_array_equal(cb.subset_members(Subset.D0), [0, 4])
        np.testing.assert_array_equal(cb.subset_members(Subset.D2), [2, 6])
        np.testing.assert_array_equal(cb.union_members(Union.A0), [0, 2, 4, 6])
        self.assertEqual(Subset.D2.union, Union.A0)
        self.assertEqual(Subset.D3.union, Union.A1)

    def test_sizes_follow_rate(self):
        for r in range(1, 9):
            cb = build_codebook(r)
            self.assertEqual(cb.size, 2 ** (r + 1))
            self.assertEqual(cb.subset_size, 2 ** (r - 1))
            self.assertEqual(cb.union_size, 2 ** r)
            np.testing.assert_allclose(np.diff(cb.points), cb.step)
            np.testing.assert_allclose(np.diff(cb.points[cb.union_members(Union.A1)]), 2 * cb.step)

    def test_rejects_bad_parameters(self):
        for args in [(0, -1.0, 1.0), (17, -1.0, 1.0), (2, 1.0, 1.0), (2, 1.0, -1.0), (2, -np.inf, 1.0)]:
            with self.assertRaises(CodebookError):
                build_codebook(*args)

    def test_points_are_read_only(self):
        cb = build_codebook(2)
        with self.assertRaises(ValueError):
            cb.points[0] = 0.0

    def test_index_of_inverts_points(self):
        cb = build_codebook(5, -2.0, 3.0)
        for j, value in enumerate(cb.points):
            self.assertEqual(cb.index_of(value), j)
        with self.assertRaises(CodebookError):
            cb.index_of(0.3)

    def test_ranks_within_subset_and_union(self):
        cb = build_codebook(2)
        self.assertEqual(cb.subset_rank(6), 1)
        self.assertEqual(cb.union_rank(6), 3)
        np.testing.assert_array_equal(cb.subset_rank(cb.subset_members(Subset.D1)), [0, 1])
        np.testing.assert_array_equal(cb.union_rank(cb.union_members(Union.A1)), [0, 1, 2, 3])


class NearestTests(SimpleTestCase):

    def setUp(self):
        self.cb = build_codebook(2)

    def test_nearest_in_subset(self):
        self.assertEqual(nearest_in_subset(0.0, self.cb, Subset.D0), (4, 0.015625))

    def test_nearest_in_subset_clamps(self):
        j, _ = nearest_in_subset(-5.0, self.cb, Subset.D3)
        self.assertEqual(j, 3)
        self.assertEqual(self.cb.points[j], -0.125)

    def test_nearest_in_subset_tie_goes_to_smaller_index(self):
        j, dist = nearest_in_subset(-0.375, self.cb, Subset.D0)
        self.assertEqual(j, 0)
        self.assertEqual(dist, 0.25)

    def test_nearest_in_union(self):
        self.assertEqual(nearest_in_union(0.0, self.cb, Union.A0)[0], 4)
        self.assertEqual(nearest_in_union(0.0, self.cb, Union.A1)[0], 3)
        self.assertEqual(nearest_in_union(1.0, build_codebook(1), Union.A1)[0], 3)

    def test_grid_search_matches_linear_scan(self):
        rng = np.random.default_rng(11)
        for r in (1, 2, 3, 5):
            cb = build_codebook(r)
            z = rng.uniform(-1.5, 1.5, size=20000)
            groups = [(cb.nearest_in_subset_array, k, cb.subset_members(k)) for k in range(4)]
            groups += [(cb.nearest_in_union_array, u, cb.union_members(u)) for u in range(2)]
            for search, label, members in groups:
                idx, dist = search(z, label)
                scan = (z[:, np.newaxis] - cb.points[members]) ** 2
                np.testing.assert_array_equal(idx, members[np.argmin(scan, axis=1)])
                np.testing.assert_array_equal(dist, scan.min(axis=1))


class ScalarQuantizerTests(SimpleTestCase):

    def setUp(self):
        self.sq = build_scalar_quantizer(2, -1.0, 1.0)

    def test_levels_are_midrise(self):
        np.testing.assert_array_equal(self.sq.levels, [-0.75, -0.25, 0.25, 0.75])

    def test_examples(self):
        self.assertEqual(scalar_quantize(0.3, self.sq), (2, 0.25))
        self.assertEqual(scalar_quantize(-2.0, self.sq), (0, -0.75))
        self.assertEqual(scalar_quantize(0.0, self.sq), (1, -0.25))

    def test_uniform_mse_matches_step_squared_over_twelve(self):
        sq = build_scalar_quantizer(4)
        z = np.random.default_rng(3).uniform(-1.0, 1.0, size=10 ** 6)
        _, values = sq.quantize_array(z)
        mse = np.mean((z - values) ** 2)
        self.assertAlmostEqual(mse / (sq.step ** 2 / 12), 1.0, delta=0.01)
