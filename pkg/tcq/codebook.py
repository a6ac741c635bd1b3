"""
Uniform TCQ codebook, its four-way subset partition, the two union
quantizers, and the midrise scalar-quantizer baseline.

Indices are 0-based: point index j here is c_(j+1) in the usual notation.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from tcq.exceptions import CodebookError

logger = logging.getLogger(__name__)

MAX_RATE_BITS = 16


class Subset(IntEnum):
    """Sub-quantizers; point j belongs to D_(j mod 4)"""
    D0 = 0
    D1 = 1
    D2 = 2
    D3 = 3

    @property
    def union(self):
        return Union(self.value % 2)


class Union(IntEnum):
    """A0 = D0 ∪ D2 (even indices), A1 = D1 ∪ D3 (odd indices)"""
    A0 = 0
    A1 = 1


def _validate_bounds(rate_bits, v_min, v_max, max_rate=MAX_RATE_BITS):
    if isinstance(rate_bits, bool) or not isinstance(rate_bits, (int, np.integer)):
        raise CodebookError(f'rate_bits must be an integer, got {rate_bits!r}')
    if rate_bits < 1 or rate_bits > max_rate:
        raise CodebookError(f'rate_bits must be in [1, {max_rate}], got {rate_bits}')
    if not (math.isfinite(v_min) and math.isfinite(v_max)):
        raise CodebookError(f'signal bounds must be finite, got [{v_min}, {v_max}]')
    if v_min >= v_max:
        raise CodebookError(f'v_min must be below v_max, got [{v_min}, {v_max}]')


def _nearest_on_grid(z, points, offset, stride):
    """
    Nearest member of the uniform grid points[offset::stride] to z.

    Constant time per value: the candidate pair around z is found by
    arithmetic on the grid, then clamped to the grid's extremes. Ties go to
    the smaller index.

    Returns:
        tuple: (global indices, squared errors), both shaped like z
    """
    z = np.asarray(z, dtype=np.float64)
    count = len(range(offset, len(points), stride))
    first = points[offset]
    spacing = points[offset + stride] - first if count > 1 else 1.0

    k = np.clip(np.floor((z - first) / spacing), 0, count - 1).astype(np.int64)
    k_next = np.minimum(k + 1, count - 1)

    lower = offset + k * stride
    upper = offset + k_next * stride
    d_lower = (z - points[lower]) ** 2
    d_upper = (z - points[upper]) ** 2

    take_upper = d_upper < d_lower
    return np.where(take_upper, upper, lower), np.where(take_upper, d_upper, d_lower)


@dataclass(frozen=True)
class Codebook:
    """
    2^(R+1) uniformly spaced reconstruction points over [v_min, v_max]

    Attributes:
        rate_bits: R, bits per symbol
        step: Δ = (v_max - v_min) / 2^(R+1)
        points: ascending reconstruction values (read-only)
        subset_of: subset label of every point (read-only)
    """
    rate_bits: int
    v_min: float
    v_max: float
    step: float = field(init=False)
    points: np.ndarray = field(init=False, repr=False, compare=False)
    subset_of: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _validate_bounds(self.rate_bits, self.v_min, self.v_max)
        size = 2 ** (self.rate_bits + 1)
        step = (self.v_max - self.v_min) / size

        points = self.v_min + step / 2 + np.arange(size) * step
        points.setflags(write=False)
        subset_of = np.arange(size) % 4
        subset_of.setflags(write=False)

        object.__setattr__(self, 'step', step)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'subset_of', subset_of)

    @property
    def size(self):
        """L, the number of reconstruction points"""
        return len(self.points)

    @property
    def subset_size(self):
        return self.size // 4

    @property
    def union_size(self):
        return self.size // 2

    def subset_members(self, subset):
        return np.arange(int(subset), self.size, 4)

    def union_members(self, union):
        return np.arange(int(union), self.size, 2)

    def index_of(self, value):
        """Exact inverse of points[j]; raises if value is not a reconstruction point"""
        j = int(round((value - self.points[0]) / self.step))
        if not 0 <= j < self.size or self.points[j] != value:
            raise CodebookError(f'{value!r} is not a reconstruction point of this codebook')
        return j

    def subset_rank(self, j):
        """0-based ascending rank of point j (or an id array) within its subset"""
        return j // 4

    def union_rank(self, j):
        """0-based ascending rank of point j (or an id array) within its union quantizer"""
        return j // 2

    def nearest_in_subset_array(self, z, subset):
        return _nearest_on_grid(z, self.points, int(subset), 4)

    def nearest_in_union_array(self, z, union):
        return _nearest_on_grid(z, self.points, int(union), 2)


def build_codebook(rate_bits, v_min=-1.0, v_max=1.0):
    codebook = Codebook(rate_bits, float(v_min), float(v_max))
    logger.debug('Built codebook R=%d over [%g, %g], step %g', rate_bits, v_min, v_max, codebook.step)
    return codebook


def nearest_in_subset(z, codebook, subset):
    """
    Nearest point of one sub-quantizer to z

    Returns:
        tuple: (j, dist) with dist = |z - c_j|^2
    """
    j, dist = codebook.nearest_in_subset_array(z, subset)
    return int(j), float(dist)


def nearest_in_union(z, codebook, union):
    j, dist = codebook.nearest_in_union_array(z, union)
    return int(j), float(dist)


@dataclass(frozen=True)
class ScalarQuantizer:
    """Midrise uniform quantizer with 2^R levels over [v_min, v_max]"""
    rate_bits: int
    v_min: float
    v_max: float
    step: float = field(init=False)
    levels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        _validate_bounds(self.rate_bits, self.v_min, self.v_max)
        count = 2 ** self.rate_bits
        step = (self.v_max - self.v_min) / count
        levels = self.v_min + step / 2 + np.arange(count) * step
        levels.setflags(write=False)
        object.__setattr__(self, 'step', step)
        object.__setattr__(self, 'levels', levels)

    def quantize_array(self, z):
        """Vectorized scalar_quantize: (indices, values)"""
        k, _ = _nearest_on_grid(z, self.levels, 0, 1)
        return k, self.levels[k]


def build_scalar_quantizer(rate_bits, v_min=-1.0, v_max=1.0):
    return ScalarQuantizer(rate_bits, float(v_min), float(v_max))


def scalar_quantize(z, quantizer):
    """Nearest midrise level to z, ties toward the smaller index: (k, value)"""
    k, value = quantizer.quantize_array(z)
    return int(k), float(value)
