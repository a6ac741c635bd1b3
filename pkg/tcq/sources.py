"""
Benchmark inputs: seeded synthetic sources and tensor/image files.

raw_f32 layout (little-endian):

    magic 'TNSR' | C u32 | H u32 | W u32 | C*H*W float32 values, C-order
"""
import logging
import math
import re
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from tcq.entropy import TensorShape
from tcq.exceptions import SourceSpecError, TensorFormatError

logger = logging.getLogger(__name__)

SOURCE_KINDS = ('uniform', 'gaussian', 'laplacian', 'file')
TENSOR_FORMATS = ('raw_f32', 'pgm')

TENSOR_MAGIC = b'TNSR'
TENSOR_HEADER_FORMAT = '<4sIII'
TENSOR_HEADER_SIZE = struct.calcsize(TENSOR_HEADER_FORMAT)

DEFAULT_SCALES = {'gaussian': 0.5, 'laplacian': 0.25}

_PGM_HEADER = re.compile(rb'^P5(?:\s+|#[^\n]*\n)+(\d+)(?:\s+|#[^\n]*\n)+(\d+)(?:\s+|#[^\n]*\n)+(\d+)\s')


@dataclass(frozen=True)
class SourceSpec:
    """
    Where benchmark samples come from.

    Synthetic kinds draw `samples` values as samples/seqlen rows of length
    seqlen; gaussian and laplacian draws are clipped to [v_min, v_max]. The
    file kind reads `path` and uses one row per channel.
    """
    kind: str
    samples: int = 0
    seqlen: int = 4096
    seed: int = 7
    v_min: float = -1.0
    v_max: float = 1.0
    scale: Optional[float] = None
    path: Optional[str] = None
    format: str = 'raw_f32'

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise SourceSpecError(f"source kind must be one of {SOURCE_KINDS}, got '{self.kind}'")
        if not (math.isfinite(self.v_min) and math.isfinite(self.v_max)) or self.v_min >= self.v_max:
            raise SourceSpecError(f'bounds must be finite with v_min < v_max, got [{self.v_min}, {self.v_max}]')
        if not 0 <= self.seed < 2 ** 64:
            raise SourceSpecError(f'seed must fit in 64 bits, got {self.seed}')

        if self.kind == 'file':
            if not self.path:
                raise SourceSpecError('file sources need a path')
            if self.format not in TENSOR_FORMATS:
                raise SourceSpecError(f"format must be one of {TENSOR_FORMATS}, got '{self.format}'")
            return

        if self.seqlen < 1 or self.samples < 1:
            raise SourceSpecError(f'samples and seqlen must be positive, got {self.samples} and {self.seqlen}')
        if self.samples % self.seqlen:
            raise SourceSpecError(f'samples ({self.samples}) must be divisible by seqlen ({self.seqlen})')
        if self.scale is not None and not (math.isfinite(self.scale) and self.scale > 0):
            raise SourceSpecError(f'scale must be positive, got {self.scale}')

    @property
    def effective_scale(self):
        return self.scale if self.scale is not None else DEFAULT_SCALES.get(self.kind)


def generate_source(spec):
    """Sample matrix for a SourceSpec: (samples/seqlen, seqlen), or one row per channel for files"""
    return load_source(spec)[0]


def load_source(spec):
    """
    Returns:
        tuple: (matrix, TensorShape) where the shape lays the rows out as an index plane
    """
    if spec.kind == 'file':
        return load_tensor(spec.path, spec.format)

    rng = np.random.default_rng(spec.seed)
    rows = spec.samples // spec.seqlen
    size = (rows, spec.seqlen)
    if spec.kind == 'uniform':
        matrix = rng.uniform(spec.v_min, spec.v_max, size=size)
    else:
        centre = (spec.v_min + spec.v_max) / 2
        draw = rng.normal if spec.kind == 'gaussian' else rng.laplace
        matrix = np.clip(draw(centre, spec.effective_scale, size=size), spec.v_min, spec.v_max)

    logger.debug('Generated %s source: %d rows x %d, seed %d', spec.kind, rows, spec.seqlen, spec.seed)
    return matrix, TensorShape(1, rows, spec.seqlen)


def _read_bytes(path):
    try:
        with open(path, 'rb') as f:
            return f.read()
    except OSError as e:
        raise TensorFormatError(f'cannot read {path}: {e.strerror}') from None


def _parse_pgm(data, path):
    match = _PGM_HEADER.match(data)
    if match is None:
        raise TensorFormatError(f'{path}: not a binary (P5) PGM file')
    width, height, maxval = (int(g) for g in match.groups())
    if width < 1 or height < 1:
        raise TensorFormatError(f'{path}: bad PGM dimensions {width}x{height}')
    if not 0 < maxval <= 255:
        raise TensorFormatError(f'{path}: only 8-bit PGM is supported, maxval is {maxval}')

    expected = width * height
    pixels = data[match.end():]
    if len(pixels) < expected:
        raise TensorFormatError(f'{path}: truncated pixel data, expected {expected} bytes, got {len(pixels)}')

    values = np.frombuffer(pixels, dtype=np.uint8, count=expected).astype(np.float64)
    return (2.0 * values / 255.0 - 1.0).reshape(1, expected), TensorShape(1, height, width)


def _parse_raw_f32(data, path):
    if len(data) < TENSOR_HEADER_SIZE:
        raise TensorFormatError(
            f'{path}: truncated header, expected {TENSOR_HEADER_SIZE} bytes, got {len(data)}'
        )
    magic, c, h, w = struct.unpack_from(TENSOR_HEADER_FORMAT, data)
    if magic != TENSOR_MAGIC:
        raise TensorFormatError(f'{path}: bad magic {magic!r}, expected {TENSOR_MAGIC!r}')
    if min(c, h, w) < 1:
        raise TensorFormatError(f'{path}: bad tensor shape {c}x{h}x{w}')

    expected = 4 * c * h * w
    body = len(data) - TENSOR_HEADER_SIZE
    if body < expected:
        raise TensorFormatError(f'{path}: truncated tensor data, expected {expected} bytes, got {body}')
    values = np.frombuffer(data, dtype='<f4', count=c * h * w, offset=TENSOR_HEADER_SIZE)
    return values.astype(np.float64).reshape(c, h * w), TensorShape(c, h, w)


def load_tensor(path, format='raw_f32'):
    """
    Read a tensor file as a real matrix with one row per channel.

    PGM (binary P5, 8-bit) pixels map to 2v/255 - 1, giving a single row.

    Returns:
        tuple: (matrix, TensorShape)
    """
    if format not in TENSOR_FORMATS:
        raise TensorFormatError(f"format must be one of {TENSOR_FORMATS}, got '{format}'")
    data = _read_bytes(path)
    matrix, shape = _parse_pgm(data, path) if format == 'pgm' else _parse_raw_f32(data, path)
    logger.debug('Loaded %s tensor %s with shape %dx%dx%d', format, path, shape.channels, shape.height, shape.width)
    return matrix, shape


def write_tensor(path, values, shape):
    """Write values (any layout holding C*H*W numbers, C-order) as a raw_f32 file"""
    values = np.asarray(values, dtype='<f4').ravel()
    if values.size != shape.size:
        raise TensorFormatError(f'{values.size} values do not fill shape {shape.channels}x{shape.height}x{shape.width}')
    header = struct.pack(TENSOR_HEADER_FORMAT, TENSOR_MAGIC, shape.channels, shape.height, shape.width)
    try:
        with open(path, 'wb') as f:
            f.write(header + values.tobytes())
    except OSError as e:
        raise TensorFormatError(f'cannot write {path}: {e.strerror}') from None
