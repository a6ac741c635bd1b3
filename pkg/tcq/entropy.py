"""
Adaptive arithmetic coding of index planes.

A 32-bit integer range coder with bit-level renormalization and underflow
(pending bit) handling is driven by a pluggable probability model. Planes
are coded in causal order: row by row, left to right, and all channels of a
position before the next position.

Entropy-coded container (big-endian):

    Bitstream header with method 3 | C u32 | H u32 | W u32 | model id u8 | AC payload
"""
import bisect
import logging
import struct
from abc import ABC, abstractmethod
from dataclasses import dataclass
from itertools import accumulate
from typing import ClassVar

import numpy as np

from tcq.exceptions import EntropyError, EntropyStreamError
from tcq.indexing import (
    METHOD_ENTROPY, METHOD_II, HEADER_SIZE, Bitstream, BitstreamHeader, pack_codes, unpack_codes,
)

logger = logging.getLogger(__name__)

STATE_BITS = 32
FULL_RANGE = 1 << STATE_BITS
HALF_RANGE = FULL_RANGE >> 1
QUARTER_RANGE = HALF_RANGE >> 1
STATE_MASK = FULL_RANGE - 1

MAX_TOTAL = 1 << 16
RESCALE_TOTAL = 1 << 15
MAX_ADAPTIVE_ALPHABET = 1 << 14


class ProbabilityModel(ABC):
    """
    Frequency model queried before and updated after every coded symbol.

    Every symbol keeps frequency >= 1 and the model sees symbols only in coding
    order, so encoder and decoder stay in lockstep. A desynchronized model is
    not detectable from the stream.
    """
    model_id: ClassVar[int]
    name: ClassVar[str]

    def __init__(self, alphabet_size):
        if alphabet_size < 1:
            raise EntropyError(f'alphabet size must be positive, got {alphabet_size}')
        self.alphabet_size = alphabet_size

    @abstractmethod
    def cumulative(self):
        """Cumulative frequencies, length K+1, starting at 0; the last entry is the total"""

    def update(self, symbol):
        pass


class StaticModel(ProbabilityModel):
    model_id = 1
    name = 'static'

    def __init__(self, alphabet_size, frequencies=None):
        super().__init__(alphabet_size)
        freqs = [1] * alphabet_size if frequencies is None else [int(f) for f in frequencies]
        if len(freqs) != alphabet_size:
            raise EntropyError(f'expected {alphabet_size} frequencies, got {len(freqs)}')
        if min(freqs) < 1:
            raise EntropyError('every symbol needs a frequency of at least 1')
        if sum(freqs) > MAX_TOTAL:
            raise EntropyError(f'frequency total {sum(freqs)} exceeds {MAX_TOTAL}')
        self._cum = [0, *accumulate(freqs)]

    def cumulative(self):
        return self._cum


class AdaptiveModel(ProbabilityModel):
    """Order-0 counts starting at 1, +1 per symbol, halved once the total reaches 2^15"""
    model_id = 2
    name = 'order0'

    def __init__(self, alphabet_size):
        super().__init__(alphabet_size)
        if alphabet_size > MAX_ADAPTIVE_ALPHABET:
            raise EntropyError(f'adaptive models support at most {MAX_ADAPTIVE_ALPHABET} symbols')
        self.freqs = [1] * alphabet_size
        self._cum = None

    def cumulative(self):
        if self._cum is None:
            self._cum = [0, *accumulate(self.freqs)]
        return self._cum

    def update(self, symbol):
        self.freqs[symbol] += 1
        if sum(self.freqs) >= RESCALE_TOTAL:
            self.freqs = [(f + 1) // 2 for f in self.freqs]
        self._cum = None


class NeighborContextModel(ProbabilityModel):
    """
    One adaptive table per value of the previously coded symbol. The first
    symbol is coded in context 0, as if preceded by an all-zeros plane.
    """
    model_id = 3
    name = 'neighbor'

    def __init__(self, alphabet_size):
        super().__init__(alphabet_size)
        if alphabet_size > MAX_ADAPTIVE_ALPHABET:
            raise EntropyError(f'adaptive models support at most {MAX_ADAPTIVE_ALPHABET} symbols')
        self.tables = {}
        self.context = 0

    def _table(self):
        table = self.tables.get(self.context)
        if table is None:
            table = self.tables[self.context] = AdaptiveModel(self.alphabet_size)
        return table

    def cumulative(self):
        return self._table().cumulative()

    def update(self, symbol):
        self._table().update(symbol)
        self.context = symbol


MODELS = {cls.name: cls for cls in (StaticModel, AdaptiveModel, NeighborContextModel)}
MODELS_BY_ID = {cls.model_id: cls for cls in MODELS.values()}


def make_model(name, alphabet_size):
    """Fresh model by name ('static', 'order0', 'neighbor') or numeric id"""
    cls = MODELS_BY_ID.get(name) if isinstance(name, int) else MODELS.get(name)
    if cls is None:
        raise EntropyError(f"unknown probability model {name!r}, expected one of {sorted(MODELS)}")
    return cls(alphabet_size)


class ArithmeticEncoder:
    def __init__(self):
        self.low = 0
        self.high = STATE_MASK
        self.pending = 0
        self.bits = bytearray()

    def _emit(self, bit):
        self.bits.append(bit)
        self.bits.extend([bit ^ 1] * self.pending)
        self.pending = 0

    def encode(self, symbol, model):
        cum = model.cumulative()
        if not 0 <= symbol < len(cum) - 1:
            raise EntropyError(f'symbol {symbol} outside alphabet [0, {len(cum) - 1})')
        total = cum[-1]
        span = self.high - self.low + 1
        self.high = self.low + span * cum[symbol + 1] // total - 1
        self.low = self.low + span * cum[symbol] // total

        while True:
            if self.high < HALF_RANGE:
                self._emit(0)
            elif self.low >= HALF_RANGE:
                self._emit(1)
                self.low -= HALF_RANGE
                self.high -= HALF_RANGE
            elif self.low >= QUARTER_RANGE and self.high < 3 * QUARTER_RANGE:
                self.pending += 1
                self.low -= QUARTER_RANGE
                self.high -= QUARTER_RANGE
            else:
                break
            self.low = (self.low << 1) & STATE_MASK
            self.high = ((self.high << 1) & STATE_MASK) | 1

        model.update(symbol)

    def finish(self):
        # A single 1 (plus pending underflow bits) selects a value inside [low, high]
        self._emit(1)
        return np.packbits(np.frombuffer(bytes(self.bits), dtype=np.uint8)).tobytes()


class ArithmeticDecoder:
    def __init__(self, data):
        self.bits = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8)).tolist()
        self.position = 0
        self.overrun = 0
        self.low = 0
        self.high = STATE_MASK
        self.code = 0
        for _ in range(STATE_BITS):
            self.code = (self.code << 1) | self._read_bit()

    def _read_bit(self):
        if self.position < len(self.bits):
            bit = self.bits[self.position]
            self.position += 1
            return bit
        # Past the end the stream continues with implicit zeros, at most one state width of them
        self.overrun += 1
        if self.overrun > STATE_BITS:
            raise EntropyStreamError('arithmetic-coded stream exhausted before all symbols were decoded')
        return 0

    def decode(self, model):
        cum = model.cumulative()
        total = cum[-1]
        span = self.high - self.low + 1
        value = ((self.code - self.low + 1) * total - 1) // span
        symbol = bisect.bisect_right(cum, value) - 1
        if not 0 <= symbol < len(cum) - 1:
            raise EntropyStreamError('decoded value falls outside the model range')

        self.high = self.low + span * cum[symbol + 1] // total - 1
        self.low = self.low + span * cum[symbol] // total

        while True:
            if self.high < HALF_RANGE:
                pass
            elif self.low >= HALF_RANGE:
                self.low -= HALF_RANGE
                self.high -= HALF_RANGE
                self.code -= HALF_RANGE
            elif self.low >= QUARTER_RANGE and self.high < 3 * QUARTER_RANGE:
                self.low -= QUARTER_RANGE
                self.high -= QUARTER_RANGE
                self.code -= QUARTER_RANGE
            else:
                break
            self.low = (self.low << 1) & STATE_MASK
            self.high = ((self.high << 1) & STATE_MASK) | 1
            self.code = ((self.code << 1) & STATE_MASK) | self._read_bit()

        model.update(symbol)
        return symbol


def ac_encode(symbols, model):
    """Arithmetic-code a symbol sequence; the symbol count travels out of band"""
    encoder = ArithmeticEncoder()
    for symbol in np.asarray(symbols, dtype=np.int64).tolist():
        encoder.encode(symbol, model)
    data = encoder.finish()
    logger.debug('Arithmetic-coded %d symbols into %d bytes (%s model)', len(symbols), len(data), model.name)
    return data


def ac_decode(data, num_symbols, model):
    decoder = ArithmeticDecoder(data)
    return np.array([decoder.decode(model) for _ in range(num_symbols)], dtype=np.int64)


@dataclass(frozen=True)
class TensorShape:
    channels: int
    height: int
    width: int

    def __post_init__(self):
        for name in ('channels', 'height', 'width'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise EntropyError(f'{name} must be a positive integer, got {value!r}')

    @property
    def size(self):
        return self.channels * self.height * self.width

    @classmethod
    def parse(cls, text):
        """'C,H,W' -> TensorShape"""
        try:
            c, h, w = (int(part) for part in text.split(','))
        except ValueError:
            raise EntropyError(f"shape must look like C,H,W, got '{text}'") from None
        return cls(c, h, w)


def traversal_order(shape):
    """Positions (c, i, j) in coding order: i outer, j middle, c inner"""
    return [
        (c, i, j)
        for i in range(shape.height)
        for j in range(shape.width)
        for c in range(shape.channels)
    ]


def traversal_indices(shape):
    """Coding order as flat indices into a C-order (C, H, W) array"""
    grid = np.arange(shape.size).reshape(shape.channels, shape.height, shape.width)
    return grid.transpose(1, 2, 0).ravel()


def encode_plane(plane, shape, model):
    plane = np.asarray(plane, dtype=np.int64).ravel()
    if plane.size != shape.size:
        raise EntropyError(f'plane has {plane.size} symbols, shape {shape} needs {shape.size}')
    return ac_encode(plane[traversal_indices(shape)], model)


def decode_plane(data, shape, model):
    """Inverse of encode_plane, returned as a (C, H, W) array"""
    plane = np.empty(shape.size, dtype=np.int64)
    plane[traversal_indices(shape)] = ac_decode(data, shape.size, model)
    return plane.reshape(shape.channels, shape.height, shape.width)


SHAPE_FORMAT = '>IIIB'
SHAPE_SIZE = struct.calcsize(SHAPE_FORMAT)


@dataclass(frozen=True)
class EntropyContainer:
    header: BitstreamHeader
    shape: TensorShape
    model_id: int
    payload: bytes

    def to_bytes(self):
        extra = struct.pack(SHAPE_FORMAT, self.shape.channels, self.shape.height, self.shape.width, self.model_id)
        return self.header.pack() + extra + self.payload

    @classmethod
    def from_bytes(cls, data):
        header = BitstreamHeader.unpack(data)
        if header.method != METHOD_ENTROPY:
            raise EntropyError(f'not an entropy-coded container (method {header.method})')
        if len(data) < HEADER_SIZE + SHAPE_SIZE:
            raise EntropyError(
                f'truncated container: expected at least {HEADER_SIZE + SHAPE_SIZE} bytes, got {len(data)}'
            )
        c, h, w, model_id = struct.unpack_from(SHAPE_FORMAT, data, HEADER_SIZE)
        shape = TensorShape(c, h, w)
        if shape.size != header.num_symbols:
            raise EntropyError(f'shape {c}x{h}x{w} does not match {header.num_symbols} symbols')
        if model_id not in MODELS_BY_ID:
            raise EntropyError(f'unknown model id {model_id}')
        return cls(header, shape, model_id, bytes(data[HEADER_SIZE + SHAPE_SIZE:]))


def entropy_encode_bitstream(bitstream, shape, model_name):
    """Method-II Bitstream -> entropy-coded container over the same index plane"""
    header = bitstream.header
    if header.method != METHOD_II:
        raise EntropyError(f'entropy coding needs a method-2 bitstream, got method {header.method}')
    if shape.size != header.num_symbols:
        raise EntropyError(f'shape {shape} does not match {header.num_symbols} symbols')

    plane = unpack_codes(bitstream.payload, header.num_symbols, header.rate_bits)
    model = make_model(model_name, 1 << header.rate_bits)
    payload = encode_plane(plane, shape, model)
    container_header = BitstreamHeader(header.rate_bits, METHOD_ENTROPY, header.num_symbols, header.initial_state)
    return EntropyContainer(container_header, shape, model.model_id, payload)


def entropy_decode_container(container):
    """Entropy-coded container -> the method-II Bitstream it was made from"""
    header = container.header
    model = make_model(container.model_id, 1 << header.rate_bits)
    plane = decode_plane(container.payload, container.shape, model).ravel()
    bitstream_header = BitstreamHeader(header.rate_bits, METHOD_II, header.num_symbols, header.initial_state)
    return Bitstream(bitstream_header, pack_codes(plane, header.rate_bits))


def pack_entropy_container(container):
    return container.to_bytes()


def unpack_entropy_container(data):
    return EntropyContainer.from_bytes(data)


def write_container(path, container):
    with open(path, 'wb') as f:
        f.write(pack_entropy_container(container))


def read_container(path):
    with open(path, 'rb') as f:
        return unpack_entropy_container(f.read())
