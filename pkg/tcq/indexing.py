"""
Bitstream serialization of a QuantizedSeq under indexing method I
(branch bit + rank within the subset) and method II (rank within the
current state's union quantizer).

Layout of a .tcq file (big-endian, MSB-first bit packing, zero padding):

    magic 'TCQ1' | version u8 | R u8 | method u8 | num_symbols u32 | initial_state u8 | payload
"""
import logging
import struct
from dataclasses import dataclass

import numpy as np

from tcq.exceptions import BitstreamError
from tcq.trellis import QuantizedSeq, check_path, trellis_states

logger = logging.getLogger(__name__)

MAGIC = b'TCQ1'
VERSION = 1
HEADER_FORMAT = '>4sBBBIB'
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)

METHOD_I = 1
METHOD_II = 2
METHOD_ENTROPY = 3
METHODS = (METHOD_I, METHOD_II, METHOD_ENTROPY)


@dataclass(frozen=True)
class BitstreamHeader:
    rate_bits: int
    method: int
    num_symbols: int
    initial_state: int
    version: int = VERSION

    def pack(self):
        return struct.pack(HEADER_FORMAT, MAGIC, self.version, self.rate_bits,
                           self.method, self.num_symbols, self.initial_state)

    @classmethod
    def unpack(cls, data):
        if len(data) < HEADER_SIZE:
            raise BitstreamError(f'truncated header: expected {HEADER_SIZE} bytes, got {len(data)}')
        magic, version, rate_bits, method, num_symbols, initial_state = struct.unpack_from(HEADER_FORMAT, data)
        if magic != MAGIC:
            raise BitstreamError(f'bad magic {magic!r}, expected {MAGIC!r}')
        if version != VERSION:
            raise BitstreamError(f'unsupported version {version}, expected {VERSION}')
        if method not in METHODS:
            raise BitstreamError(f'unknown method {method}')
        return cls(rate_bits, method, num_symbols, initial_state, version)


@dataclass(frozen=True)
class Bitstream:
    header: BitstreamHeader
    payload: bytes

    @property
    def payload_bits(self):
        return self.header.num_symbols * self.header.rate_bits

    def to_bytes(self):
        return self.header.pack() + self.payload

    @classmethod
    def from_bytes(cls, data):
        header = BitstreamHeader.unpack(data)
        return cls(header, bytes(data[HEADER_SIZE:]))


def write_bitstream(path, bitstream):
    with open(path, 'wb') as f:
        f.write(bitstream.to_bytes())


def read_bitstream(path):
    with open(path, 'rb') as f:
        return Bitstream.from_bytes(f.read())


def pack_codes(codes, width):
    """Pack each code as `width` bits, MSB first, zero-padded to a byte boundary"""
    codes = np.asarray(codes, dtype=np.int64)
    if width == 0:
        return b''
    shifts = np.arange(width - 1, -1, -1)
    bits = ((codes[:, np.newaxis] >> shifts) & 1).astype(np.uint8)
    return np.packbits(bits.ravel()).tobytes()


def unpack_codes(payload, count, width):
    expected = (count * width + 7) // 8
    if len(payload) < expected:
        raise BitstreamError(f'truncated payload: expected {expected} bytes, got {len(payload)}')
    if width == 0:
        return np.zeros(count, dtype=np.int64)
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8, count=expected))
    bits = bits[:count * width].reshape(count, width).astype(np.int64)
    return bits @ (1 << np.arange(width - 1, -1, -1))


def index_plane_method1(qs, codebook, trellis):
    """Per-symbol method-I code: q in the top bit, subset rank in the low R-1 bits"""
    check_path(qs, codebook, trellis)
    r = codebook.rate_bits
    ranks = codebook.subset_rank(qs.codeword_ids)
    return (qs.branch_bits.astype(np.int64) << (r - 1)) | ranks


def index_plane_method2(qs, codebook, trellis):
    """
    Per-symbol method-II index: rank of the codeword within union_of(state).

    Within a fixed state the index increases with codeword value, which keeps
    neighbouring indices of a smooth feature map close together.
    """
    check_path(qs, codebook, trellis)
    return codebook.union_rank(qs.codeword_ids)


def _check_header(bitstream, codebook, method):
    header = bitstream.header
    if header.method != method:
        raise BitstreamError(f'method mismatch: stream is method {header.method}, expected {method}')
    if header.rate_bits != codebook.rate_bits:
        raise BitstreamError(f'rate mismatch: stream has R={header.rate_bits}, codebook has R={codebook.rate_bits}')
    if header.num_symbols == 0:
        raise BitstreamError('stream holds no symbols')


def _header_for(qs, codebook, method):
    return BitstreamHeader(codebook.rate_bits, method, len(qs), qs.initial_state)


def encode_method1(qs, codebook, trellis):
    codes = index_plane_method1(qs, codebook, trellis)
    return Bitstream(_header_for(qs, codebook, METHOD_I), pack_codes(codes, codebook.rate_bits))


def decode_method1(bitstream, codebook, trellis):
    _check_header(bitstream, codebook, METHOD_I)
    header = bitstream.header
    r = codebook.rate_bits
    if header.initial_state >= trellis.num_states:
        raise BitstreamError(f'initial state {header.initial_state} out of range')

    codes = unpack_codes(bitstream.payload, header.num_symbols, r)
    branch_bits = (codes >> (r - 1)).astype(np.uint8)
    ranks = codes & ((1 << (r - 1)) - 1)

    path = QuantizedSeq(header.initial_state, np.zeros(len(codes), dtype=np.int64), branch_bits)
    states = trellis_states(path, trellis)
    subsets = np.asarray(trellis.subset, dtype=np.int64)[states, branch_bits]
    path.codeword_ids = subsets + 4 * ranks
    return path


def encode_method2(qs, codebook, trellis):
    codes = index_plane_method2(qs, codebook, trellis)
    return Bitstream(_header_for(qs, codebook, METHOD_II), pack_codes(codes, codebook.rate_bits))


def decode_plane_method2(plane, initial_state, trellis):
    """
    Replay method-II indices from the initial state: the union of the current
    state turns the index into a codeword, whose subset names the branch taken.
    """
    union = [int(u) for u in trellis.union_of]
    next_state = trellis.next_state

    ids, bits = [], []
    state = initial_state
    for rank in np.asarray(plane, dtype=np.int64).tolist():
        j = 2 * rank + union[state]
        q = trellis.branch_of(state, j % 4)
        ids.append(j)
        bits.append(q)
        state = next_state[state][q]
    return QuantizedSeq(initial_state, ids, bits)


def decode_method2(bitstream, codebook, trellis):
    _check_header(bitstream, codebook, METHOD_II)
    header = bitstream.header
    if header.initial_state >= trellis.num_states:
        raise BitstreamError(f'initial state {header.initial_state} out of range')
    codes = unpack_codes(bitstream.payload, header.num_symbols, codebook.rate_bits)
    return decode_plane_method2(codes, header.initial_state, trellis)


ENCODERS = {METHOD_I: encode_method1, METHOD_II: encode_method2}
DECODERS = {METHOD_I: decode_method1, METHOD_II: decode_method2}


def encode(qs, codebook, trellis, method):
    try:
        encoder = ENCODERS[method]
    except KeyError:
        raise BitstreamError(f'indexing method must be 1 or 2, got {method}') from None
    return encoder(qs, codebook, trellis)


def decode(bitstream, codebook, trellis):
    try:
        decoder = DECODERS[bitstream.header.method]
    except KeyError:
        raise BitstreamError(f'method {bitstream.header.method} is not an indexing method') from None
    return decoder(bitstream, codebook, trellis)


def mean_abs_first_difference(plane):
    plane = np.asarray(plane, dtype=np.int64)
    if plane.size < 2:
        return 0.0
    return float(np.mean(np.abs(np.diff(plane))))


def empirical_entropy(plane):
    """Order-0 entropy of an index plane in bits per symbol"""
    counts = np.bincount(np.asarray(plane, dtype=np.int64).ravel())
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())
