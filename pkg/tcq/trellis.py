"""
4-state trellis definition, Viterbi minimum-distortion search, and
reconstruction from the chosen path.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from tcq.codebook import Subset, Union
from tcq.exceptions import PathConsistencyError, TrellisError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrellisSpec:
    """
    State table of a shift-register trellis.

    Attributes:
        next_state: next_state[s][q]
        subset: subset[s][q], the sub-quantizer on branch q leaving state s
        union_of: union_of[s], the union quantizer reachable from state s
    """
    name: str
    num_states: int
    next_state: tuple
    subset: tuple
    union_of: tuple

    @property
    def state_bits(self):
        return self.num_states.bit_length() - 1

    def incoming(self):
        """
        Incoming branches per state, ordered by (q, predecessor).

        Returns:
            dict: {state: [(q, predecessor), ...]}
        """
        branches = {s: [] for s in range(self.num_states)}
        for s in range(self.num_states):
            for q in (0, 1):
                target = self.next_state[s][q]
                if target in branches:
                    branches[target].append((q, s))
        return {s: sorted(pairs) for s, pairs in branches.items()}

    def branch_of(self, state, subset):
        """Branch bit q leaving `state` whose sub-quantizer is `subset`"""
        for q in (0, 1):
            if self.subset[state][q] == subset:
                return q
        raise PathConsistencyError(f'state {state} has no branch for subset {Subset(subset).name}')


def _shift_register(num_states):
    return tuple(tuple((s * 2 + q) % num_states for q in (0, 1)) for s in range(num_states))


def default_trellis4():
    """Fixed 4-state table; state 1 (binary 01) offers only D0 or D2"""
    return TrellisSpec(
        name='default4',
        num_states=4,
        next_state=_shift_register(4),
        subset=(
            (Subset.D0, Subset.D2),
            (Subset.D2, Subset.D0),
            (Subset.D1, Subset.D3),
            (Subset.D3, Subset.D1),
        ),
        union_of=(Union.A0, Union.A0, Union.A1, Union.A1),
    )


def ungerboeck4_trellis():
    """
    Classical 4-state amplitude-modulation trellis: both branches leaving a
    state and both branches entering a state belong to one union quantizer.
    """
    return TrellisSpec(
        name='ungerboeck4',
        num_states=4,
        next_state=_shift_register(4),
        subset=(
            (Subset.D0, Subset.D2),
            (Subset.D1, Subset.D3),
            (Subset.D2, Subset.D0),
            (Subset.D3, Subset.D1),
        ),
        union_of=(Union.A0, Union.A1, Union.A0, Union.A1),
    )


TRELLISES = {
    'default4': default_trellis4,
    'ungerboeck4': ungerboeck4_trellis,
}


def get_trellis(name):
    try:
        return TRELLISES[name]()
    except KeyError:
        raise TrellisError(f"unknown trellis '{name}', expected one of {sorted(TRELLISES)}") from None


def validate(trellis):
    """
    Check every TrellisSpec invariant.

    Returns:
        list: violation messages, empty when the table is valid
    """
    violations = []
    n = trellis.num_states

    if n != 4:
        violations.append(f'num_states is {n}, expected 4')
    if len(trellis.next_state) != n or len(trellis.subset) != n or len(trellis.union_of) != n:
        violations.append('table sizes do not match num_states')
        return violations

    for s in range(n):
        for q in (0, 1):
            target = trellis.next_state[s][q]
            if target != (s * 2 + q) % n:
                violations.append(f'next_state({s},{q}) is {target}, shift register gives {(s * 2 + q) % n}')
            if trellis.subset[s][q] not in range(4):
                violations.append(f'subset({s},{q}) is not a sub-quantizer label')

        first, second = trellis.subset[s]
        if first == second:
            violations.append(f'branches of state {s} share subset {first}')
        if first in range(4) and second in range(4):
            unions = {first % 2, second % 2}
            if len(unions) > 1:
                violations.append(f'branches of state {s} span both unions')
            elif unions != {int(trellis.union_of[s])}:
                violations.append(f'branches of state {s} are not in union_of[{s}]')

    for s, pairs in trellis.incoming().items():
        if len(pairs) != 2:
            violations.append(f'incoming-branch count of state {s} is {len(pairs)}, expected 2')

    return violations


def _require_valid(trellis):
    violations = validate(trellis)
    if violations:
        raise TrellisError(f"trellis '{trellis.name}' is invalid: " + '; '.join(violations))


@dataclass(eq=False)
class QuantizedSeq:
    """
    Output of the trellis search.

    Equality compares the path (initial state, codewords, branch bits);
    distortion is a measurement against the source and is None after decoding.
    """
    initial_state: int
    codeword_ids: np.ndarray
    branch_bits: np.ndarray
    distortion: Optional[float] = None

    def __post_init__(self):
        self.codeword_ids = np.asarray(self.codeword_ids, dtype=np.int64)
        self.branch_bits = np.asarray(self.branch_bits, dtype=np.uint8)

    def __len__(self):
        return len(self.codeword_ids)

    def __eq__(self, other):
        if not isinstance(other, QuantizedSeq):
            return NotImplemented
        return (
            self.initial_state == other.initial_state
            and np.array_equal(self.codeword_ids, other.codeword_ids)
            and np.array_equal(self.branch_bits, other.branch_bits)
        )


def trellis_states(qs, trellis):
    """State occupied before each symbol, replayed from the initial state"""
    m = trellis.state_bits
    seed = [(qs.initial_state >> (m - 1 - i)) & 1 for i in range(m)]
    history = np.concatenate([np.asarray(seed, dtype=np.int64), qs.branch_bits.astype(np.int64)])
    n = len(qs.branch_bits)
    states = np.zeros(n, dtype=np.int64)
    for i in range(m):
        states = states * 2 + history[i:i + n]
    return states


def check_path(qs, codebook, trellis):
    """Raise PathConsistencyError unless every codeword lies in its branch's subset"""
    n = len(qs.codeword_ids)
    if n == 0:
        raise PathConsistencyError('quantized sequence is empty')
    if len(qs.branch_bits) != n:
        raise PathConsistencyError(f'{n} codewords but {len(qs.branch_bits)} branch bits')
    if not 0 <= qs.initial_state < trellis.num_states:
        raise PathConsistencyError(f'initial state {qs.initial_state} out of range')
    if np.any(qs.branch_bits > 1):
        raise PathConsistencyError('branch bits must be 0 or 1')
    if qs.codeword_ids.min() < 0 or qs.codeword_ids.max() >= codebook.size:
        raise PathConsistencyError(f'codeword ids must lie in [0, {codebook.size})')

    states = trellis_states(qs, trellis)
    expected = np.asarray(trellis.subset, dtype=np.int64)[states, qs.branch_bits]
    mismatch = np.flatnonzero(codebook.subset_of[qs.codeword_ids] != expected)
    if mismatch.size:
        t = int(mismatch[0])
        raise PathConsistencyError(
            f'symbol {t}: codeword {qs.codeword_ids[t]} is not in subset '
            f'{Subset(int(expected[t])).name} of state {states[t]} branch {qs.branch_bits[t]}'
        )
    return states


def _viterbi_rows(rows, codebook, trellis):
    """Viterbi search on every row of a (B, N) float64 matrix at once"""
    batch, n = rows.shape
    num_states = trellis.num_states

    incoming = trellis.incoming()
    cand_prev = np.array([[s for _, s in incoming[t]] for t in range(num_states)])
    cand_q = np.array([[q for q, _ in incoming[t]] for t in range(num_states)])
    branch_subset = np.asarray(trellis.subset, dtype=np.int64)
    cand_subset = branch_subset[cand_prev, cand_q]

    dist = np.stack([codebook.nearest_in_subset_array(rows, k)[1] for k in range(4)], axis=-1)

    cost = np.zeros((batch, num_states))
    survivors = np.empty((batch, n, num_states), dtype=np.uint8)
    for t in range(n):
        # Each node keeps only its cheapest incoming branch
        cand_cost = cost[:, cand_prev] + dist[:, t, :][:, cand_subset]
        choose_second = cand_cost[..., 1] < cand_cost[..., 0]
        survivors[:, t, :] = choose_second
        cost = np.where(choose_second, cand_cost[..., 1], cand_cost[..., 0])

    rows_idx = np.arange(batch)
    state = np.argmin(cost, axis=1)
    distortion = cost[rows_idx, state]

    branch_bits = np.empty((batch, n), dtype=np.uint8)
    subsets = np.empty((batch, n), dtype=np.int64)
    for t in range(n - 1, -1, -1):
        choice = survivors[rows_idx, t, state]
        branch_bits[:, t] = cand_q[state, choice]
        subsets[:, t] = cand_subset[state, choice]
        state = cand_prev[state, choice]

    codeword_ids = np.empty((batch, n), dtype=np.int64)
    for k in range(4):
        mask = subsets == k
        if mask.any():
            codeword_ids[mask] = codebook.nearest_in_subset_array(rows[mask], k)[0]

    return [
        QuantizedSeq(int(state[b]), codeword_ids[b], branch_bits[b], float(distortion[b]))
        for b in range(batch)
    ]


def _as_finite_matrix(rows):
    try:
        matrix = np.asarray(rows, dtype=np.float64)
    except ValueError as e:
        raise TrellisError(f'rows must form a rectangular real matrix: {e}') from None
    if matrix.ndim != 2 or matrix.shape[0] == 0 or matrix.shape[1] == 0:
        raise TrellisError(f'expected a nonempty 2-D matrix, got shape {matrix.shape}')
    if not np.all(np.isfinite(matrix)):
        raise TrellisError('input contains non-finite values')
    return matrix


def viterbi_quantize(seq, codebook, trellis):
    """
    Minimum squared-error path through the trellis for one sequence.

    All initial states start at cost 0; survivor ties keep the branch with the
    smaller (q, predecessor) and final-state ties the smaller state id.
    """
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 1 or seq.size == 0:
        raise TrellisError('viterbi_quantize needs a nonempty 1-D sequence')
    _require_valid(trellis)
    return _viterbi_rows(_as_finite_matrix(seq[np.newaxis, :]), codebook, trellis)[0]


def quantize_batch(rows, codebook, trellis, workers=1, chunk_rows=64):
    """
    Quantize each row of a BC x HW matrix independently.

    Rows are split into chunks fanned out to `workers` threads; results come
    back in row order and match viterbi_quantize row by row.
    """
    matrix = _as_finite_matrix(rows)
    _require_valid(trellis)

    chunks = [matrix[i:i + chunk_rows] for i in range(0, matrix.shape[0], chunk_rows)]
    logger.debug('Quantizing %d rows of %d symbols in %d chunks (%d workers)',
                 matrix.shape[0], matrix.shape[1], len(chunks), workers)

    if workers <= 1 or len(chunks) == 1:
        parts = [_viterbi_rows(chunk, codebook, trellis) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda chunk: _viterbi_rows(chunk, codebook, trellis), chunks))

    return [qs for part in parts for qs in part]


def greedy_quantize(seq, codebook, trellis):
    """
    Symbol-by-symbol walk taking the cheapest branch (ties to q=0), run from
    every initial state; the cheapest walk wins, ties to the smaller state.
    """
    seq = np.asarray(seq, dtype=np.float64)
    if seq.ndim != 1 or seq.size == 0:
        raise TrellisError('greedy_quantize needs a nonempty 1-D sequence')

    best = None
    for initial in range(trellis.num_states):
        state, total = initial, 0.0
        ids, bits = [], []
        for z in seq:
            options = [codebook.nearest_in_subset_array(z, trellis.subset[state][q]) for q in (0, 1)]
            q = 1 if options[1][1] < options[0][1] else 0
            ids.append(int(options[q][0]))
            bits.append(q)
            total += float(options[q][1])
            state = trellis.next_state[state][q]
        if best is None or total < best.distortion:
            best = QuantizedSeq(initial, ids, bits, total)
    return best


def reconstruct(qs, codebook, trellis):
    """Codeword values along a path-consistent QuantizedSeq"""
    check_path(qs, codebook, trellis)
    return codebook.points[qs.codeword_ids].copy()
