"""
Reference oracles and randomized checks for the quantizer, the bitstream
codecs, the soft-quantization derivative, and the arithmetic coder.

Every check returns a CheckResult; failing trials keep the full
counterexample (seed, inputs, both answers) so it can be replayed.
"""
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from tcq.codebook import build_codebook
from tcq.entropy import MODELS, ac_decode, ac_encode, make_model
from tcq.exceptions import OracleError
from tcq.indexing import METHOD_I, METHOD_II, decode, encode
from tcq.softquant import SoftQuantConfig, soft_quantize, soft_quantize_grad
from tcq.trellis import TRELLISES, QuantizedSeq, get_trellis, reconstruct, viterbi_quantize

logger = logging.getLogger(__name__)

MAX_ORACLE_LENGTH = 12
MAX_ORACLE_RATE = 3
MAX_ENUMERATION = 10 ** 7
GRADIENT_TOLERANCE = 1e-4
KINK_EXCLUSION = 1e-4


@dataclass(frozen=True)
class OracleConfig:
    """
    Attributes:
        sequence_len: N of the brute-force trials, at most 12
        max_rate: largest R drawn by the oracle trials, at most 3
        trials: trials per check
        seed: RNG seed; each check derives its own stream from it
    """
    sequence_len: int = 8
    max_rate: int = 2
    trials: int = 500
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.sequence_len <= MAX_ORACLE_LENGTH:
            raise OracleError(f'sequence_len must be in [1, {MAX_ORACLE_LENGTH}], got {self.sequence_len}')
        if not 1 <= self.max_rate <= MAX_ORACLE_RATE:
            raise OracleError(f'max_rate must be in [1, {MAX_ORACLE_RATE}], got {self.max_rate}')
        if self.trials < 1:
            raise OracleError(f'trials must be positive, got {self.trials}')
        if 4 * 2 ** self.sequence_len * self.sequence_len >= MAX_ENUMERATION:
            raise OracleError('brute-force enumeration would exceed 10^7 states per trial')

    def rng(self, stream):
        return np.random.default_rng([self.seed, stream])


@dataclass
class CheckResult:
    name: str
    passed: bool
    trials: int
    failures: list = field(default_factory=list)
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return asdict(self)


def brute_force_tcq(seq, codebook, trellis):
    """
    Exhaustive minimum-distortion search over every initial state and every
    branch-bit sequence. Ties go to the smaller initial state, then the
    smaller bit pattern read as a binary number.

    Returns:
        tuple: (minimum distortion, QuantizedSeq of one optimal path)
    """
    seq = np.asarray(seq, dtype=np.float64).ravel()
    n = seq.size
    if n == 0:
        raise OracleError('brute_force_tcq needs at least one symbol')
    if n > MAX_ORACLE_LENGTH:
        raise OracleError(f'brute_force_tcq is limited to {MAX_ORACLE_LENGTH} symbols, got {n}')

    ids = np.stack([codebook.nearest_in_subset_array(seq, k)[0] for k in range(4)], axis=-1)
    dist = np.stack([codebook.nearest_in_subset_array(seq, k)[1] for k in range(4)], axis=-1)

    patterns = np.arange(2 ** n)
    bits = ((patterns[:, np.newaxis] >> np.arange(n - 1, -1, -1)) & 1).astype(np.int64)
    next_state = np.asarray(trellis.next_state, dtype=np.int64)
    subset = np.asarray(trellis.subset, dtype=np.int64)

    best = None
    for initial in range(trellis.num_states):
        states = np.full(patterns.size, initial, dtype=np.int64)
        cost = np.zeros(patterns.size)
        subsets = np.empty((patterns.size, n), dtype=np.int64)
        for t in range(n):
            subsets[:, t] = subset[states, bits[:, t]]
            cost = cost + dist[t, subsets[:, t]]
            states = next_state[states, bits[:, t]]
        p = int(np.argmin(cost))
        if best is None or cost[p] < best[0]:
            path_ids = ids[np.arange(n), subsets[p]]
            best = (float(cost[p]), QuantizedSeq(initial, path_ids, bits[p], float(cost[p])))
    return best


def finite_difference(f, z, h=1e-6):
    """Central difference (f(z+h) - f(z-h)) / 2h"""
    if not h > 0:
        raise OracleError(f'step h must be positive, got {h}')
    return (f(z + h) - f(z - h)) / (2 * h)


def random_path(rng, length, codebook, trellis):
    """Random path-consistent QuantizedSeq: random start, branch bits and subset ranks"""
    initial = int(rng.integers(trellis.num_states))
    bits = rng.integers(0, 2, size=length)
    ids = np.empty(length, dtype=np.int64)
    state = initial
    for t, q in enumerate(bits.tolist()):
        ids[t] = trellis.subset[state][q] + 4 * int(rng.integers(codebook.subset_size))
        state = trellis.next_state[state][q]
    return QuantizedSeq(initial, ids, bits)


def _describe(qs):
    return {
        'initial_state': int(qs.initial_state),
        'codeword_ids': qs.codeword_ids.tolist(),
        'branch_bits': qs.branch_bits.tolist(),
        'distortion': qs.distortion,
    }


def check_viterbi_optimality(config, trellis_name='default4'):
    trellis = get_trellis(trellis_name)
    rng = config.rng(1)
    rates = list(range(1, config.max_rate + 1))
    failures = []

    for trial in range(config.trials):
        rate_bits = int(rng.choice(rates))
        codebook = build_codebook(rate_bits)
        seq = rng.uniform(-1.0, 1.0, size=config.sequence_len)

        found = viterbi_quantize(seq, codebook, trellis)
        optimum, optimal_path = brute_force_tcq(seq, codebook, trellis)
        if found.distortion != optimum:
            failure = {
                'seed': config.seed,
                'trial': trial,
                'trellis': trellis_name,
                'rate_bits': rate_bits,
                'sequence': seq.tolist(),
                'viterbi': _describe(found),
                'brute_force': _describe(optimal_path),
            }
            logger.error('Viterbi is not optimal: %s', failure)
            failures.append(failure)

    logger.debug('Viterbi optimality on %s: %d trials, %d failures', trellis_name, config.trials, len(failures))
    return CheckResult(f'viterbi_optimality[{trellis_name}]', not failures, config.trials, failures)


def check_indexing_round_trips(config, trellis_name='default4', max_length=64):
    """Both indexing methods decode to the encoded path and reconstruct identical values"""
    trellis = get_trellis(trellis_name)
    rng = config.rng(2)
    failures = []

    for trial in range(config.trials):
        rate_bits = int(rng.integers(1, 9))
        codebook = build_codebook(rate_bits)
        path = random_path(rng, int(rng.integers(1, max_length + 1)), codebook, trellis)

        decoded = {method: decode(encode(path, codebook, trellis, method), codebook, trellis)
                   for method in (METHOD_I, METHOD_II)}
        values = [reconstruct(qs, codebook, trellis) for qs in decoded.values()]
        if any(qs != path for qs in decoded.values()) or not np.array_equal(*values):
            failure = {'seed': config.seed, 'trial': trial, 'rate_bits': rate_bits, 'path': _describe(path)}
            logger.error('Indexing round trip failed: %s', failure)
            failures.append(failure)

    return CheckResult(f'indexing_round_trips[{trellis_name}]', not failures, config.trials, failures)


def check_gradients(config, h=1e-6, sigma=None):
    """
    Closed-form soft-quantization derivative against central differences.
    Relative error is |a - f| / max(1, |a|, |f|); points within 1e-4 of a
    codeword are skipped.

    A plain |a - f| / |a| does not work here. Outside the codebook range, or
    between codewords at large sigma, the derivative is zero or nearly so and
    the central difference is pure roundoff of order eps / h, so the ratio is
    unbounded even though both values agree to within 1e-10. The floor of 1
    makes the test absolute for derivatives below 1 and relative above.
    """
    rng = config.rng(3)
    failures = []
    worst = 0.0
    skipped = 0

    for trial in range(config.trials):
        rate_bits = int(rng.integers(1, config.max_rate + 1))
        trial_sigma = sigma if sigma is not None else float(rng.uniform(0.5, 50.0))
        softquant = SoftQuantConfig(trial_sigma, build_codebook(rate_bits))
        z = float(rng.uniform(-1.25, 1.25))
        if np.min(np.abs(softquant.centers - z)) < KINK_EXCLUSION:
            skipped += 1
            continue

        analytic = soft_quantize_grad(z, softquant)
        numeric = finite_difference(lambda x: soft_quantize(x, softquant), z, h)
        error = abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))
        worst = max(worst, error)
        if error >= GRADIENT_TOLERANCE:
            failures.append({
                'seed': config.seed, 'trial': trial, 'z': z, 'sigma': trial_sigma, 'rate_bits': rate_bits,
                'analytic': analytic, 'finite_difference': numeric, 'relative_error': error,
            })

    for failure in failures:
        logger.error('Gradient mismatch: %s', failure)
    return CheckResult('soft_quantization_gradient', not failures, config.trials, failures,
                       {'max_relative_error': worst, 'skipped_near_codewords': skipped})


def check_entropy_round_trips(config, max_length=200):
    """Random symbol streams through every shipped model decode losslessly"""
    rng = config.rng(4)
    names = sorted(MODELS)
    failures = []

    for trial in range(config.trials):
        alphabet = 1 << int(rng.integers(1, 9))
        name = names[int(rng.integers(len(names)))]
        # Skewed streams exercise adaptation and underflow
        weights = rng.dirichlet(np.full(alphabet, 0.3))
        symbols = rng.choice(alphabet, size=int(rng.integers(1, max_length + 1)), p=weights)

        data = ac_encode(symbols, make_model(name, alphabet))
        decoded = ac_decode(data, len(symbols), make_model(name, alphabet))
        if not np.array_equal(decoded, symbols):
            failure = {'seed': config.seed, 'trial': trial, 'model': name, 'alphabet': alphabet,
                       'symbols': symbols.tolist()}
            logger.error('Arithmetic-coder round trip failed: %s', failure)
            failures.append(failure)

    return CheckResult('entropy_round_trips', not failures, config.trials, failures)


def run_suite(config=None):
    """
    Run every oracle check.

    Returns:
        dict: {"passed": bool, "checks": [CheckResult as dict, ...]}
    """
    config = config or OracleConfig()
    checks = []
    for name in sorted(TRELLISES):
        checks.append(check_viterbi_optimality(config, name))
        checks.append(check_indexing_round_trips(config, name))
    checks.append(check_gradients(config))
    checks.append(check_entropy_round_trips(config))

    passed = all(check.passed for check in checks)
    logger.info('Conformance suite %s: %d checks', 'passed' if passed else 'FAILED', len(checks))
    return {'passed': passed, 'checks': [check.as_dict() for check in checks]}
