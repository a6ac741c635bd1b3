"""
Paired TCQ vs scalar-quantizer rate-distortion runs and their CSV reports.

Both quantizers always see the same sample matrix. Rates are reported in
bits per quantized symbol; the one-byte initial state each TCQ sequence
carries is itemized separately as header overhead.
"""
import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from django.db import transaction
from django.utils import timezone

from tcq.codebook import build_codebook, build_scalar_quantizer
from tcq.entropy import encode_plane, make_model
from tcq.exceptions import CodebookError, ReportError
from tcq.indexing import METHOD_I, METHOD_II, index_plane_method1, index_plane_method2
from tcq.models import BenchmarkRun, RDResult
from tcq.softquant import SoftQuantConfig, soft_quantize
from tcq.sources import load_source
from tcq.trellis import TrellisSpec, get_trellis, quantize_batch

logger = logging.getLogger(__name__)

MAX_BENCHMARK_RATE = 8
HEADER_BITS_PER_SEQUENCE = 8

CSV_COLUMNS = ['quantizer', 'R', 'bits_per_symbol', 'mse', 'snr_db', 'psnr_db', 'entropy_bpp', 'elapsed_ms']


@dataclass
class RDReport:
    quantizer: str
    rate_bits: int
    bits_per_symbol: float
    header_overhead_bits: int
    num_symbols: int
    signal_power: float
    mse: float
    snr_db: float
    psnr_db: float
    entropy_bpp: Optional[float] = None
    elapsed_ms: float = 0.0
    soft_mse: Optional[float] = None

    @property
    def overhead_per_symbol(self):
        return self.header_overhead_bits / self.num_symbols


def signal_power(x):
    return float(np.mean(np.square(np.asarray(x, dtype=np.float64))))


def snr_db(power, mse):
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(power / mse)


def psnr_db(mse, peak):
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _resolve_trellis(trellis):
    return trellis if isinstance(trellis, TrellisSpec) else get_trellis(trellis)


def _entropy_bpp(plane, shape, model_name, rate_bits):
    payload = encode_plane(plane, shape, make_model(model_name, 1 << rate_bits))
    return 8.0 * len(payload) / shape.size


def _report(quantizer, rate_bits, matrix, recon, peak, overhead_bits, entropy_bpp, elapsed):
    power = signal_power(matrix)
    mse = float(np.mean(np.square(matrix - recon)))
    return RDReport(
        quantizer=quantizer,
        rate_bits=rate_bits,
        bits_per_symbol=float(rate_bits),
        header_overhead_bits=overhead_bits,
        num_symbols=matrix.size,
        signal_power=power,
        mse=mse,
        snr_db=snr_db(power, mse),
        psnr_db=psnr_db(mse, peak),
        entropy_bpp=entropy_bpp,
        elapsed_ms=elapsed * 1000.0,
    )


def soft_quantization_mse(matrix, codebook, sigma):
    """Mean squared error of the soft quantizer over the doubled codebook"""
    config = SoftQuantConfig(sigma, codebook)
    total = 0.0
    for row in matrix:
        total += float(np.sum(np.square(row - soft_quantize(row, config))))
    return total / matrix.size


def compare_on(matrix, shape, rate_bits, v_min=-1.0, v_max=1.0, method=METHOD_II, trellis='ungerboeck4',
               entropy_model=None, workers=1, peak=None, sigma=None):
    """
    TCQ and SQ reports for an already loaded sample matrix.

    With entropy_model set, the TCQ index plane (method I or II codes) and the
    SQ level indices are arithmetic-coded over `shape` and the achieved bits
    per symbol are reported alongside the fixed rate. With sigma set, the TCQ
    report also carries the soft quantizer's MSE at that softness.
    """
    if not 1 <= rate_bits <= MAX_BENCHMARK_RATE:
        raise CodebookError(f'benchmark rate must be in [1, {MAX_BENCHMARK_RATE}], got {rate_bits}')
    if method not in (METHOD_I, METHOD_II):
        raise CodebookError(f'indexing method must be 1 or 2, got {method}')
    trellis = _resolve_trellis(trellis)
    peak = peak if peak is not None else v_max - v_min
    matrix = np.asarray(matrix, dtype=np.float64)

    codebook = build_codebook(rate_bits, v_min, v_max)
    started = time.perf_counter()
    paths = quantize_batch(matrix, codebook, trellis, workers=workers)
    tcq_recon = np.stack([codebook.points[qs.codeword_ids] for qs in paths])
    tcq_elapsed = time.perf_counter() - started

    tcq_bpp = None
    if entropy_model:
        index_plane = index_plane_method2 if method == METHOD_II else index_plane_method1
        plane = np.concatenate([index_plane(qs, codebook, trellis) for qs in paths])
        tcq_bpp = _entropy_bpp(plane, shape, entropy_model, rate_bits)

    quantizer = build_scalar_quantizer(rate_bits, v_min, v_max)
    started = time.perf_counter()
    levels, sq_recon = quantizer.quantize_array(matrix)
    sq_elapsed = time.perf_counter() - started

    sq_bpp = _entropy_bpp(levels, shape, entropy_model, rate_bits) if entropy_model else None

    tcq = _report('TCQ', rate_bits, matrix, tcq_recon, peak,
                  HEADER_BITS_PER_SEQUENCE * matrix.shape[0], tcq_bpp, tcq_elapsed)
    sq = _report('SQ', rate_bits, matrix, sq_recon, peak, 0, sq_bpp, sq_elapsed)
    if sigma is not None:
        tcq.soft_mse = soft_quantization_mse(matrix, codebook, sigma)
    logger.info('R=%d %s: TCQ %.3f dB, SQ %.3f dB, gain %.3f dB',
                rate_bits, trellis.name, tcq.snr_db, sq.snr_db, tcq.snr_db - sq.snr_db)
    return tcq, sq


def run_compare(spec, rate_bits, method=METHOD_II, trellis='ungerboeck4', entropy_model=None, workers=1,
                peak=None, sigma=None):
    """Paired TCQ and SQ reports for one source at R bits per symbol"""
    matrix, shape = load_source(spec)
    return compare_on(matrix, shape, rate_bits, spec.v_min, spec.v_max, method, trellis,
                      entropy_model, workers, peak, sigma)


def run_rd_sweep(spec, rates, csv_path=None, method=METHOD_II, trellis='ungerboeck4', entropy_model=None,
                 workers=1, peak=None, sigma=None):
    """
    One TCQ and one SQ report per rate, from a single draw of the source.

    Returns:
        list: RDReport objects ordered by rate, TCQ before SQ
    """
    rates = list(rates)
    if not rates:
        raise CodebookError('rate list is empty')
    matrix, shape = load_source(spec)

    reports = []
    for rate_bits in rates:
        reports.extend(compare_on(matrix, shape, rate_bits, spec.v_min, spec.v_max, method, trellis,
                                  entropy_model, workers, peak, sigma))
    if csv_path:
        write_rd_csv(csv_path, reports)
    return reports


def reports_to_frame(reports):
    rows = [
        {
            'quantizer': r.quantizer,
            'R': r.rate_bits,
            'bits_per_symbol': r.bits_per_symbol,
            'mse': r.mse,
            'snr_db': r.snr_db,
            'psnr_db': r.psnr_db,
            'entropy_bpp': r.entropy_bpp,
            'elapsed_ms': r.elapsed_ms,
        }
        for r in reports
    ]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def results_to_frame(results):
    """RDResult rows (e.g. an admin queryset) in the CSV layout"""
    rows = results.values_list('quantizer', 'rate_bits', 'bits_per_symbol', 'mse', 'snr_db', 'psnr_db',
                               'entropy_bpp', 'elapsed_ms')
    return pd.DataFrame(list(rows), columns=CSV_COLUMNS)


def write_rd_csv(path, reports):
    try:
        reports_to_frame(reports).to_csv(path, index=False)
    except OSError as e:
        raise ReportError(f'cannot write {path}: {e}') from None
    logger.info('Wrote %d rows to %s', len(reports), path)


def read_rd_csv(path):
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except (OSError, pd.errors.ParserError) as e:
        raise ReportError(f'cannot read {path}: {e}') from None
    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise ReportError(f'{path} is missing columns: {", ".join(missing)}')
    return frame


def _start_run(spec, trellis_name):
    return BenchmarkRun.objects.create(
        source_kind=spec.kind,
        source_path=spec.path or '',
        seed=spec.seed,
        samples=spec.samples or 0,
        seqlen=spec.seqlen,
        trellis=trellis_name,
        status='running',
    )


def _complete_run(run, reports):
    with transaction.atomic():
        RDResult.objects.bulk_create([
            RDResult(
                run=run,
                quantizer=r.quantizer,
                rate_bits=r.rate_bits,
                bits_per_symbol=r.bits_per_symbol,
                header_overhead_bits=r.header_overhead_bits,
                mse=r.mse,
                snr_db=r.snr_db,
                psnr_db=r.psnr_db,
                entropy_bpp=r.entropy_bpp,
                elapsed_ms=r.elapsed_ms,
            )
            for r in reports
        ])
        if reports:
            run.samples = reports[0].num_symbols
        run.status = 'completed'
        run.completed_at = timezone.now()
        run.save(update_fields=['samples', 'status', 'completed_at'])
    logger.info('Saved benchmark run %s with %d results', run.run_id, len(reports))
    return run


def tracked_run(spec, trellis_name, compute):
    """
    Record a BenchmarkRun around compute(), which returns the reports.

    The run is stored as running before compute() starts. It ends up completed
    with its results, or failed with the error message, and the error is
    re-raised.

    Returns:
        tuple: (BenchmarkRun, reports)
    """
    run = _start_run(spec, trellis_name)
    try:
        reports = compute()
        _complete_run(run, reports)
        return run, reports
    except Exception as e:
        run.status = 'failed'
        run.error_message = str(e)
        run.completed_at = timezone.now()
        run.save(update_fields=['status', 'error_message', 'completed_at'])
        logger.warning('Benchmark run %s failed: %s', run.run_id, e)
        raise


def save_reports(reports, spec, trellis_name):
    """Persist already computed reports as a completed run; returns the BenchmarkRun"""
    return _complete_run(_start_run(spec, trellis_name), reports)
