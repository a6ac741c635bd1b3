"""
Persisted rate-distortion benchmark runs
"""
from django.db import models
import uuid


class BenchmarkRun(models.Model):
    """One compare or rd_sweep invocation"""
    run_id = models.UUIDField(primary_key=True, default=uuid.uuid4)

    SOURCE_CHOICES = [
        ('uniform', 'Uniform'),
        ('gaussian', 'Gaussian (clipped)'),
        ('laplacian', 'Laplacian (clipped)'),
        ('file', 'Tensor / image file'),
    ]
    source_kind = models.CharField(max_length=20, choices=SOURCE_CHOICES)
    source_path = models.CharField(max_length=500, blank=True)
    seed = models.BigIntegerField(default=0)
    samples = models.BigIntegerField(default=0)
    seqlen = models.IntegerField(default=0, verbose_name='Sequence Length')
    trellis = models.CharField(max_length=50)

    started_at = models.DateTimeField(auto_now_add=True)
    completed_at = models.DateTimeField(null=True, blank=True)

    STATUS_CHOICES = [
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='running')

    error_message = models.TextField(blank=True)

    class Meta:
        ordering = ['-started_at']

    def __str__(self):
        return f"{self.source_kind} run {self.run_id} ({self.status})"


class RDResult(models.Model):
    """One (quantizer, rate) point of a run"""
    result_id = models.UUIDField(primary_key=True, default=uuid.uuid4)
    run = models.ForeignKey(BenchmarkRun, on_delete=models.CASCADE, related_name='results')

    QUANTIZER_CHOICES = [
        ('TCQ', 'Trellis coded quantizer'),
        ('SQ', 'Scalar quantizer'),
    ]
    quantizer = models.CharField(max_length=3, choices=QUANTIZER_CHOICES)
    rate_bits = models.IntegerField(verbose_name='R')

    bits_per_symbol = models.FloatField()
    header_overhead_bits = models.BigIntegerField(default=0)
    mse = models.FloatField(verbose_name='MSE')
    snr_db = models.FloatField(verbose_name='SNR (dB)')
    psnr_db = models.FloatField(verbose_name='PSNR (dB)')
    entropy_bpp = models.FloatField(null=True, blank=True, verbose_name='Entropy-coded bits/symbol')
    elapsed_ms = models.FloatField(default=0)

    class Meta:
        ordering = ['run', 'quantizer', 'rate_bits']
        unique_together = [['run', 'quantizer', 'rate_bits']]
        verbose_name = 'R-D Result'
        verbose_name_plural = 'R-D Results'

    def __str__(self):
        return f"{self.quantizer} R={self.rate_bits}: {self.snr_db:.2f} dB"
