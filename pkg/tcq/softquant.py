"""
Differentiable soft quantization used as the backward-pass surrogate of the
hard trellis quantizer, with its closed-form derivative.

    Q(z) = sum_j w_j c_j,   w_j = softmax_j(-sigma |z - c_j|)
    dQ/dz = sigma * sum_j w_j c_j (m_bar - m_j),   m_j = sign(z - c_j), m_bar = sum_l w_l m_l

sign(0) is taken as 0, so at a codeword the derivative is the subgradient
that ignores the kink.
"""
import logging
import math
import numbers
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from tcq.codebook import Codebook
from tcq.exceptions import TCQError
from tcq.trellis import reconstruct, viterbi_quantize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SoftQuantConfig:
    """
    Softness sigma plus the reconstruction points. Build it from a Codebook
    for TCQ use; bare centers are accepted for analysis of other point sets.
    """
    sigma: float
    codebook: Optional[Codebook] = None
    centers: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.sigma, bool) or not isinstance(self.sigma, numbers.Real) \
                or not math.isfinite(self.sigma) or self.sigma <= 0:
            raise TCQError(f'sigma must be a positive finite number, got {self.sigma!r}')
        centers = self.codebook.points if self.centers is None and self.codebook is not None else self.centers
        if centers is None:
            raise TCQError('SoftQuantConfig needs a codebook or centers')
        centers = np.asarray(centers, dtype=np.float64)
        if centers.ndim != 1 or centers.size == 0 or not np.all(np.isfinite(centers)):
            raise TCQError('centers must be a nonempty 1-D array of finite values')
        object.__setattr__(self, 'centers', centers)


def soft_weights(z, config):
    """Softmax weights of every codeword, shape z.shape + (L,)"""
    z = np.asarray(z, dtype=np.float64)
    logits = -config.sigma * np.abs(z[..., np.newaxis] - config.centers)
    logits -= logits.max(axis=-1, keepdims=True)
    weights = np.exp(logits)
    return weights / weights.sum(axis=-1, keepdims=True)


def soft_quantize(z, config):
    z = np.asarray(z, dtype=np.float64)
    values = soft_weights(z, config) @ config.centers
    return float(values) if values.ndim == 0 else values


def soft_quantize_grad(z, config):
    z = np.asarray(z, dtype=np.float64)
    centers = config.centers
    weights = soft_weights(z, config)
    signs = np.sign(z[..., np.newaxis] - centers)
    mean_sign = (weights * signs).sum(axis=-1, keepdims=True)
    grads = config.sigma * (weights * centers * (mean_sign - signs)).sum(axis=-1)
    return float(grads) if grads.ndim == 0 else grads


class SoftQuantPair(NamedTuple):
    hard: np.ndarray
    backward_values: np.ndarray
    backward_grads: np.ndarray


def hard_soft_pair(z, config, trellis, straight_through=False):
    """
    Hard TCQ output for the forward pass plus the surrogate values and
    derivatives a training wrapper uses in the backward pass.

    With straight_through the surrogate is the identity: values are the hard
    output and every derivative is 1.
    """
    if config.codebook is None:
        raise TCQError('hard_soft_pair needs a SoftQuantConfig built from a Codebook')
    z = np.asarray(z, dtype=np.float64).ravel()
    qs = viterbi_quantize(z, config.codebook, trellis)
    hard = reconstruct(qs, config.codebook, trellis)

    if straight_through:
        return SoftQuantPair(hard, hard.copy(), np.ones_like(hard))

    values = np.atleast_1d(soft_quantize(z, config))
    grads = np.atleast_1d(soft_quantize_grad(z, config))
    return SoftQuantPair(hard, values, grads)
