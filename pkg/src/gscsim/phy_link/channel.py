"""BPSK modulation and the AWGN / block-flat Rayleigh channel models.

SNR is interpreted per coded BPSK symbol with unit symbol energy, so the
per-real-dimension noise variance is 1 / (2 * snr). Rayleigh fading draws
one complex unit-variance gain per LDPC block, known at the receiver
(coherent detection); equalization folds the gain into the LLRs.

Noise and fading are drawn as standard normals and scaled afterwards, so a
generator seeded independently of SNR yields common random numbers across an
SNR sweep. Fading gains are drawn before the noise, so transmissions that
span the same number of blocks see identical gains even when their payload
lengths differ.
"""

from __future__ import annotations

import enum

import numpy as np


class ChannelKind(enum.Enum):
    AWGN = "AWGN"
    RAYLEIGH = "Rayleigh"


def bpsk_modulate(bits: np.ndarray) -> np.ndarray:
    """Bit 1 to +1, bit 0 to -1."""
    bits = np.asarray(bits, dtype=np.uint8)
    return 2.0 * bits - 1.0


def bpsk_hard_decision(values: np.ndarray) -> np.ndarray:
    """Sign slicer matching the modulation map (>= 0 means bit 1)."""
    return (np.asarray(values) >= 0).astype(np.uint8)


def noise_sigma(snr_lin: float) -> float:
    """Per-real-dimension noise standard deviation at unit symbol energy."""
    if snr_lin <= 0:
        raise ValueError("linear SNR must be positive")
    if np.isinf(snr_lin):
        return 0.0
    return float(np.sqrt(1.0 / (2.0 * snr_lin)))


def channel_apply(
    symbols: np.ndarray,
    kind: ChannelKind,
    snr_lin: float,
    rng: np.random.Generator,
    block_len: int | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Pass real BPSK symbols through the channel.

    Returns (received complex samples, per-block complex gains, noise
    variance per real dimension). AWGN uses unit gains. For Rayleigh,
    ``block_len`` sets the fading granularity (defaults to the whole frame).
    """
    symbols = np.asarray(symbols, dtype=np.float64)
    sigma = noise_sigma(snr_lin)
    n = symbols.size
    if kind is ChannelKind.AWGN:
        h_blocks = np.ones(1, dtype=np.complex128)
        faded = symbols.astype(np.complex128)
    else:
        if block_len is None or block_len <= 0:
            block_len = n if n else 1
        nblocks = max(1, -(-n // block_len))
        h_blocks = (
            rng.standard_normal(nblocks) + 1j * rng.standard_normal(nblocks)
        ) / np.sqrt(2.0)
        gains = np.repeat(h_blocks, block_len)[:n]
        faded = gains * symbols
    noise = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    received = faded + sigma * noise
    return received, h_blocks, sigma**2


def bpsk_demodulate_llr(
    received: np.ndarray,
    variance: float,
    h: np.ndarray | complex = 1.0,
) -> np.ndarray:
    """LLR = 2 * re(conj(h) * received) / variance; positive means bit 1.

    ``h`` may be a scalar or a per-sample gain array. Zero variance (the
    noiseless limit) yields +/- inf, which the decoder clips.
    """
    received = np.asarray(received, dtype=np.complex128)
    equalized = np.real(np.conj(h) * received)
    if variance <= 0:
        out = np.zeros_like(equalized)
        out[equalized > 0] = np.inf
        out[equalized < 0] = -np.inf
        return out
    return 2.0 * equalized / variance
