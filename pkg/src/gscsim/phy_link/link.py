"""End-to-end coded transmission over the simulated channel.

``transmit`` moves a raw bit array through pad - LDPC encode - BPSK - channel
- demodulate - decode and reports per-block outcomes; ``send_payload`` wraps
it for ranked semantic payloads, returning the deserialized entries and a
link report. Latency follows the bandwidth-capacity form: bits over
W * log2(1 + SNR).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..knowledge_base import KnowledgeBase
from ..semantic_ranker import RankedPayload
from . import _kernels
from .channel import (
    ChannelKind,
    bpsk_demodulate_llr,
    bpsk_hard_decision,
    bpsk_modulate,
    channel_apply,
)
from .ldpc import LdpcCode, default_code, extract_message, ldpc_encode
from .wire import DeserializedPayload, deserialize_payload, serialize_payload


@dataclass(frozen=True)
class LinkConfig:
    channel: ChannelKind = ChannelKind.AWGN
    snr_db: float = 8.0
    bandwidth_hz: float = 100e3
    power: float = 1.0
    noise_power: float | None = None  # derives snr when set, with unit gain
    seed: int = 0
    max_decode_iterations: int = 50
    code: LdpcCode | None = None  # None selects the shared default code

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if self.power <= 0:
            raise ValueError("power must be positive")
        if self.noise_power is not None and self.noise_power <= 0:
            raise ValueError("noise_power must be positive")
        if self.max_decode_iterations < 0:
            raise ValueError("max_decode_iterations must be non-negative")

    def resolved_code(self) -> LdpcCode:
        return self.code if self.code is not None else default_code()


@dataclass(frozen=True)
class LinkReport:
    bits_sent: int
    raw_bit_errors: int
    post_bit_errors: int
    blocks_total: int
    blocks_dropped: int
    surviving_items: int
    comm_latency_s: float
    fading_realizations: tuple[complex, ...] = field(default=(), repr=False)
    header_error: bool = False


@dataclass(frozen=True)
class TransmitResult:
    bits: np.ndarray  # recovered payload bits, original length
    reliability: np.ndarray  # per-bit flag: carrying block converged
    raw_bit_errors: int  # coded-bit errors before decoding
    post_bit_errors: int  # payload-bit errors after decoding
    blocks_total: int
    blocks_dropped: int
    fading: tuple[complex, ...]


def snr_linear(config: LinkConfig, gain_sq: float = 1.0) -> float:
    """Linear SNR: power * |h|^2 / noise power, or 10^(snr_db/10)."""
    if config.noise_power is not None:
        return config.power * gain_sq / config.noise_power
    if math.isinf(config.snr_db) and config.snr_db > 0:
        return math.inf
    return gain_sq * 10.0 ** (config.snr_db / 10.0)


def comm_latency(bits_count: int, config: LinkConfig) -> float:
    """Transmission seconds for a bit count at the configured rate."""
    if bits_count < 0:
        raise ValueError("bits_count must be non-negative")
    if bits_count == 0:
        return 0.0
    snr = snr_linear(config)
    if math.isinf(snr):
        return 0.0
    return bits_count / (config.bandwidth_hz * math.log2(1.0 + snr))


def total_latency(t_question: float, t_image: float, t_comm: float, t_answer: float) -> float:
    """Question handling and image+uplink run in parallel; answering follows."""
    for name, value in (
        ("t_question", t_question),
        ("t_image", t_image),
        ("t_comm", t_comm),
        ("t_answer", t_answer),
    ):
        if value < 0:
            raise ValueError(f"{name} must be non-negative")
    return max(t_question, t_image + t_comm) + t_answer


def transmit(
    payload_bits: np.ndarray,
    config: LinkConfig,
    rng: np.random.Generator | None = None,
) -> TransmitResult:
    """Send raw bits through the coded link; deterministic given (config, rng)."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    payload_bits = np.asarray(payload_bits, dtype=np.uint8) & 1
    code = config.resolved_code()
    n_payload = payload_bits.size
    if n_payload == 0:
        return TransmitResult(
            bits=payload_bits.copy(),
            reliability=np.ones(0, dtype=bool),
            raw_bit_errors=0,
            post_bit_errors=0,
            blocks_total=0,
            blocks_dropped=0,
            fading=(),
        )

    pad = (-n_payload) % code.k
    padded = np.concatenate([payload_bits, np.zeros(pad, dtype=np.uint8)])
    messages = padded.reshape(-1, code.k)
    nblocks = messages.shape[0]
    codewords = ldpc_encode(messages, code)
    symbols = bpsk_modulate(codewords.reshape(-1))

    snr = snr_linear(config)
    received, h_blocks, variance = channel_apply(
        symbols, config.channel, snr, rng, block_len=code.n
    )
    if config.channel is ChannelKind.AWGN:
        gains = np.ones(symbols.size)
        fading = tuple(np.ones(nblocks, dtype=np.complex128))
    else:
        gains = np.repeat(h_blocks, code.n)[: symbols.size]
        fading = tuple(h_blocks)
    llrs = bpsk_demodulate_llr(received, variance, gains)

    coded_bits = codewords.reshape(-1)
    raw_bit_errors = int(
        np.count_nonzero(bpsk_hard_decision(llrs) != coded_bits)
    )

    decoded, converged, _iters = _kernels.decode_blocks(
        llrs.reshape(nblocks, code.n), code.graph, config.max_decode_iterations
    )
    out_messages = extract_message(decoded, code)
    out_bits = out_messages.reshape(-1)[:n_payload]
    post_bit_errors = int(np.count_nonzero(out_bits != payload_bits))
    reliability = np.repeat(converged, code.k)[:n_payload]
    return TransmitResult(
        bits=out_bits,
        reliability=reliability,
        raw_bit_errors=raw_bit_errors,
        post_bit_errors=post_bit_errors,
        blocks_total=nblocks,
        blocks_dropped=int(np.count_nonzero(~converged)),
        fading=fading,
    )


def send_payload(
    payload: RankedPayload,
    config: LinkConfig,
    kb: KnowledgeBase,
    rng: np.random.Generator | None = None,
) -> tuple[DeserializedPayload, LinkReport]:
    """Serialize, transmit, and deserialize one ranked payload."""
    bits = serialize_payload(payload)
    result = transmit(bits, config, rng)
    received = deserialize_payload(result.bits, kb, result.reliability)
    report = LinkReport(
        bits_sent=int(bits.size),
        raw_bit_errors=result.raw_bit_errors,
        post_bit_errors=result.post_bit_errors,
        blocks_total=result.blocks_total,
        blocks_dropped=result.blocks_dropped,
        surviving_items=len(received.entries),
        comm_latency_s=comm_latency(int(bits.size), config),
        fading_realizations=result.fading,
        header_error=received.header_error,
    )
    return received, report


def uncoded_bpsk_awgn_ber(
    snr_db: float, n_bits: int, seed: int = 0
) -> float:
    """Monte-Carlo bit error rate of plain BPSK over AWGN."""
    rng = np.random.default_rng(seed)
    snr = 10.0 ** (snr_db / 10.0)
    bits = rng.integers(0, 2, size=n_bits, dtype=np.uint8)
    symbols = bpsk_modulate(bits)
    received, _h, variance = channel_apply(symbols, ChannelKind.AWGN, snr, rng)
    hard = bpsk_hard_decision(np.real(received))
    return float(np.count_nonzero(hard != bits)) / n_bits
