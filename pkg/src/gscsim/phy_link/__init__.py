"""Simulated physical link: wire format, LDPC coding, BPSK over AWGN/Rayleigh."""

from .channel import (
    ChannelKind,
    bpsk_demodulate_llr,
    bpsk_modulate,
    channel_apply,
)
from .ldpc import (
    DEFAULT_CODE_SEED,
    LdpcCode,
    default_code,
    ldpc_encode,
    load_alist,
    make_gallager_code,
    save_alist,
)
from .link import (
    LinkConfig,
    LinkReport,
    TransmitResult,
    comm_latency,
    send_payload,
    snr_linear,
    total_latency,
    transmit,
    uncoded_bpsk_awgn_ber,
)
from .wire import (
    DeserializedPayload,
    WireEntry,
    WireFormatError,
    deserialize_payload,
    serialize_payload,
)

__all__ = [
    "ChannelKind",
    "bpsk_demodulate_llr",
    "bpsk_modulate",
    "channel_apply",
    "DEFAULT_CODE_SEED",
    "LdpcCode",
    "default_code",
    "ldpc_encode",
    "load_alist",
    "make_gallager_code",
    "save_alist",
    "LinkConfig",
    "LinkReport",
    "TransmitResult",
    "comm_latency",
    "send_payload",
    "snr_linear",
    "total_latency",
    "transmit",
    "uncoded_bpsk_awgn_ber",
    "DeserializedPayload",
    "WireEntry",
    "WireFormatError",
    "deserialize_payload",
    "serialize_payload",
]
