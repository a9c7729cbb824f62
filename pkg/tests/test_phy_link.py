import math

import numpy as np
import pytest

from gscsim.phy_link import _kernels
from gscsim.phy_link.channel import (
    ChannelKind,
    bpsk_demodulate_llr,
    bpsk_hard_decision,
    bpsk_modulate,
    channel_apply,
    noise_sigma,
)
from gscsim.phy_link.ldpc import (
    CodeConstructionError,
    default_code,
    extract_message,
    ldpc_encode,
    load_alist,
    make_gallager_code,
    parity_check,
    save_alist,
)
from gscsim.phy_link.link import (
    LinkConfig,
    comm_latency,
    snr_linear,
    total_latency,
    transmit,
    uncoded_bpsk_awgn_ber,
)


def test_default_code_shape_and_regularity():
    code = default_code()
    assert code.n == 1024 and code.k == 512 and code.m == 512
    assert code.rate == pytest.approx(0.5)
    assert (code.h.sum(axis=0) == 3).all()  # column weight
    assert (code.h.sum(axis=1) == 6).all()  # row weight
    assert default_code() is code  # cached


def test_encode_satisfies_parity_and_round_trips():
    code = default_code()
    rng = np.random.default_rng(3)
    msgs = rng.integers(0, 2, size=(32, code.k), dtype=np.uint8)
    cws = ldpc_encode(msgs, code)
    assert cws.shape == (32, code.n)
    assert parity_check(cws, code).all()
    assert (extract_message(cws, code) == msgs).all()
    one = ldpc_encode(msgs[0], code)
    assert one.shape == (code.n,)
    assert parity_check(one, code) is True
    assert (extract_message(one, code) == msgs[0]).all()
    with pytest.raises(ValueError):
        ldpc_encode(msgs[:, :100], code)


def test_invalid_code_parameters_rejected():
    with pytest.raises(CodeConstructionError):
        make_gallager_code(n=10, wc=3, wr=7)


def test_alist_round_trip(tmp_path):
    code = make_gallager_code(n=48, wc=3, wr=6, seed=5)
    path = tmp_path / "code.alist"
    save_alist(code, path)
    assert (load_alist(path) == code.h).all()


def test_bpsk_maps_and_slices():
    bits = np.array([0, 1, 1, 0], dtype=np.uint8)
    symbols = bpsk_modulate(bits)
    assert (symbols == np.array([-1.0, 1.0, 1.0, -1.0])).all()
    assert (bpsk_hard_decision(symbols) == bits).all()


def test_noise_sigma_values():
    assert noise_sigma(1.0) == pytest.approx(math.sqrt(0.5))
    assert noise_sigma(math.inf) == 0.0
    with pytest.raises(ValueError):
        noise_sigma(0.0)


def test_awgn_noise_statistics():
    rng = np.random.default_rng(11)
    snr = 10.0 ** 0.4  # 4 dB
    symbols = bpsk_modulate(np.zeros(200_000, dtype=np.uint8))
    received, h, variance = channel_apply(symbols, ChannelKind.AWGN, snr, rng)
    assert variance == pytest.approx(1.0 / (2.0 * snr))
    assert (h == 1.0).all()
    noise_re = np.real(received) - symbols
    assert np.var(noise_re) == pytest.approx(variance, rel=0.02)
    assert np.var(np.imag(received)) == pytest.approx(variance, rel=0.02)


def test_rayleigh_block_fading_statistics():
    rng = np.random.default_rng(12)
    symbols = np.ones(64 * 500)
    received, h, _var = channel_apply(
        symbols, ChannelKind.RAYLEIGH, 1e9, rng, block_len=64)
    assert h.size == 500
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.1)
    # near-noiseless: samples within one block share the block gain
    first_block = received[:64]
    assert np.allclose(first_block, first_block[0], atol=1e-3)
    assert not np.allclose(received[0], received[64], atol=1e-3)


def test_llr_sign_and_scale():
    received = np.array([0.5, -0.25], dtype=np.complex128)
    llr = bpsk_demodulate_llr(received, 0.25)
    assert llr == pytest.approx([4.0, -2.0])
    noiseless = bpsk_demodulate_llr(received, 0.0)
    assert noiseless[0] == math.inf and noiseless[1] == -math.inf
    # coherent equalization flips the sign back under a negative gain
    flipped = bpsk_demodulate_llr(-received, 0.25, h=-1.0)
    assert flipped == pytest.approx([4.0, -2.0])


def test_noiseless_transmit_round_trip():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=1500, dtype=np.uint8)
    cfg = LinkConfig(snr_db=math.inf)
    out = transmit(bits, cfg, np.random.default_rng(1))
    assert (out.bits == bits).all()
    assert out.raw_bit_errors == 0 and out.post_bit_errors == 0
    assert out.blocks_total == 3 and out.blocks_dropped == 0
    assert out.reliability.all() and out.reliability.size == 1500


def test_transmit_empty_payload():
    out = transmit(np.zeros(0, dtype=np.uint8), LinkConfig())
    assert out.bits.size == 0 and out.blocks_total == 0


def test_coding_gain_at_4db():
    rng = np.random.default_rng(21)
    bits = rng.integers(0, 2, size=5120, dtype=np.uint8)
    out = transmit(bits, LinkConfig(snr_db=4.0), np.random.default_rng(22))
    assert out.raw_bit_errors > 0
    assert out.post_bit_errors < out.raw_bit_errors


def test_backend_dispatch_matches_numpy():
    code = default_code()
    rng = np.random.default_rng(31)
    msgs = rng.integers(0, 2, size=(4, code.k), dtype=np.uint8)
    cws = ldpc_encode(msgs, code)
    symbols = bpsk_modulate(cws.reshape(-1))
    snr = 10.0 ** 0.2
    received, _h, variance = channel_apply(symbols, ChannelKind.AWGN, snr, rng)
    llrs = bpsk_demodulate_llr(received, variance).reshape(4, code.n)

    g = code.graph
    args = (g.ce_var, g.check_ptr, g.var_order, g.var_ptr, 50)
    bits_np, conv_np, iters_np = _kernels.decode_blocks_numpy(llrs, *args)
    bits_d, conv_d, iters_d = _kernels.decode_blocks(llrs, code.graph, 50)
    assert (bits_np == bits_d).all()
    assert (conv_np == conv_d).all()
    assert (iters_np == iters_d).all()
    assert _kernels.BACKEND in ("numba", "numpy")
    if _kernels.BACKEND == "numba":
        bits_nb, conv_nb, iters_nb = _kernels.decode_blocks_numba(llrs, *args)
        assert (bits_np == bits_nb).all()
        assert (conv_np == conv_nb).all()
        assert (iters_np == iters_nb).all()


def test_common_randomness_across_lengths_and_snrs():
    code = default_code()
    cfg = LinkConfig(channel=ChannelKind.RAYLEIGH, snr_db=8.0)
    # different payload lengths, same block count: identical gains
    out_a = transmit(np.zeros(100, dtype=np.uint8), cfg, np.random.default_rng(77))
    out_b = transmit(np.zeros(code.k, dtype=np.uint8), cfg, np.random.default_rng(77))
    assert out_a.fading == out_b.fading
    # same shape, different SNR: identical gains (noise scales, draws do not)
    bits = np.zeros(2 * code.k, dtype=np.uint8)
    low = transmit(bits, cfg, np.random.default_rng(78))
    high = transmit(
        bits,
        LinkConfig(channel=ChannelKind.RAYLEIGH, snr_db=20.0),
        np.random.default_rng(78),
    )
    assert low.fading == high.fading
    assert len(low.fading) == 2


def test_uncoded_ber_deterministic_and_plausible():
    a = uncoded_bpsk_awgn_ber(0.0, 100_000, seed=9)
    b = uncoded_bpsk_awgn_ber(0.0, 100_000, seed=9)
    assert a == b
    assert a == pytest.approx(0.0786, rel=0.1)  # Q(sqrt(2))


def test_snr_linear_and_noise_power_path():
    assert snr_linear(LinkConfig(snr_db=0.0)) == pytest.approx(1.0)
    assert snr_linear(LinkConfig(snr_db=10.0)) == pytest.approx(10.0)
    cfg = LinkConfig(noise_power=0.25, power=1.0)
    assert snr_linear(cfg) == pytest.approx(4.0)
    assert snr_linear(cfg, gain_sq=0.5) == pytest.approx(2.0)
    assert snr_linear(LinkConfig(snr_db=math.inf)) == math.inf


def test_comm_latency_values():
    cfg = LinkConfig(snr_db=8.0, bandwidth_hz=100e3)
    expected = 2120 / (100e3 * math.log2(1.0 + 10.0 ** 0.8))
    assert comm_latency(2120, cfg) == pytest.approx(expected)
    assert comm_latency(0, cfg) == 0.0
    assert comm_latency(10, LinkConfig(snr_db=math.inf)) == 0.0
    with pytest.raises(ValueError):
        comm_latency(-1, cfg)


def test_total_latency_composition():
    assert total_latency(0.1, 0.3, 0.2, 0.01) == pytest.approx(0.51)
    assert total_latency(2.0, 0.3, 0.2, 0.01) == pytest.approx(2.01)
    with pytest.raises(ValueError):
        total_latency(-0.1, 0.0, 0.0, 0.0)


def test_link_config_validation():
    with pytest.raises(ValueError):
        LinkConfig(bandwidth_hz=0.0)
    with pytest.raises(ValueError):
        LinkConfig(power=0.0)
    with pytest.raises(ValueError):
        LinkConfig(noise_power=-1.0)
    with pytest.raises(ValueError):
        LinkConfig(max_decode_iterations=-1)
