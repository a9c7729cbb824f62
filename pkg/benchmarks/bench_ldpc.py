"""Benchmark the two sum-product LDPC decoder kernels.

Generates a batch of noisy codeword LLRs at a configurable SNR, decodes it
with the vectorized numpy kernel and (when importable) the compiled numba
kernel, checks that both produce identical bits and convergence flags, and
reports decode throughput.

Usage:
    python3 benchmarks/bench_ldpc.py [--blocks 256] [--snr-db 2.0]
                                     [--repeats 5] [--max-iter 50] [--seed 0]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gscsim.phy_link import _kernels
from gscsim.phy_link.channel import (
    ChannelKind,
    bpsk_demodulate_llr,
    bpsk_modulate,
    channel_apply,
)
from gscsim.phy_link.ldpc import default_code, ldpc_encode


def make_llrs(blocks: int, snr_db: float, seed: int) -> tuple[np.ndarray, object]:
    code = default_code()
    rng = np.random.default_rng(seed)
    msgs = rng.integers(0, 2, size=(blocks, code.k), dtype=np.uint8)
    symbols = bpsk_modulate(ldpc_encode(msgs, code).reshape(-1))
    snr = 10.0 ** (snr_db / 10.0)
    received, _h, variance = channel_apply(symbols, ChannelKind.AWGN, snr, rng)
    llrs = bpsk_demodulate_llr(received, variance).reshape(blocks, code.n)
    return llrs, code


def time_kernel(fn, llrs, graph, max_iter: int, repeats: int):
    times = []
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(llrs, graph.ce_var, graph.check_ptr,
                    graph.var_order, graph.var_ptr, max_iter)
        times.append(time.perf_counter() - start)
    return result, min(times)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--blocks", type=int, default=256)
    parser.add_argument("--snr-db", type=float, default=2.0)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--max-iter", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    llrs, code = make_llrs(args.blocks, args.snr_db, args.seed)
    graph = code.graph
    print(f"code: n={code.n} k={code.k}, {args.blocks} blocks at "
          f"{args.snr_db:g} dB, max {args.max_iter} iterations, "
          f"best of {args.repeats}")

    (bits_np, conv_np, iters_np), t_np = time_kernel(
        _kernels.decode_blocks_numpy, llrs, graph, args.max_iter, args.repeats)
    rate = args.blocks / t_np
    print(f"numpy : {t_np * 1e3:8.1f} ms  {rate:8.1f} blocks/s  "
          f"converged {int(conv_np.sum())}/{args.blocks}  "
          f"mean iters {iters_np.mean():.1f}")

    if _kernels.BACKEND != "numba":
        print("numba : unavailable (install numba or unset GSCSIM_BACKEND)")
        return 0

    # first call compiles; keep it out of the timing
    _kernels.decode_blocks_numba(llrs[:1], graph.ce_var, graph.check_ptr,
                                 graph.var_order, graph.var_ptr, args.max_iter)
    (bits_nb, conv_nb, iters_nb), t_nb = time_kernel(
        _kernels.decode_blocks_numba, llrs, graph, args.max_iter, args.repeats)
    rate = args.blocks / t_nb
    print(f"numba : {t_nb * 1e3:8.1f} ms  {rate:8.1f} blocks/s  "
          f"converged {int(conv_nb.sum())}/{args.blocks}  "
          f"mean iters {iters_nb.mean():.1f}")

    same = ((bits_np == bits_nb).all() and (conv_np == conv_nb).all()
            and (iters_np == iters_nb).all())
    print(f"outputs identical: {same}")
    print(f"speedup (numba over numpy): {t_np / t_nb:.2f}x")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
