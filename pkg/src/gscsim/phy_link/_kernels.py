"""Sum-product LDPC decoding kernels.

Two interchangeable implementations of the same belief-propagation decoder:
a compiled per-block kernel (numba) and a vectorized numpy batch kernel.
The active one is chosen once at import time from the GSCSIM_BACKEND
environment variable: "auto" (default; numba when importable), "numba",
or "numpy".

Message passing runs in the log(p0/p1) domain internally; the public entry
point takes log-likelihood ratios with the positive-means-bit-1 convention
used by the demodulator and converts at the boundary.
"""

from __future__ import annotations

import os

import numpy as np

LLR_CLIP = 30.0
_PROD_CLIP = 1.0 - 1e-12
_T_FLOOR = 1e-15


def _pick_backend() -> str:
    choice = os.environ.get("GSCSIM_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"GSCSIM_BACKEND must be auto, numba or numpy, not {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _pick_backend()


def _segment_lengths(ptr: np.ndarray) -> np.ndarray:
    return np.diff(ptr)


def decode_blocks_numpy(
    llrs: np.ndarray,
    ce_var: np.ndarray,
    check_ptr: np.ndarray,
    var_order: np.ndarray,
    var_ptr: np.ndarray,
    max_iter: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized batch decoder; returns (bits, converged, iterations)."""
    llrs = np.atleast_2d(llrs)
    nblocks, n = llrs.shape
    check_starts = check_ptr[:-1]
    check_deg = _segment_lengths(check_ptr)
    var_starts = var_ptr[:-1]
    var_deg = _segment_lengths(var_ptr)

    l0 = np.clip(-llrs, -LLR_CLIP, LLR_CLIP)
    bits = (l0 < 0).astype(np.uint8)
    out_bits = bits.copy()
    converged = _syndrome_ok_numpy(bits, ce_var, check_starts)
    iters = np.zeros(nblocks, dtype=np.int32)
    active = np.nonzero(~converged)[0]
    if active.size == 0 or max_iter == 0:
        return out_bits, converged, iters

    mu = l0[active][:, ce_var].copy()
    l0a = l0[active]
    iters[active] = max_iter  # overwritten on convergence

    for it in range(1, max_iter + 1):
        t = np.tanh(0.5 * mu)
        t = np.where(np.abs(t) < _T_FLOOR, np.copysign(_T_FLOOR, t), t)
        prod = np.multiply.reduceat(t, check_starts, axis=1)
        loo = np.repeat(prod, check_deg, axis=1) / t
        lam = 2.0 * np.arctanh(np.clip(loo, -_PROD_CLIP, _PROD_CLIP))

        lam_v = lam[:, var_order]
        post = l0a + np.add.reduceat(lam_v, var_starts, axis=1)
        mu_v = np.repeat(post, var_deg, axis=1) - lam_v
        mu[:, var_order] = np.clip(mu_v, -LLR_CLIP, LLR_CLIP)

        hard = (post < 0).astype(np.uint8)
        ok = _syndrome_ok_numpy(hard, ce_var, check_starts)
        done = np.nonzero(ok)[0]
        out_bits[active] = hard
        if done.size:
            blk = active[done]
            converged[blk] = True
            iters[blk] = it
            keep = np.nonzero(~ok)[0]
            active = active[keep]
            if active.size == 0:
                break
            mu = mu[keep]
            l0a = l0a[keep]
    return out_bits, converged, iters


def _syndrome_ok_numpy(
    bits: np.ndarray, ce_var: np.ndarray, check_starts: np.ndarray
) -> np.ndarray:
    on_edges = bits[:, ce_var].astype(np.int32)
    sums = np.add.reduceat(on_edges, check_starts, axis=1)
    return ~((sums % 2).any(axis=1))


if BACKEND == "numba":
    import math

    from numba import njit

    @njit(cache=True)
    def _decode_batch_numba(
        llrs, ce_var, check_ptr, var_order, var_ptr, max_iter, out_bits, out_conv, out_iters
    ):  # pragma: no cover - exercised through decode_blocks
        nblocks, n = llrs.shape
        n_edges = ce_var.shape[0]
        m = check_ptr.shape[0] - 1
        max_deg = 0
        for c in range(m):
            d = check_ptr[c + 1] - check_ptr[c]
            if d > max_deg:
                max_deg = d

        l0 = np.empty(n)
        mu = np.empty(n_edges)
        lam = np.empty(n_edges)
        post = np.empty(n)
        tt = np.empty(max_deg)
        fwd = np.empty(max_deg)

        for b in range(nblocks):
            for v in range(n):
                val = -llrs[b, v]
                if val > LLR_CLIP:
                    val = LLR_CLIP
                elif val < -LLR_CLIP:
                    val = -LLR_CLIP
                l0[v] = val
                out_bits[b, v] = 1 if val < 0 else 0

            ok = True
            for c in range(m):
                s = 0
                for j in range(check_ptr[c], check_ptr[c + 1]):
                    s ^= out_bits[b, ce_var[j]]
                if s == 1:
                    ok = False
                    break
            if ok:
                out_conv[b] = True
                out_iters[b] = 0
                continue

            for e in range(n_edges):
                mu[e] = l0[ce_var[e]]

            out_conv[b] = False
            out_iters[b] = max_iter
            for it in range(1, max_iter + 1):
                for c in range(m):
                    start = check_ptr[c]
                    deg = check_ptr[c + 1] - start
                    for idx in range(deg):
                        tt[idx] = math.tanh(0.5 * mu[start + idx])
                    acc = 1.0
                    for idx in range(deg):
                        fwd[idx] = acc
                        acc *= tt[idx]
                    bwd = 1.0
                    for idx in range(deg - 1, -1, -1):
                        p = fwd[idx] * bwd
                        if p > _PROD_CLIP:
                            p = _PROD_CLIP
                        elif p < -_PROD_CLIP:
                            p = -_PROD_CLIP
                        lam[start + idx] = 2.0 * math.atanh(p)
                        bwd *= tt[idx]

                for v in range(n):
                    tot = l0[v]
                    for j in range(var_ptr[v], var_ptr[v + 1]):
                        tot += lam[var_order[j]]
                    post[v] = tot
                    for j in range(var_ptr[v], var_ptr[v + 1]):
                        e = var_order[j]
                        val = tot - lam[e]
                        if val > LLR_CLIP:
                            val = LLR_CLIP
                        elif val < -LLR_CLIP:
                            val = -LLR_CLIP
                        mu[e] = val

                for v in range(n):
                    out_bits[b, v] = 1 if post[v] < 0 else 0
                ok = True
                for c in range(m):
                    s = 0
                    for j in range(check_ptr[c], check_ptr[c + 1]):
                        s ^= out_bits[b, ce_var[j]]
                    if s == 1:
                        ok = False
                        break
                if ok:
                    out_conv[b] = True
                    out_iters[b] = it
                    break

    def decode_blocks_numba(
        llrs: np.ndarray,
        ce_var: np.ndarray,
        check_ptr: np.ndarray,
        var_order: np.ndarray,
        var_ptr: np.ndarray,
        max_iter: int,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        llrs = np.ascontiguousarray(np.atleast_2d(llrs), dtype=np.float64)
        nblocks, n = llrs.shape
        out_bits = np.zeros((nblocks, n), dtype=np.uint8)
        out_conv = np.zeros(nblocks, dtype=np.bool_)
        out_iters = np.zeros(nblocks, dtype=np.int32)
        _decode_batch_numba(
            llrs, ce_var, check_ptr, var_order, var_ptr, max_iter,
            out_bits, out_conv, out_iters,
        )
        return out_bits, out_conv, out_iters


def decode_blocks(
    llrs: np.ndarray, graph, max_iter: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decode a batch of LLR rows with the selected backend.

    Returns hard-decision codeword bits (B, n), a per-block convergence flag
    (syndrome satisfied), and per-block iteration counts.
    """
    args = (graph.ce_var, graph.check_ptr, graph.var_order, graph.var_ptr, max_iter)
    if BACKEND == "numba":
        return decode_blocks_numba(llrs, *args)
    return decode_blocks_numpy(llrs, *args)
