"""LDPC code construction, systematic encoding, and alist file I/O.

The default code is a (3,6)-regular rate-1/2 Gallager-style code built from
a seeded random socket pairing, repaired by degree-preserving edge swaps
until it is simple (no repeated edges) and free of length-4 cycles, and kept
only when its parity-check matrix has full rank so that a systematic
generator exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# First seed for which the default construction is simple, 4-cycle free and
# full rank without reseeding.
DEFAULT_CODE_SEED = 7

_MAX_SWAP_ROUNDS = 200
_MAX_RESEEDS = 50


class CodeConstructionError(ValueError):
    """Could not build a usable parity-check matrix."""


@dataclass(frozen=True)
class CodeGraph:
    """Flat edge arrays of H for the iterative decoder.

    Edges are stored twice-sorted: ``ce_var`` lists the variable node of each
    edge in check-major order (ranges per check in ``check_ptr``), while
    ``var_order`` permutes those edge ids into variable-major order (ranges
    per variable in ``var_ptr``).
    """

    ce_var: np.ndarray
    check_ptr: np.ndarray
    var_order: np.ndarray
    var_ptr: np.ndarray

    @classmethod
    def from_h(cls, h: np.ndarray) -> "CodeGraph":
        checks, vars_ = np.nonzero(h)
        order = np.lexsort((vars_, checks))
        ce_var = vars_[order].astype(np.int32)
        ce_check = checks[order]
        m = h.shape[0]
        n = h.shape[1]
        check_ptr = np.zeros(m + 1, dtype=np.int32)
        np.add.at(check_ptr, ce_check + 1, 1)
        check_ptr = np.cumsum(check_ptr).astype(np.int32)
        var_order = np.argsort(ce_var, kind="stable").astype(np.int32)
        var_ptr = np.zeros(n + 1, dtype=np.int32)
        np.add.at(var_ptr, ce_var + 1, 1)
        var_ptr = np.cumsum(var_ptr).astype(np.int32)
        return cls(ce_var=ce_var, check_ptr=check_ptr, var_order=var_order, var_ptr=var_ptr)


@dataclass(frozen=True)
class LdpcCode:
    """Binary LDPC code with a systematic encoder derived from H."""

    h: np.ndarray  # (m, n) uint8 parity-check matrix
    col_perm: np.ndarray  # (n,) column order that makes H = [A | I] reachable
    parity_gen: np.ndarray  # (k, m) uint8: parity = message @ parity_gen mod 2
    graph: CodeGraph = field(repr=False)

    @property
    def n(self) -> int:
        return self.h.shape[1]

    @property
    def m(self) -> int:
        return self.h.shape[0]

    @property
    def k(self) -> int:
        return self.n - self.m

    @property
    def rate(self) -> float:
        return self.k / self.n

    @property
    def message_positions(self) -> np.ndarray:
        """Codeword indices that carry the systematic message bits."""
        return self.col_perm[: self.k]

    @classmethod
    def from_h(cls, h: np.ndarray) -> "LdpcCode":
        h = np.ascontiguousarray(h, dtype=np.uint8) & 1
        col_perm, parity_gen = _systematic_form(h)
        return cls(
            h=h,
            col_perm=col_perm,
            parity_gen=parity_gen,
            graph=CodeGraph.from_h(h),
        )


def _systematic_form(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column permutation and parity generator via GF(2) Gauss-Jordan.

    Finds a permutation P so that H[:, P] = [A | I_m]; then a codeword in
    permuted order is [u | u A^T] and the generator is implicit in A.
    """
    m, n = h.shape
    k = n - m
    work = h.copy()
    perm = np.arange(n)
    for i in range(m):
        piv = k + i
        if not work[i:, piv].any():
            # no pivot here: borrow any not-yet-fixed column that has one
            candidates = [c for c in range(k + i) if work[i:, c].any()]
            candidates += [c for c in range(piv + 1, n) if work[i:, c].any()]
            if not candidates:
                raise CodeConstructionError("parity-check matrix is rank deficient")
            c = candidates[0]
            work[:, [c, piv]] = work[:, [piv, c]]
            perm[[c, piv]] = perm[[piv, c]]
        r = i + int(np.nonzero(work[i:, piv])[0][0])
        if r != i:
            work[[i, r]] = work[[r, i]]
        elim = np.nonzero(work[:, piv])[0]
        elim = elim[elim != i]
        if elim.size:
            work[elim] ^= work[i]
    a = work[:, :k]  # m x k, parity = u @ a.T
    return perm, np.ascontiguousarray(a.T, dtype=np.uint8)


def ldpc_encode(messages: np.ndarray, code: LdpcCode) -> np.ndarray:
    """Systematic encoding of one message (k,) or a batch (B, k)."""
    msgs = np.atleast_2d(np.asarray(messages, dtype=np.uint8))
    if msgs.shape[1] != code.k:
        raise ValueError(f"message length {msgs.shape[1]} != k={code.k}")
    parity = (msgs.astype(np.int32) @ code.parity_gen.astype(np.int32)) % 2
    out = np.zeros((msgs.shape[0], code.n), dtype=np.uint8)
    out[:, code.col_perm[: code.k]] = msgs
    out[:, code.col_perm[code.k :]] = parity.astype(np.uint8)
    if np.asarray(messages).ndim == 1:
        return out[0]
    return out


def extract_message(codewords: np.ndarray, code: LdpcCode) -> np.ndarray:
    """Systematic message bits of one codeword (n,) or a batch (B, n)."""
    cw = np.atleast_2d(np.asarray(codewords, dtype=np.uint8))
    msgs = cw[:, code.message_positions]
    if np.asarray(codewords).ndim == 1:
        return msgs[0]
    return msgs


def parity_check(codewords: np.ndarray, code: LdpcCode) -> np.ndarray:
    """True per codeword when H c^T = 0."""
    cw = np.atleast_2d(np.asarray(codewords, dtype=np.int32))
    syndrome = (cw @ code.h.T.astype(np.int32)) % 2
    ok = ~syndrome.any(axis=1)
    if np.asarray(codewords).ndim == 1:
        return bool(ok[0])
    return ok


def _find_violations(col_rows: list[list[int]]) -> list[tuple[int, int]]:
    """(column, row) edges involved in repeated edges or 4-cycles."""
    bad: list[tuple[int, int]] = []
    pair_owner: dict[tuple[int, int], int] = {}
    for c, rows in enumerate(col_rows):
        seen: set[int] = set()
        for r in rows:
            if r in seen:
                bad.append((c, r))
            seen.add(r)
        srows = sorted(set(rows))
        for i in range(len(srows)):
            for j in range(i + 1, len(srows)):
                pair = (srows[i], srows[j])
                if pair in pair_owner:
                    bad.append((c, srows[j]))
                else:
                    pair_owner[pair] = c
    return bad


def _build_regular_h(n: int, wc: int, wr: int, rng: np.random.Generator) -> np.ndarray | None:
    """One attempt at a simple, 4-cycle-free (wc, wr)-regular H."""
    m = n * wc // wr
    edge_cols = np.repeat(np.arange(n), wc)
    edge_rows = np.repeat(np.arange(m), wr)
    rng.shuffle(edge_rows)

    e = n * wc
    for _ in range(_MAX_SWAP_ROUNDS):
        col_rows: list[list[int]] = [[] for _ in range(n)]
        for idx in range(e):
            col_rows[edge_cols[idx]].append(int(edge_rows[idx]))
        bad = _find_violations(col_rows)
        if not bad:
            h = np.zeros((m, n), dtype=np.uint8)
            h[edge_rows, edge_cols] = 1
            return h
        # swap each offending edge's row with a random other edge's row
        for c, r in bad:
            cand = [i for i in range(e) if edge_cols[i] == c and edge_rows[i] == r]
            if not cand:
                continue
            i = cand[0]
            j = int(rng.integers(e))
            edge_rows[i], edge_rows[j] = edge_rows[j], edge_rows[i]
    return None


def make_gallager_code(
    n: int = 1024, wc: int = 3, wr: int = 6, seed: int = DEFAULT_CODE_SEED
) -> LdpcCode:
    """Seeded (wc, wr)-regular rate-(1 - wc/wr) code; deterministic per seed."""
    if n * wc % wr != 0:
        raise CodeConstructionError(f"n*wc={n * wc} not divisible by wr={wr}")
    for attempt in range(_MAX_RESEEDS):
        rng = np.random.default_rng(np.random.SeedSequence((seed, attempt)))
        h = _build_regular_h(n, wc, wr, rng)
        if h is None:
            continue
        try:
            return LdpcCode.from_h(h)
        except CodeConstructionError:
            continue
    raise CodeConstructionError(
        f"no usable code found for n={n}, wc={wc}, wr={wr}, seed={seed}"
    )


_default_code: LdpcCode | None = None


def default_code() -> LdpcCode:
    """The shared default code instance (built once, then cached)."""
    global _default_code
    if _default_code is None:
        _default_code = make_gallager_code()
    return _default_code


def save_alist(h: np.ndarray | LdpcCode, path: str | Path) -> None:
    """Write H in the standard alist sparse-matrix text format."""
    if isinstance(h, LdpcCode):
        h = h.h
    h = np.asarray(h, dtype=np.uint8)
    m, n = h.shape
    col_idx = [np.nonzero(h[:, j])[0] + 1 for j in range(n)]
    row_idx = [np.nonzero(h[i, :])[0] + 1 for i in range(m)]
    max_col = max((len(c) for c in col_idx), default=0)
    max_row = max((len(r) for r in row_idx), default=0)
    lines = [
        f"{n} {m}",
        f"{max_col} {max_row}",
        " ".join(str(len(c)) for c in col_idx),
        " ".join(str(len(r)) for r in row_idx),
    ]
    for c in col_idx:
        padded = list(c) + [0] * (max_col - len(c))
        lines.append(" ".join(str(v) for v in padded))
    for r in row_idx:
        padded = list(r) + [0] * (max_row - len(r))
        lines.append(" ".join(str(v) for v in padded))
    Path(path).write_text("\n".join(lines) + "\n")


def load_alist(path: str | Path) -> np.ndarray:
    """Read an alist file back into a dense uint8 parity-check matrix."""
    tokens = Path(path).read_text().split()
    it = iter(tokens)

    def nxt() -> int:
        try:
            return int(next(it))
        except StopIteration as exc:
            raise ValueError(f"{path}: truncated alist file") from exc

    n, m = nxt(), nxt()
    max_col, _max_row = nxt(), nxt()
    col_w = [nxt() for _ in range(n)]
    _row_w = [nxt() for _ in range(m)]
    h = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        for _ in range(max_col):
            r = nxt()
            if r:
                h[r - 1, j] = 1
        if int(h[:, j].sum()) != col_w[j]:
            raise ValueError(f"{path}: column {j} weight mismatch")
    # row lists are redundant with the column lists; skip the rest
    return h
