"""Hot loops with numba implementations and pure fallbacks.

Set BOWLAB_NO_NUMBA=1 to force the fallbacks (used by tests and the
benchmark to compare both paths).  Both paths return identical arrays.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("BOWLAB_NO_NUMBA", "").strip() not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def _bct_enumerate_py(r, c, limit):
    r = np.asarray(r, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    m, n = len(r), len(c)
    out = []
    if m == 0 or n == 0:
        if r.sum() == 0 and c.sum() == 0:
            return np.zeros((1, m, n), dtype=np.int8)
        return np.zeros((0, m, n), dtype=np.int8)
    # suffix sums of remaining row demands for pruning
    table = np.zeros((m, n), dtype=np.int8)
    row_rem = r.copy()
    col_rem = c.copy()

    def feasible_suffix(i):
        # Gale-Ryser on rows i.. and residual columns
        rows = sorted(int(x) for x in r[i:])
        total = sum(rows)
        if total != int(col_rem.sum()):
            return False
        if any(x > m - i for x in col_rem):
            return False
        cs = sorted((int(x) for x in col_rem), reverse=True)
        conj = [sum(1 for x in rows if x > k) for k in range(n)]
        acc_c = acc_r = 0
        for k in range(n):
            acc_c += cs[k]
            acc_r += conj[k]
            if acc_c > acc_r:
                return False
        return True

    def rec(cell):
        if limit >= 0 and len(out) >= limit:
            return
        i, j = divmod(cell, n)
        if i == m:
            out.append(table.copy())
            return
        for val in (0, 1):
            if val == 1 and (row_rem[i] == 0 or col_rem[j] == 0):
                continue
            if val == 0 and row_rem[i] > n - j - 1:
                continue
            table[i, j] = val
            row_rem[i] -= val
            col_rem[j] -= val
            ok = True
            if j == n - 1:
                ok = row_rem[i] == 0 and feasible_suffix(i + 1)
            if ok:
                rec(cell + 1)
            row_rem[i] += val
            col_rem[j] += val
            table[i, j] = 0

    if int(r.sum()) == int(c.sum()) and feasible_suffix(0):
        rec(0)
    if not out:
        return np.zeros((0, m, n), dtype=np.int8)
    return np.stack(out).astype(np.int8)


@njit(cache=True)
def _suffix_ok(r, col_rem, start, m, n):
    total = 0
    for k in range(start, m):
        total += r[k]
    s = 0
    for k in range(n):
        s += col_rem[k]
        if col_rem[k] > m - start:
            return False
    if s != total:
        return False
    cs = np.sort(col_rem)[::-1]
    acc_c = 0
    acc_r = 0
    for k in range(n):
        acc_c += cs[k]
        cnt = 0
        for t in range(start, m):
            if r[t] > k:
                cnt += 1
        acc_r += cnt
        if acc_c > acc_r:
            return False
    return True


@njit(cache=True)
def _bct_enumerate_nb(r, c, limit):
    m = r.shape[0]
    n = c.shape[0]
    cap = 64
    out = np.zeros((cap, m, n), dtype=np.int8)
    count = 0
    table = np.zeros((m, n), dtype=np.int8)
    row_rem = r.copy()
    col_rem = c.copy()
    total = m * n
    # state per cell: -1 untried, 0 tried 0, 1 tried 1
    state = np.full(total + 1, -1, dtype=np.int64)
    if not _suffix_ok(r, col_rem, 0, m, n):
        return out[:0]
    cell = 0
    while cell >= 0:
        if cell == total:
            if count == cap:
                bigger = np.zeros((cap * 2, m, n), dtype=np.int8)
                bigger[:cap] = out
                out = bigger
                cap *= 2
            out[count] = table
            count += 1
            if limit >= 0 and count >= limit:
                break
            cell -= 1
            continue
        i = cell // n
        j = cell % n
        st = state[cell]
        # undo previous choice at this cell
        if st >= 0:
            row_rem[i] += table[i, j]
            col_rem[j] += table[i, j]
            table[i, j] = 0
        advanced = False
        nxt = st + 1
        while nxt <= 1:
            val = nxt
            ok = True
            if val == 1 and (row_rem[i] == 0 or col_rem[j] == 0):
                ok = False
            if val == 0 and row_rem[i] > n - j - 1:
                ok = False
            if ok:
                table[i, j] = val
                row_rem[i] -= val
                col_rem[j] -= val
                if j == n - 1:
                    if row_rem[i] != 0 or not _suffix_ok(r, col_rem, i + 1, m, n):
                        ok = False
                if not ok:
                    row_rem[i] += val
                    col_rem[j] += val
                    table[i, j] = 0
            if ok:
                state[cell] = val
                advanced = True
                break
            nxt += 1
        if advanced:
            cell += 1
            if cell < total:
                state[cell] = -1
        else:
            state[cell] = -1
            cell -= 1
    return out[:count]


def bct_enumerate(r, c, limit: int = -1) -> np.ndarray:
    """All 0/1 tables with row sums r and column sums c, lexicographic in row-major order."""
    r_arr = np.asarray(list(r), dtype=np.int64)
    c_arr = np.asarray(list(c), dtype=np.int64)
    m, n = len(r_arr), len(c_arr)
    if m == 0 or n == 0 or not HAVE_NUMBA:
        return _bct_enumerate_py(r_arr, c_arr, limit)
    if int(r_arr.sum()) != int(c_arr.sum()):
        return np.zeros((0, m, n), dtype=np.int8)
    return _bct_enumerate_nb(r_arr, c_arr, limit)


def _eps_orders_py(zero_mask, exps, offsets):
    out = np.zeros(len(offsets) - 1, dtype=np.int64)
    for s in range(len(offsets) - 1):
        a, b = offsets[s], offsets[s + 1]
        out[s] = int(np.sum(exps[a:b] * zero_mask[a:b]))
    return out


@njit(cache=True)
def _eps_orders_nb(zero_mask, exps, offsets):
    k = offsets.shape[0] - 1
    out = np.zeros(k, dtype=np.int64)
    for s in range(k):
        acc = 0
        for t in range(offsets[s], offsets[s + 1]):
            if zero_mask[t]:
                acc += exps[t]
        out[s] = acc
    return out


def eps_orders(zero_mask, exps, offsets) -> np.ndarray:
    """Order in eps of each summand: sum of exponents of factors vanishing at eps = 0.

    Factors of all summands are stored flat; summand s owns factors
    offsets[s]:offsets[s+1].
    """
    zero_mask = np.ascontiguousarray(zero_mask, dtype=np.bool_)
    exps = np.ascontiguousarray(exps, dtype=np.int64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    if HAVE_NUMBA:
        return _eps_orders_nb(zero_mask, exps, offsets)
    return _eps_orders_py(zero_mask, exps, offsets)
