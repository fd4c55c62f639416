# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: the fast twin of ``_kernels_py``.

Traversal and summation orders are pinned to match the fallback bit for bit:
left vertices and rivals scan in ascending index order, removal order within
a pair is (descending rival value, ascending item index), every top-r sum
adds values in descending order, and bundle sums accumulate in ascending
item order. See ``_kernels_py`` for the shared contract.
"""

import numpy as np


def solve_r_matching(indptr, indices, int left_count, int right_count, int r):
    """Perfect r-matching of a bipartite CSR graph, or None."""
    cdef const int[:] ptr = indptr
    cdef const int[:] adj = indices
    owner_arr = np.full(right_count, -1, dtype=np.int32)
    cdef int[:] owner = owner_arr
    filled_arr = np.zeros(left_count, dtype=np.int32)
    cdef int[:] filled = filled_arr
    cdef int i, k, j, got

    for i in range(left_count):
        got = 0
        for k in range(ptr[i], ptr[i + 1]):
            if got == r:
                break
            j = adj[k]
            if owner[j] < 0:
                owner[j] = i
                got += 1
        filled[i] = got

    visited_arr = np.zeros(right_count, dtype=np.int32)
    cdef int[:] visited = visited_arr
    # frame stack for the iterative augmenting DFS; at most one frame per
    # right vertex plus the root
    frame_u_arr = np.empty(right_count + 1, dtype=np.int32)
    frame_via_arr = np.empty(right_count + 1, dtype=np.int32)
    frame_pos_arr = np.empty(right_count + 1, dtype=np.int32)
    cdef int[:] frame_u = frame_u_arr
    cdef int[:] frame_via = frame_via_arr
    cdef int[:] frame_pos = frame_pos_arr
    cdef int stamp = 0

    for i in range(left_count):
        while filled[i] < r:
            stamp += 1
            if not _augment(i, ptr, adj, owner, filled, visited, stamp,
                            frame_u, frame_via, frame_pos):
                return None
    return owner_arr


cdef bint _augment(int start, const int[:] ptr, const int[:] adj, int[:] owner, int[:] filled,
                   int[:] visited, int stamp,
                   int[:] frame_u, int[:] frame_via, int[:] frame_pos):
    cdef int top = 0
    cdef int u, pos, end, j, v, t
    cdef bint pushed
    frame_u[0] = start
    frame_via[0] = -1
    frame_pos[0] = ptr[start]
    while top >= 0:
        u = frame_u[top]
        pos = frame_pos[top]
        end = ptr[u + 1]
        pushed = False
        while pos < end:
            j = adj[pos]
            pos += 1
            if visited[j] == stamp:
                continue
            visited[j] = stamp
            v = owner[j]
            if v < 0:
                owner[j] = u
                for t in range(top, 0, -1):
                    owner[frame_via[t]] = frame_u[t - 1]
                filled[start] += 1
                return True
            frame_pos[top] = pos
            top += 1
            frame_u[top] = v
            frame_via[top] = j
            frame_pos[top] = ptr[v]
            pushed = True
            break
        if not pushed:
            top -= 1
    return False


cdef double _top_r_sum(double[:] vals, int k, int r) nogil:
    """Sequential sum of the r largest of vals[:k], added in descending order.

    Selection by repeated max scan; equal values contribute identically in
    any selection order, so the result matches a descending sort + prefix sum.
    """
    cdef double total = 0.0
    cdef double best
    cdef int take = r if r < k else k
    cdef int t, s, best_at
    for t in range(take):
        best = -1.0
        best_at = -1
        for s in range(k):
            if vals[s] > best:
                best = vals[s]
                best_at = s
        total = total + best
        vals[best_at] = -1.0
    return total


def removal_phase(U, int r, double tau):
    """Prune candidate sets until every rival's top-r sum fits within r*tau.

    Returns (keep uint8 n x m, removals int32 k x 3 of (agent, item, rival)).
    """
    cdef const double[:, ::1] util = U
    cdef int n = util.shape[0]
    cdef int m = util.shape[1]
    keep_arr = np.zeros((n, m), dtype=np.uint8)
    cdef unsigned char[:, ::1] keep = keep_arr
    removals_arr = np.empty((n * m, 3), dtype=np.int32)
    cdef int[:, ::1] removals = removals_arr
    cdef int n_removed = 0

    cand_arr = np.empty(m, dtype=np.int32)
    cdef int[:] cand = cand_arr
    vals_arr = np.empty(m, dtype=np.float64)
    cdef double[:] vals = vals_arr
    scratch_arr = np.empty(m, dtype=np.float64)
    cdef double[:] scratch = scratch_arr
    order_arr = np.empty(m, dtype=np.int32)
    cdef int[:] order = order_arr

    cdef double rtau = r * tau
    cdef int i, ip, j, k, t, s, pos, removed, kept
    cdef double key_v
    cdef int key_j

    for i in range(n):
        k = 0
        for j in range(m):
            if util[i, j] >= tau:
                keep[i, j] = 1
                cand[k] = j
                k += 1
        if k == 0 or n == 1:
            continue
        for ip in range(n):
            if ip == i or k == 0:
                continue
            for t in range(k):
                scratch[t] = util[ip, cand[t]]
            if _top_r_sum(scratch, k, r) <= rtau:
                continue
            # removal order: descending rival value, ties by ascending item
            # index (cand is ascending, so insertion sort keeps ties stable)
            for t in range(k):
                vals[t] = util[ip, cand[t]]
                order[t] = cand[t]
            for t in range(1, k):
                key_v = vals[t]
                key_j = order[t]
                s = t - 1
                while s >= 0 and vals[s] < key_v:
                    vals[s + 1] = vals[s]
                    order[s + 1] = order[s]
                    s -= 1
                vals[s + 1] = key_v
                order[s + 1] = key_j
            removed = 0
            while _window_sum(vals, removed, k, r) > rtau:
                removed += 1
            for t in range(removed):
                removals[n_removed, 0] = i
                removals[n_removed, 1] = order[t]
                removals[n_removed, 2] = ip
                n_removed += 1
                keep[i, order[t]] = 0
            if removed:
                kept = 0
                for j in range(m):
                    if keep[i, j]:
                        cand[kept] = j
                        kept += 1
                k = kept
    return keep_arr, removals_arr[:n_removed].copy()


cdef double _window_sum(double[:] vals, int start, int k, int r) nogil:
    """Sequential sum of vals[start : start + r] (descending values)."""
    cdef double total = 0.0
    cdef int stop = start + r
    cdef int t
    if stop > k:
        stop = k
    for t in range(start, stop):
        total = total + vals[t]
    return total


def brute_force_count(U):
    """Count envy-free owner sequences; return (count, first witness or None)."""
    cdef const double[:, ::1] util = U
    cdef int n = util.shape[0]
    cdef int m = util.shape[1]
    if m == 0:
        return 1, np.empty(0, dtype=np.int32)

    bundles_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] bundles = bundles_arr
    saved_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] saved = saved_arr
    o_arr = np.full(m, -1, dtype=np.int32)
    cdef int[:] o = o_arr
    witness_arr = np.empty(m, dtype=np.int32)
    cdef int[:] witness = witness_arr

    cdef long long count = 0
    cdef bint have_witness = False
    cdef int d = 0
    cdef int a, i, ip, prev
    cdef double own
    cdef bint ef

    while d >= 0:
        if o[d] >= 0:
            prev = o[d]
            for i in range(n):
                bundles[i, prev] = saved[d, i]
        o[d] += 1
        if o[d] == n:
            o[d] = -1
            d -= 1
            continue
        a = o[d]
        for i in range(n):
            saved[d, i] = bundles[i, a]
            bundles[i, a] = bundles[i, a] + util[i, d]
        if d == m - 1:
            ef = True
            for i in range(n):
                own = bundles[i, i]
                for ip in range(n):
                    if bundles[i, ip] > own:
                        ef = False
                        break
                if not ef:
                    break
            if ef:
                count += 1
                if not have_witness:
                    for i in range(m):
                        witness[i] = o[i]
                    have_witness = True
        else:
            d += 1
    if have_witness:
        return count, witness_arr
    return count, None


def max_envy(U, owner):
    """Max of u_i(bundle_j) - u_i(bundle_i) with its row-major-first pair."""
    cdef const double[:, ::1] util = U
    cdef const int[:] own = owner
    cdef int n = util.shape[0]
    cdef int m = util.shape[1]
    bundles_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] bundles = bundles_arr
    cdef int i, j, a, ip
    cdef int best_i = 0, best_j = 1
    cdef double best = -np.inf
    cdef double d

    for j in range(m):
        a = own[j]
        for i in range(n):
            bundles[i, a] = bundles[i, a] + util[i, j]
    for i in range(n):
        for ip in range(n):
            if ip == i:
                continue
            d = bundles[i, ip] - bundles[i, i]
            if d > best:
                best = d
                best_i = i
                best_j = ip
    return best_i, best_j, best
