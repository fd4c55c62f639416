"""Pure NumPy/Python kernels: the fallback twin of the Cython extension.

Contract shared with ``_kernels.pyx`` (identical results bit for bit):

* ``solve_r_matching``: greedy fill in left-vertex/adjacency order, then
  augmenting paths scanning free capacity in left-index order and neighbors
  in adjacency order.
* ``removal_phase``: agents scanned in ascending order, rivals in ascending
  order; the removal order within a pair sorts by (descending rival value,
  ascending item index); every top-r sum adds values in descending order.
* ``brute_force_count``: owner sequences enumerated lexicographically with
  item 0 most significant; bundle sums accumulate in ascending item order.
* ``max_envy``: bundle sums accumulate in ascending item order; the reported
  pair is the row-major-first maximizer of the deficit.
"""

from __future__ import annotations

import numpy as np


def solve_r_matching(indptr, indices, left_count, right_count, r):
    """Perfect r-matching of a bipartite CSR graph, or None.

    Returns an int32 array mapping each right vertex to its left vertex.
    Assumes right_count == r * left_count (the caller checks).
    """
    ptr = indptr.tolist()
    adj = indices.tolist()
    owner = [-1] * right_count
    filled = [0] * left_count

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

    visited = [0] * right_count
    stamp = 0
    for i in range(left_count):
        while filled[i] < r:
            stamp += 1
            if not _augment(i, ptr, adj, owner, filled, visited, stamp):
                return None
    return np.array(owner, dtype=np.int32)


def _augment(start, ptr, adj, owner, filled, visited, stamp):
    frame_u = [start]
    frame_via = [-1]
    frame_pos = [ptr[start]]
    while frame_u:
        u = frame_u[-1]
        pos = frame_pos[-1]
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
                for t in range(len(frame_u) - 1, 0, -1):
                    owner[frame_via[t]] = frame_u[t - 1]
                filled[start] += 1
                return True
            frame_pos[-1] = pos
            frame_u.append(v)
            frame_via.append(j)
            frame_pos.append(ptr[v])
            pushed = True
            break
        if not pushed:
            frame_u.pop()
            frame_via.pop()
            frame_pos.pop()
    return False


def _descending_sum(values, r):
    """Sequential sum of the first r entries of a descending list."""
    total = 0.0
    for v in values[:r]:
        total += v
    return total


def _top_r_sums(block, r):
    """Per-row sums of the r largest entries (descending, sequential)."""
    k = block.shape[1]
    if k > r:
        block = np.partition(block, k - r, axis=1)[:, k - r :]
    top = np.sort(block, axis=1)[:, ::-1]
    return np.cumsum(top, axis=1)[:, -1]


def removal_phase(U, r, tau):
    """Prune each agent's candidate items until no rival's top-r sum exceeds r*tau.

    Returns (keep, removals): ``keep`` is the n x m uint8 candidate mask
    after pruning and ``removals`` is a k x 3 int32 array of
    (agent, item, rival) rows in removal order.
    """
    n, m = U.shape
    keep = U >= tau
    removals = []
    rtau = r * tau
    for i in range(n):
        cand = np.flatnonzero(keep[i])
        if cand.size == 0 or n == 1:
            continue
        # Top-r sums only shrink as the candidate set shrinks, so rivals
        # whose sum over the initial set already fits can be skipped.
        sums = _top_r_sums(U[:, cand], r)
        sums[i] = -np.inf
        for ip in np.flatnonzero(sums > rtau):
            ip = int(ip)
            vals = U[ip, cand]
            order = np.lexsort((cand, -vals))
            ranked = vals[order].tolist()
            removed = 0
            while _descending_sum(ranked[removed:], r) > rtau:
                removed += 1
            if removed:
                for pos in order[:removed]:
                    removals.append((i, int(cand[pos]), ip))
                keep[i, cand[order[:removed]]] = False
                sel = np.ones(cand.size, dtype=bool)
                sel[order[:removed]] = False
                cand = cand[sel]
                if cand.size == 0:
                    break
    out = np.array(removals, dtype=np.int32).reshape(-1, 3)
    return keep.astype(np.uint8), out


def brute_force_count(U):
    """Count envy-free owner sequences; return (count, first witness or None)."""
    n, m = U.shape
    total = n**m
    if m == 0:
        return 1, np.empty(0, dtype=np.int32)
    count = 0
    witness = None
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        owners = np.empty((idx.size, m), dtype=np.int64)
        rem = idx
        for j in range(m):
            p = n ** (m - 1 - j)
            owners[:, j] = rem // p
            rem = rem % p
        rows = np.arange(idx.size)
        bundles = np.zeros((idx.size, n, n))
        for j in range(m):
            bundles[rows, :, owners[:, j]] += U[:, j]
        own = bundles[:, np.arange(n), np.arange(n)]
        ef = np.all(bundles <= own[:, :, None], axis=(1, 2))
        hits = int(np.count_nonzero(ef))
        if witness is None and hits:
            witness = owners[int(np.argmax(ef))].astype(np.int32)
        count += hits
    return count, witness


def max_envy(U, owner):
    """Max of u_i(bundle_j) - u_i(bundle_i) with its row-major-first pair."""
    n, m = U.shape
    bundles = np.zeros((n, n))
    for a in range(n):
        items = np.flatnonzero(owner == a)
        if items.size:
            bundles[:, a] = np.cumsum(U[:, items], axis=1)[:, -1]
    deficits = bundles - np.diag(bundles)[:, None]
    np.fill_diagonal(deficits, -np.inf)
    flat = int(np.argmax(deficits))
    i, j = divmod(flat, n)
    return i, j, float(deficits[i, j])
